#pragma once

#include <utility>
#include <vector>

#include "cfmimo/channel.hpp"

namespace cfmimo {

struct ClusterParams {
  double snr_threshold = 1.0;  // admission gate relative to the noise floor
  int max_cluster_size = 7;
};

// UE-RU serving bipartite graph. clusters[k] keeps the serving RUs of UE k in
// selection order (decreasing LSFC, ties by lower RU index); served[l] keeps
// the UEs of RU l in ascending order. links() enumerates the pairs UE-major.
struct Association {
  int num_rus = 0;
  int num_ues = 0;
  std::vector<std::vector<int>> clusters;  // per UE
  std::vector<std::vector<int>> served;    // per RU
  std::vector<std::uint8_t> incidence;     // L*K dense flags
  std::vector<std::pair<int, int>> link_list;  // (ue, ru), UE-major
  std::vector<int> link_of;                    // L*K -> index into link_list or -1

  bool contains(int l, int k) const { return incidence[static_cast<size_t>(l) * num_ues + k] != 0; }
  bool is_served(int k) const { return !clusters[k].empty(); }
  int link_index(int l, int k) const { return link_of[static_cast<size_t>(l) * num_ues + k]; }
  int num_links() const { return static_cast<int>(link_list.size()); }
  int num_served() const;

  // Rebuilds served/incidence/link bookkeeping from `clusters`.
  static Association from_clusters(int num_rus, int num_ues,
                                   std::vector<std::vector<int>> clusters);
};

// LSFC-threshold admission followed by a largest-LSFC cap per UE.
Association form_clusters(const ChannelStats& stats, double snr, const ClusterParams& params);

// Trace of the projector product for two DFT-column subspaces; equals the
// size of the index-set intersection because the columns are orthonormal.
double subspace_overlap(const std::vector<int>& s1, const std::vector<int>& s2, int antennas);

struct PilotParams {
  int num_pilots = 0;
  double overlap_tolerance = 0.1;
};

struct PilotAssignment {
  int num_pilots = 0;
  std::vector<int> pilot;  // per UE, -1 when unserved

  // UEs that could not be given a conflict-free pilot; assigned the pilot
  // minimizing the worst overlap instead.
  struct Fallback {
    int ue;
    int pilot;
    double worst_overlap;
  };
  std::vector<Fallback> fallbacks;
};

// Greedy assignment in decreasing max-LSFC order. Pilots already used by a
// co-served UE are admissible only if every such UE passes the subspace
// overlap test at every shared RU; unused pilots are preferred so pilots are
// reused only once all are taken.
PilotAssignment assign_pilots(const Association& assoc, const ChannelStats& stats,
                              const PilotParams& params);

}  // namespace cfmimo
