#include "cfmimo/cluster.hpp"

#include <algorithm>
#include <stdexcept>

namespace cfmimo {

int Association::num_served() const {
  int n = 0;
  for (const auto& c : clusters)
    if (!c.empty()) ++n;
  return n;
}

Association Association::from_clusters(int num_rus, int num_ues,
                                       std::vector<std::vector<int>> clusters) {
  Association a;
  a.num_rus = num_rus;
  a.num_ues = num_ues;
  a.clusters = std::move(clusters);
  a.served.assign(num_rus, {});
  a.incidence.assign(static_cast<size_t>(num_rus) * num_ues, 0);
  a.link_of.assign(static_cast<size_t>(num_rus) * num_ues, -1);
  for (int k = 0; k < num_ues; ++k) {
    for (int l : a.clusters[k]) {
      if (l < 0 || l >= num_rus) throw std::invalid_argument("Association: RU index out of range");
      a.incidence[static_cast<size_t>(l) * num_ues + k] = 1;
      a.served[l].push_back(k);
    }
  }
  for (auto& u : a.served) std::sort(u.begin(), u.end());
  for (int k = 0; k < num_ues; ++k)
    for (int l : a.clusters[k]) {
      a.link_of[static_cast<size_t>(l) * num_ues + k] = static_cast<int>(a.link_list.size());
      a.link_list.emplace_back(k, l);
    }
  return a;
}

Association form_clusters(const ChannelStats& stats, double snr, const ClusterParams& params) {
  const int L = stats.num_rus;
  const int K = stats.num_ues;
  const double gate = params.snr_threshold / (stats.antennas * snr);

  std::vector<std::vector<int>> clusters(K);
  for (int k = 0; k < K; ++k) {
    std::vector<int> candidates;
    for (int l = 0; l < L; ++l)
      if (stats.lsfc(l, k) >= gate) candidates.push_back(l);
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      return stats.lsfc(a, k) > stats.lsfc(b, k);
    });
    if (static_cast<int>(candidates.size()) > params.max_cluster_size)
      candidates.resize(params.max_cluster_size);
    clusters[k] = std::move(candidates);
  }
  return Association::from_clusters(L, K, std::move(clusters));
}

double subspace_overlap(const std::vector<int>& s1, const std::vector<int>& s2, int antennas) {
  if (s1.empty() || s2.empty()) throw std::invalid_argument("subspace_overlap: empty support");
  for (int m : s1)
    if (m < 0 || m >= antennas) throw std::invalid_argument("subspace_overlap: index out of range");
  double overlap = 0.0;
  for (int m : s1)
    if (std::find(s2.begin(), s2.end(), m) != s2.end()) overlap += 1.0;
  return overlap;
}

PilotAssignment assign_pilots(const Association& assoc, const ChannelStats& stats,
                              const PilotParams& params) {
  if (params.num_pilots <= 0) throw std::invalid_argument("assign_pilots: num_pilots must be >= 1");
  const int K = assoc.num_ues;

  PilotAssignment out;
  out.num_pilots = params.num_pilots;
  out.pilot.assign(K, -1);

  std::vector<int> order;
  for (int k = 0; k < K; ++k)
    if (assoc.is_served(k)) order.push_back(k);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    double ba = 0.0, bb = 0.0;
    for (int l : assoc.clusters[a]) ba = std::max(ba, stats.lsfc(l, a));
    for (int l : assoc.clusters[b]) bb = std::max(bb, stats.lsfc(l, b));
    return ba > bb;
  });

  std::vector<char> used(params.num_pilots, 0);
  for (int k : order) {
    // Worst overlap against already-assigned co-served UEs, per pilot.
    std::vector<double> worst(params.num_pilots, 0.0);
    for (int l : assoc.clusters[k]) {
      for (int other : assoc.served[l]) {
        const int t = out.pilot[other];
        if (other == k || t < 0) continue;
        const double ov = subspace_overlap(stats.support[stats.index(l, k)],
                                           stats.support[stats.index(l, other)],
                                           stats.antennas);
        worst[t] = std::max(worst[t], ov);
      }
    }

    int chosen = -1;
    // Clean unused pilot first, then clean reuse.
    for (int t = 0; t < params.num_pilots && chosen < 0; ++t)
      if (!used[t] && worst[t] <= params.overlap_tolerance) chosen = t;
    for (int t = 0; t < params.num_pilots && chosen < 0; ++t)
      if (worst[t] <= params.overlap_tolerance) chosen = t;
    if (chosen < 0) {
      int best = 0;
      for (int t = 1; t < params.num_pilots; ++t)
        if (worst[t] < worst[best]) best = t;
      chosen = best;
      out.fallbacks.push_back({k, chosen, worst[chosen]});
    }
    out.pilot[k] = chosen;
    used[chosen] = 1;
  }
  return out;
}

}  // namespace cfmimo
