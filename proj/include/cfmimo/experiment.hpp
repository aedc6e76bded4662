#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cfmimo/flows.hpp"

namespace cfmimo {

enum class DuplexSelect { Full, Half, Both };

struct ExperimentConfig {
  int num_rus = 20;
  int num_ues = 70;
  int num_routers = 5;
  int num_dus = 4;
  int antennas = 10;
  double area_side = 200.0;
  int deg_ru_router = 2;
  int deg_router_du = 2;
  double angular_spread = M_PI / 8.0;
  int tau_p = 20;
  int block_len = 200;
  double snr_threshold = 1.0;
  int max_cluster_size = 7;
  double pilot_overlap_tolerance = 0.1;
  double alpha_dl = 0.5;
  std::vector<double> d_ratios = {0.04, 0.08, 0.16, 0.32, 0.64, 1.0, 1.6, 2.5, 4.0};
  int n_realizations = 100;
  int n_mc_sigma = 100;
  std::uint64_t seed = 1;
  DuplexSelect duplex = DuplexSelect::Both;
  LsfcModel lsfc;
  BetaBarMode beta_bar_mode = BetaBarMode::LosWeighted;
  ClassWeights w_ul, w_dl, w_hd;
  long node_limit = 1'000'000;
  double time_limit_s = 0.0;
  std::vector<double> du_capacity;  // empty = unbounded
  bool export_mps_files = false;

  std::vector<std::string> validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
};

struct SweepRow {
  double d_ratio = 0.0;
  double d = 0.0;
  double se_ul = 0.0;
  double se_dl = 0.0;
  double se_tot = 0.0;
  double fh_ul = 0.0;
  double fh_dl = 0.0;
  double fh_tot = 0.0;
  double objective = 0.0;
  std::string duplex;
  int n_pruned_links = 0;
  double runtime_s = 0.0;
  std::string error;  // empty on success; not part of the CSV contract
};

// Fraction of data dimensions times the duplex split, applied to the summed
// per-UE optimistic rates.
std::pair<double, double> compute_se(const std::vector<double>& ul_rates,
                                     const std::vector<double>& dl_rates, double alpha_dl,
                                     int tau_p, int block_len);

struct SweepResult {
  std::vector<SweepRow> rows;
  double snr = 0.0;
  double sigma2_min = 0.0;
  int n_unserved = 0;
  std::vector<std::string> violations;  // verifier output across all solves
};

// One network drop: topology, statistics, clusters, pilots, observation
// variances, then per distortion ratio the PHY rates and the routing
// problems. Channel realizations are shared across distortion points.
SweepResult run_distortion_sweep(const ExperimentConfig& cfg, const std::string& out_dir = "");

void emit_csv(const std::vector<SweepRow>& rows, std::ostream& os);
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace cfmimo
