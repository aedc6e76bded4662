#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "cfmimo/cluster.hpp"
#include "cfmimo/milp.hpp"
#include "cfmimo/topology.hpp"

namespace cfmimo {

enum class DuplexMode { Full, Half };

struct ClassWeights {
  double ru = 1.0;  // RU-router links
  double rr = 1.0;  // router-router links
  double du = 1.0;  // router-DU links
};

// Everything the routing and placement problems need: the effective
// association, per-link UL quantization rates (aligned with the association
// link list), per-UE DL rates, and the duplex split.
struct FlowProblemInput {
  NetworkTopology topology;
  Association assoc;
  std::vector<double> ul_rate_bits;  // per association link
  std::vector<double> dl_rate_bits;  // per UE
  double alpha_dl = 0.5;
  ClassWeights w_ul, w_dl, w_hd;

  std::vector<std::string> validate() const;
  nlohmann::json to_json() const;
  static FlowProblemInput from_json(const nlohmann::json& j);
};

// Built model plus the variable layout needed to read a solution back.
struct FlowModel {
  MilpModel model;
  DuplexMode mode = DuplexMode::Full;
  // var indices, -1 where a variable does not exist
  Eigen::MatrixXi x_ru, x_rr, x_du;  // UE x edge
  Eigen::MatrixXi y_ru, y_rr, y_du;
  Eigen::MatrixXi b;  // UE x DU
  int cap_ru_ul = -1, cap_rr_ul = -1, cap_du_ul = -1;
  int cap_ru_dl = -1, cap_rr_dl = -1, cap_du_dl = -1;
  int cap_ru = -1, cap_rr = -1, cap_du = -1;  // half duplex
  int aux_max = -1;                           // full duplex min-max variable
};

// Min-max of the weighted UL and DL capacity sums over independent per
// direction flows, coupled by the placement binaries.
FlowModel build_full_duplex_model(const FlowProblemInput& input);

// Single shared capacity per link class; UL demands scaled by (1 - alpha_dl)
// and DL demands by alpha_dl.
FlowModel build_half_duplex_model(const FlowProblemInput& input);

struct FlowSolution {
  DuplexMode mode = DuplexMode::Full;
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  double best_bound = 0.0;
  long nodes = 0;
  std::vector<int> placement;  // hosting DU per UE, -1 when unserved
  Eigen::MatrixXd x_ru, x_rr, x_du;
  Eigen::MatrixXd y_ru, y_rr, y_du;
  double cap_ru_ul = 0, cap_rr_ul = 0, cap_du_ul = 0;
  double cap_ru_dl = 0, cap_rr_dl = 0, cap_du_dl = 0;
  double cap_ru = 0, cap_rr = 0, cap_du = 0;
};

FlowSolution extract_solution(const FlowModel& fm, const Solution& sol,
                              const FlowProblemInput& input);

// Independent re-evaluation of every flow, placement, multicast, and
// capacity constraint at 1e-6 absolute tolerance. Violations are returned
// as data, one message per broken condition.
std::vector<std::string> verify_solution(const FlowSolution& fs, const FlowProblemInput& input);

struct FronthaulMetrics {
  double load_ul = 0.0;
  double load_dl = 0.0;
  double load_total = 0.0;
  // Half duplex diagnostics: per-direction flow maxima may exceed the shared
  // capacities when the binding links differ; the gap is reported.
  double hd_flow_total = 0.0;
  double hd_discrepancy = 0.0;
};

FronthaulMetrics fronthaul_capacities(const FlowSolution& fs, const FlowProblemInput& input);

// Exhaustive placement enumeration with an LP per assignment; the oracle for
// the branch and bound path. Guarded to at most 10^4 placements.
double brute_force_placement(const FlowProblemInput& input, DuplexMode mode,
                             const SolverOptions& opts = {});

// Build, solve, tighten capacities at fixed optimal placement, extract.
// Tightening re-solves with the binaries pinned so the reported capacities
// are the minimal ones compatible with the optimal objective, then minimizes
// total flow so idle links carry nothing.
FlowSolution solve_flow_problem(const FlowProblemInput& input, DuplexMode mode,
                                const SolverOptions& opts = {}, bool tighten = true);

}  // namespace cfmimo
