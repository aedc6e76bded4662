#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cfmimo/rng.hpp"
#include "cfmimo/topology.hpp"

namespace cfmimo {

// 3GPP TR 38.901 urban microcell street canyon parameters.
struct LsfcModel {
  double carrier_freq_ghz = 3.5;
  double h_bs_m = 10.0;
  double h_ut_m = 1.5;
  double shadow_std_los_db = 4.0;
  double shadow_std_nlos_db = 7.82;
};

enum class BetaBarMode { LosWeighted, LosOnly, NlosOnly };

// Large-scale statistics per (RU, UE) link. Links are indexed ru-major:
// index(l, k) = l * num_ues + k.
struct ChannelStats {
  int num_rus = 0;
  int num_ues = 0;
  int antennas = 0;  // per RU
  Eigen::MatrixXd lsfc;   // L x K linear power gain
  Eigen::MatrixXd angle;  // L x K radians, torus-shortest RU->UE direction
  std::vector<std::uint8_t> los;         // L*K
  std::vector<std::vector<int>> support;  // L*K, DFT column indices in [0, antennas)

  int index(int l, int k) const { return l * num_ues + k; }
};

// One small-scale fading draw: channel blocks for every (RU, UE) pair,
// stacked as an (L*M) x K matrix.
struct ChannelRealization {
  int antennas = 0;
  Eigen::MatrixXcd h;

  auto block(int l, int k) { return h.col(k).segment(l * antennas, antennas); }
  auto block(int l, int k) const { return h.col(k).segment(l * antennas, antennas); }
};

// Distance-dependent LOS probability (TR 38.901, UMi).
double los_probability(double d2d_m);

// Deterministic UMi street canyon pathloss; shadowing is added separately.
// Distances below 1 m are clamped to 1 m.
double pathloss_db(double d2d_m, bool los, const LsfcModel& model);

// DFT grid indices whose angle falls inside the spread around `theta`.
// Never empty: the nearest index is used when the spread covers no grid point.
std::vector<int> angular_support(double theta, double delta, int antennas);

// Column m of the M-point unitary DFT matrix.
Eigen::VectorXcd dft_column(int antennas, int m);

ChannelStats sample_lsfc(const NetworkTopology& topo, const LsfcModel& model,
                         int antennas, double angular_spread, std::uint64_t seed);

ChannelRealization sample_channel(const ChannelStats& stats, Rng& rng);

// Mean LSFC at 2.5x the per-RU coverage radius, with zero shadowing.
double expected_lsfc_at_reference(double area_m2, int num_rus, const LsfcModel& model,
                                  BetaBarMode mode = BetaBarMode::LosWeighted);

// System SNR such that the mean received energy per symbol at the reference
// distance, with full array gain, is one.
double calibrate_snr(double area_m2, int num_rus, int antennas, const LsfcModel& model,
                     BetaBarMode mode = BetaBarMode::LosWeighted);

}  // namespace cfmimo
