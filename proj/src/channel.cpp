#include "cfmimo/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace cfmimo {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
}

double los_probability(double d2d_m) {
  if (d2d_m < 0.0) throw std::invalid_argument("los_probability: negative distance");
  if (d2d_m <= 18.0) return 1.0;
  const double r = 18.0 / d2d_m;
  return r + std::exp(-d2d_m / 36.0) * (1.0 - r);
}

double pathloss_db(double d2d_m, bool los, const LsfcModel& model) {
  const double d2d = std::max(d2d_m, 1.0);
  const double dh = model.h_bs_m - model.h_ut_m;
  const double d3d = std::hypot(d2d, dh);
  const double fc = model.carrier_freq_ghz;

  // Breakpoint distance with 1 m effective environment height.
  const double hb = model.h_bs_m - 1.0;
  const double hu = model.h_ut_m - 1.0;
  const double d_bp = 4.0 * hb * hu * (fc * 1e9) / kSpeedOfLight;

  double pl_los;
  if (d2d <= d_bp) {
    pl_los = 32.4 + 21.0 * std::log10(d3d) + 20.0 * std::log10(fc);
  } else {
    pl_los = 32.4 + 40.0 * std::log10(d3d) + 20.0 * std::log10(fc) -
             9.5 * std::log10(d_bp * d_bp + dh * dh);
  }
  if (los) return pl_los;

  const double pl_nlos = 35.3 * std::log10(d3d) + 22.4 + 21.3 * std::log10(fc) -
                         0.3 * (model.h_ut_m - 1.5);
  return std::max(pl_los, pl_nlos);
}

std::vector<int> angular_support(double theta, double delta, int antennas) {
  if (antennas < 1) throw std::invalid_argument("angular_support: antennas must be >= 1");
  if (delta <= 0.0 || delta > 2.0 * M_PI)
    throw std::invalid_argument("angular_support: delta must be in (0, 2*pi]");

  auto circ_dist = [](double a, double b) {
    double d = std::fmod(std::fabs(a - b), 2.0 * M_PI);
    return std::min(d, 2.0 * M_PI - d);
  };

  std::vector<int> out;
  double best = 1e300;
  int best_m = 0;
  for (int m = 0; m < antennas; ++m) {
    const double g = 2.0 * M_PI * m / antennas;
    const double d = circ_dist(g, theta);
    if (d <= delta / 2.0 + 1e-12) out.push_back(m);
    if (d < best) {
      best = d;
      best_m = m;
    }
  }
  if (out.empty()) out.push_back(best_m);
  return out;
}

Eigen::VectorXcd dft_column(int antennas, int m) {
  Eigen::VectorXcd col(antennas);
  const double scale = 1.0 / std::sqrt(static_cast<double>(antennas));
  for (int a = 0; a < antennas; ++a) {
    const double phase = -2.0 * M_PI * a * m / antennas;
    col(a) = std::polar(scale, phase);
  }
  return col;
}

ChannelStats sample_lsfc(const NetworkTopology& topo, const LsfcModel& model,
                         int antennas, double angular_spread, std::uint64_t seed) {
  const int L = topo.num_rus();
  const int K = topo.num_ues();
  ChannelStats stats;
  stats.num_rus = L;
  stats.num_ues = K;
  stats.antennas = antennas;
  stats.lsfc.resize(L, K);
  stats.angle.resize(L, K);
  stats.los.assign(static_cast<size_t>(L) * K, 0);
  stats.support.resize(static_cast<size_t>(L) * K);

  const double side = topo.area_side;
  for (int l = 0; l < L; ++l) {
    for (int k = 0; k < K; ++k) {
      Rng rng = Rng::substream(seed, {0x6c736663ULL, static_cast<std::uint64_t>(l),
                                      static_cast<std::uint64_t>(k)});
      const Position& ru = topo.ru_positions[l];
      const Position& ue = topo.ue_positions[k];
      const double d = torus_distance(ru, ue, side);

      const bool los = rng.uniform() < los_probability(d);
      const double shadow_std = los ? model.shadow_std_los_db : model.shadow_std_nlos_db;
      const double pl = pathloss_db(d, los, model);
      const double beta_db = -pl + shadow_std * rng.normal();
      stats.lsfc(l, k) = std::pow(10.0, beta_db / 10.0);
      stats.los[stats.index(l, k)] = los ? 1 : 0;

      // Direction along the torus-shortest displacement, boresight at 0 rad.
      double dx = ue.x - ru.x;
      double dy = ue.y - ru.y;
      if (dx > side / 2.0) dx -= side;
      if (dx < -side / 2.0) dx += side;
      if (dy > side / 2.0) dy -= side;
      if (dy < -side / 2.0) dy += side;
      double theta = std::atan2(dy, dx);
      if (theta < 0.0) theta += 2.0 * M_PI;
      stats.angle(l, k) = theta;
      stats.support[stats.index(l, k)] = angular_support(theta, angular_spread, antennas);
    }
  }
  return stats;
}

ChannelRealization sample_channel(const ChannelStats& stats, Rng& rng) {
  const int L = stats.num_rus;
  const int K = stats.num_ues;
  const int M = stats.antennas;
  ChannelRealization out;
  out.antennas = M;
  out.h.setZero(static_cast<Eigen::Index>(L) * M, K);

  for (int l = 0; l < L; ++l) {
    for (int k = 0; k < K; ++k) {
      const auto& sup = stats.support[stats.index(l, k)];
      const double gain = std::sqrt(stats.lsfc(l, k) * M / static_cast<double>(sup.size()));
      auto blk = out.h.col(k).segment(static_cast<Eigen::Index>(l) * M, M);
      for (int m : sup) blk += (gain * rng.cnormal()) * dft_column(M, m);
    }
  }
  return out;
}

double expected_lsfc_at_reference(double area_m2, int num_rus, const LsfcModel& model,
                                  BetaBarMode mode) {
  const double d_cov = std::sqrt(area_m2 / (M_PI * num_rus));
  const double d_ref = 2.5 * d_cov;
  const double beta_los = std::pow(10.0, -pathloss_db(d_ref, true, model) / 10.0);
  const double beta_nlos = std::pow(10.0, -pathloss_db(d_ref, false, model) / 10.0);
  switch (mode) {
    case BetaBarMode::LosOnly:
      return beta_los;
    case BetaBarMode::NlosOnly:
      return beta_nlos;
    case BetaBarMode::LosWeighted:
    default: {
      const double p = los_probability(d_ref);
      return p * beta_los + (1.0 - p) * beta_nlos;
    }
  }
}

double calibrate_snr(double area_m2, int num_rus, int antennas, const LsfcModel& model,
                     BetaBarMode mode) {
  const double beta_bar = expected_lsfc_at_reference(area_m2, num_rus, model, mode);
  return 1.0 / (beta_bar * antennas);
}

}  // namespace cfmimo
