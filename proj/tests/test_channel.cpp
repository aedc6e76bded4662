#include <doctest.h>

#include <cmath>

#include "cfmimo/channel.hpp"

using namespace cfmimo;

namespace {

NetworkTopology two_node_topology(double d) {
  NetworkTopology topo;
  topo.area_side = 400.0;
  topo.ru_positions = {{50.0, 50.0}};
  topo.ue_positions = {{50.0 + d, 50.0}};
  topo.num_routers = 1;
  topo.num_dus = 1;
  topo.router_positions = {{200, 200}};
  topo.du_positions = {{200, 200}};
  topo.ru_router_edges = {{0, 0}};
  topo.router_du_edges = {{0, 0}};
  return topo;
}

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("los probability follows the distance law") {
  CHECK(los_probability(10.0) == 1.0);
  CHECK(los_probability(18.0) == 1.0);
  CHECK(los_probability(36.0) == doctest::Approx(0.5 + std::exp(-1.0) * 0.5).epsilon(1e-9));
  // continuity at the knee and monotone decay beyond it
  CHECK(los_probability(18.0 + 1e-9) == doctest::Approx(1.0).epsilon(1e-6));
  double prev = 1.0;
  for (double d = 19.0; d < 500.0; d += 7.0) {
    const double p = los_probability(d);
    CHECK(p <= prev + 1e-12);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("street canyon pathloss matches hand evaluation") {
  const LsfcModel model;  // 3.5 GHz, 10 m / 1.5 m
  const double d3d = std::hypot(25.0, 8.5);
  const double pl_los = 32.4 + 21.0 * std::log10(d3d) + 20.0 * std::log10(3.5);
  const double pl_nlos = 35.3 * std::log10(d3d) + 22.4 + 21.3 * std::log10(3.5);
  CHECK(pathloss_db(25.0, true, model) == doctest::Approx(pl_los).epsilon(1e-12));
  CHECK(pathloss_db(25.0, true, model) == doctest::Approx(73.137).epsilon(1e-4));
  CHECK(pathloss_db(25.0, false, model) == doctest::Approx(std::max(pl_los, pl_nlos)).epsilon(1e-12));
  CHECK(pathloss_db(25.0, false, model) == doctest::Approx(84.174).epsilon(1e-4));
}

TEST_CASE("nlos never beats los and distance clamps at one meter") {
  const LsfcModel model;
  for (double d = 0.5; d < 800.0; d *= 1.7)
    CHECK(pathloss_db(d, false, model) >= pathloss_db(d, true, model) - 1e-12);
  CHECK(pathloss_db(0.2, true, model) == pathloss_db(1.0, true, model));
  double prev = 0.0;
  for (double d = 1.0; d < 2000.0; d *= 1.3) {
    const double pl = pathloss_db(d, true, model);
    CHECK(pl >= prev - 1e-12);
    prev = pl;
  }
}

TEST_CASE("zero shadowing with forced los reproduces the pathloss exactly") {
  LsfcModel model;
  model.shadow_std_los_db = 0.0;
  model.shadow_std_nlos_db = 0.0;
  const double d = 10.0;  // p_los = 1, so the los draw is forced
  const NetworkTopology topo = two_node_topology(d);
  const ChannelStats stats = sample_lsfc(topo, model, 4, M_PI / 4, 5);
  CHECK(stats.lsfc(0, 0) ==
        doctest::Approx(std::pow(10.0, -pathloss_db(d, true, model) / 10.0)).epsilon(1e-12));
  CHECK(stats.los[0] == 1);
}

TEST_CASE("same seed gives identical statistics") {
  const LsfcModel model;
  const NetworkTopology topo = two_node_topology(60.0);
  const ChannelStats a = sample_lsfc(topo, model, 8, M_PI / 8, 17);
  const ChannelStats b = sample_lsfc(topo, model, 8, M_PI / 8, 17);
  CHECK(a.lsfc(0, 0) == b.lsfc(0, 0));
  CHECK(a.los == b.los);
  CHECK(a.angle(0, 0) == b.angle(0, 0));
}

TEST_CASE("shadowing mean recovers the pathloss") {
  LsfcModel model;
  const double d = 10.0;  // forced los keeps the state fixed across draws
  const int n = 10000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const NetworkTopology topo = two_node_topology(d);
    const ChannelStats s = sample_lsfc(topo, model, 2, M_PI / 4, 1000 + i);
    acc += 10.0 * std::log10(s.lsfc(0, 0));
  }
  const double mean = acc / n;
  const double expect = -pathloss_db(d, true, model);
  // 3 sigma band for the sample mean
  CHECK(std::fabs(mean - expect) <= 3.0 * model.shadow_std_los_db / std::sqrt(double(n)));
}

TEST_CASE("angular support picks the grid points inside the spread") {
  CHECK(angular_support(0.0, M_PI / 8, 10) == std::vector<int>{0});
  CHECK(angular_support(M_PI, M_PI / 8, 10) == std::vector<int>{5});
  CHECK(angular_support(0.1, 2 * M_PI, 10) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  // empty window falls back to the nearest grid point (0.33 is closer to
  // 2*pi/10 = 0.628 than to 0? no: 0.33 vs 0.298 away, so index 1 wins)
  const auto s = angular_support(0.33, 0.01, 10);
  REQUIRE(s.size() == 1);
  CHECK(s[0] == 1);
}

TEST_CASE("channel draws live in the support subspace with the right power") {
  LsfcModel model;
  model.shadow_std_los_db = 0.0;
  model.shadow_std_nlos_db = 0.0;
  const int M = 10;
  const NetworkTopology topo = two_node_topology(40.0);
  ChannelStats stats = sample_lsfc(topo, model, M, M_PI / 3, 2);
  const auto& sup = stats.support[0];
  REQUIRE(!sup.empty());

  // projector onto the complement of the support
  Eigen::MatrixXcd basis(M, sup.size());
  for (size_t i = 0; i < sup.size(); ++i) basis.col(i) = dft_column(M, sup[i]);

  Rng rng(77);
  double power = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const ChannelRealization h = sample_channel(stats, rng);
    const Eigen::VectorXcd blk = h.block(0, 0);
    const Eigen::VectorXcd resid = blk - basis * (basis.adjoint() * blk);
    CHECK(resid.norm() < 1e-10);
    power += blk.squaredNorm();
  }
  power /= n;
  CHECK(power == doctest::Approx(M * stats.lsfc(0, 0)).epsilon(0.05));
}

TEST_CASE("sample covariance matches the subspace model") {
  LsfcModel model;
  model.shadow_std_los_db = 0.0;
  model.shadow_std_nlos_db = 0.0;
  const int M = 4;
  const NetworkTopology topo = two_node_topology(30.0);
  ChannelStats stats = sample_lsfc(topo, model, M, 2.5, 3);  // wide spread, |S| = 2
  const auto& sup = stats.support[0];
  REQUIRE(sup.size() >= 2);

  Eigen::MatrixXcd f(M, sup.size());
  for (size_t i = 0; i < sup.size(); ++i) f.col(i) = dft_column(M, sup[i]);
  const Eigen::MatrixXcd expect =
      (stats.lsfc(0, 0) * M / double(sup.size())) * f * f.adjoint();

  Rng rng(123);
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(M, M);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const ChannelRealization h = sample_channel(stats, rng);
    const Eigen::VectorXcd blk = h.block(0, 0);
    cov += blk * blk.adjoint();
  }
  cov /= n;
  const double scale = expect.norm();
  CHECK((cov - expect).norm() / scale < 0.03);
}

TEST_CASE("identical supports share the covariance column space") {
  LsfcModel model;
  const int M = 8;
  NetworkTopology topo = two_node_topology(25.0);
  topo.ue_positions.push_back(topo.ue_positions[0]);  // co-located UE
  const ChannelStats stats = sample_lsfc(topo, model, M, M_PI / 8, 9);
  CHECK(stats.support[stats.index(0, 0)] == stats.support[stats.index(0, 1)]);
}

TEST_CASE("snr calibration follows the coverage radius") {
  const LsfcModel model;
  const double area = 200.0 * 200.0;
  CHECK(std::sqrt(area / (M_PI * 20)) == doctest::Approx(25.2313).epsilon(1e-4));

  const double beta_bar = expected_lsfc_at_reference(area, 20, model);
  const int M = 10;
  CHECK(calibrate_snr(area, 20, M, model) == doctest::Approx(1.0 / (beta_bar * M)).epsilon(1e-12));
  // doubled mean gain halves the snr; tenfold antennas divide it by ten
  CHECK(calibrate_snr(area, 20, 1, model) == doctest::Approx(10.0 * calibrate_snr(area, 20, 10, model)).epsilon(1e-12));
}

}  // TEST_SUITE
