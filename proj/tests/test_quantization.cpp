#include <doctest.h>

#include <complex>
#include <vector>

#include "cfmimo/quantization.hpp"
#include "cfmimo/rng.hpp"

using namespace cfmimo;

TEST_SUITE("quantization") {

TEST_CASE("rate is the log ratio clamped at zero") {
  CHECK(quant_rate(1.0, 0.25) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(quant_rate(2.0, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(quant_rate(0.5, 0.5) == 0.0);
  CHECK(quant_rate(0.1, 0.5) == 0.0);
  CHECK_THROWS_AS(quant_rate(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("rate is monotone in both arguments") {
  double prev = quant_rate(1.0, 1e-4);
  for (double d = 2e-4; d < 4.0; d *= 1.5) {
    const double r = quant_rate(1.0, d);
    CHECK(r <= prev + 1e-14);
    prev = r;
  }
  prev = 0.0;
  for (double s = 0.01; s < 100.0; s *= 1.4) {
    const double r = quant_rate(s, 0.25);
    CHECK(r >= prev - 1e-14);
    prev = r;
  }
}

TEST_CASE("scaling and residual variance match the closed forms") {
  auto [gain, err] = bussgang_params(1.0, 0.25);
  CHECK(gain == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(err == doctest::Approx(0.1875).epsilon(1e-14));

  auto low = bussgang_params(1.0, 1e-9);
  CHECK(low.gain == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(low.err_var == doctest::Approx(0.0).epsilon(1e-8));

  auto edge = bussgang_params(0.5, 0.5);
  CHECK(edge.gain == 0.0);
  CHECK(edge.err_var == 0.0);
}

TEST_CASE("identity (1-gain)^2 sigma2 + err_var = distortion") {
  for (double s : {0.3, 0.5, 1.0, 2.0, 7.0}) {
    for (double d : {0.01, 0.1, 0.25, 1.0}) {
      if (s <= d) continue;
      const auto [gain, err] = bussgang_params(s, d);
      CHECK((1.0 - gain) * (1.0 - gain) * s + err == doctest::Approx(d).epsilon(1e-12));
      CHECK(gain >= 0.0);
      CHECK(gain < 1.0);
    }
  }
}

TEST_CASE("scaled representation reproduces the distortion in simulation") {
  Rng rng(8);
  const double sigma2 = 2.0, d = 0.5;
  const auto [gain, err] = bussgang_params(sigma2, d);
  const int n = 100000;
  double mse = 0.0;
  std::complex<double> corr = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::complex<double> r = std::sqrt(sigma2) * rng.cnormal();
    const std::complex<double> e = std::sqrt(err) * rng.cnormal();
    const std::complex<double> rq = gain * r + e;
    mse += std::norm(r - rq);
    corr += e * std::conj(r);
  }
  mse /= n;
  CHECK(mse == doctest::Approx(d).epsilon(0.02));
  CHECK(std::abs(corr / double(n)) / std::sqrt(sigma2 * err) < 0.02);
}

TEST_CASE("pruning drops exactly the zero rate links") {
  // two UEs, three RUs, association by hand
  Association assoc = Association::from_clusters(3, 2, {{0, 1}, {1, 2}});
  SUBCASE("distortion below every variance keeps the association") {
    const QuantProfile prof = make_quant_profile({1.0, 2.0, 0.5, 3.0}, 0.4);
    const Association eff = prune_clusters(assoc, prof);
    CHECK(eff.clusters == assoc.clusters);
    CHECK(prof.num_pruned() == 0);
  }
  SUBCASE("distortion above every variance empties all clusters") {
    const QuantProfile prof = make_quant_profile({1.0, 2.0, 0.5, 3.0}, 3.0);
    const Association eff = prune_clusters(assoc, prof);
    CHECK(eff.num_links() == 0);
    CHECK(!eff.is_served(0));
    CHECK(!eff.is_served(1));
  }
  SUBCASE("mixed case removes the weak links only") {
    const QuantProfile prof = make_quant_profile({1.0, 2.0, 0.5, 3.0}, 0.75);
    const Association eff = prune_clusters(assoc, prof);
    // direct filter: link order is (0,ru0),(0,ru1),(1,ru1),(1,ru2)
    CHECK(eff.clusters[0] == std::vector<int>{0, 1});
    CHECK(eff.clusters[1] == std::vector<int>{2});
    // idempotent under the restricted profile
    std::vector<double> kept;
    for (int i = 0; i < assoc.num_links(); ++i)
      if (!prof.pruned[i]) kept.push_back(prof.sigma2[i]);
    const Association eff2 = prune_clusters(eff, make_quant_profile(kept, 0.75));
    CHECK(eff2.clusters == eff.clusters);
  }
}

TEST_CASE("dithered quantizer hits the target distortion") {
  Rng src(3);
  std::vector<std::complex<double>> xs(200000);
  for (auto& x : xs) x = src.cnormal();  // unit variance
  for (double d : {0.25, 0.0625, 1.0 / 64}) {
    Rng dither(4);
    const DitherResult res = dithered_scalar_quantize(xs, d, dither);
    CHECK(res.empirical_mse == doctest::Approx(d).epsilon(0.05));
    CHECK(res.empirical_rate_bits <= quant_rate(1.0, d) + 1.6);
    CHECK(res.reconstruction.size() == xs.size());
  }
}

TEST_CASE("strong distortion short circuits to the zero representation") {
  Rng src(6);
  std::vector<std::complex<double>> xs(5000);
  for (auto& x : xs) x = 0.3 * src.cnormal();
  double power = 0.0;
  for (auto& x : xs) power += std::norm(x);
  power /= xs.size();
  Rng dither(7);
  const DitherResult res = dithered_scalar_quantize(xs, 1.0, dither);
  CHECK(res.empirical_rate_bits == 0.0);
  CHECK(res.empirical_mse == doctest::Approx(power).epsilon(1e-12));
  for (const auto& r : res.reconstruction) CHECK(std::abs(r) == 0.0);
}

TEST_CASE("dither stream is reproducible and independent of the source") {
  Rng src(10);
  std::vector<std::complex<double>> xs(2000);
  for (auto& x : xs) x = src.cnormal();
  Rng d1(11), d2(11);
  const DitherResult a = dithered_scalar_quantize(xs, 0.1, d1);
  const DitherResult b = dithered_scalar_quantize(xs, 0.1, d2);
  CHECK(a.empirical_mse == b.empirical_mse);
  CHECK(a.empirical_rate_bits == b.empirical_rate_bits);
}

}  // TEST_SUITE
