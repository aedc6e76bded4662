#include "cfmimo/quantization.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace cfmimo {

double quant_rate(double sigma2, double d) {
  if (d <= 0.0) throw std::invalid_argument("quant_rate: distortion must be positive");
  if (sigma2 < 0.0) throw std::invalid_argument("quant_rate: negative variance");
  if (sigma2 <= d) return 0.0;
  return std::log2(sigma2 / d);
}

BussgangParams bussgang_params(double sigma2, double d) {
  if (sigma2 <= d) return {0.0, 0.0};
  BussgangParams p;
  p.gain = (sigma2 - d) / sigma2;
  p.err_var = (1.0 - d / sigma2) * d;
  return p;
}

int QuantProfile::num_pruned() const {
  int n = 0;
  for (auto f : pruned) n += f;
  return n;
}

QuantProfile make_quant_profile(const std::vector<double>& sigma2_per_link, double d) {
  QuantProfile prof;
  prof.distortion = d;
  prof.sigma2 = sigma2_per_link;
  const int n = static_cast<int>(sigma2_per_link.size());
  prof.rate_bits.resize(n);
  prof.gain.resize(n);
  prof.err_var.resize(n);
  prof.pruned.resize(n);
  for (int i = 0; i < n; ++i) {
    prof.rate_bits[i] = quant_rate(sigma2_per_link[i], d);
    const auto bp = bussgang_params(sigma2_per_link[i], d);
    prof.gain[i] = bp.gain;
    prof.err_var[i] = bp.err_var;
    prof.pruned[i] = prof.rate_bits[i] == 0.0 ? 1 : 0;
  }
  return prof;
}

QuantProfile zero_distortion_profile(int num_links) {
  QuantProfile prof;
  prof.distortion = 0.0;
  prof.sigma2.assign(num_links, 1.0);
  prof.rate_bits.assign(num_links, 1.0);
  prof.gain.assign(num_links, 1.0);
  prof.err_var.assign(num_links, 0.0);
  prof.pruned.assign(num_links, 0);
  return prof;
}

Association prune_clusters(const Association& assoc, const QuantProfile& profile) {
  if (profile.num_links() != assoc.num_links())
    throw std::invalid_argument("prune_clusters: profile does not cover the association");
  std::vector<std::vector<int>> clusters(assoc.num_ues);
  for (int k = 0; k < assoc.num_ues; ++k) {
    for (int l : assoc.clusters[k]) {
      const int idx = assoc.link_index(l, k);
      if (!profile.pruned[idx]) clusters[k].push_back(l);
    }
  }
  return Association::from_clusters(assoc.num_rus, assoc.num_ues, std::move(clusters));
}

DitherResult dithered_scalar_quantize(std::span<const std::complex<double>> samples,
                                      double d, Rng& rng) {
  if (samples.empty()) throw std::invalid_argument("dithered_scalar_quantize: empty input");
  if (d <= 0.0) throw std::invalid_argument("dithered_scalar_quantize: distortion must be positive");

  const size_t n = samples.size();
  double power = 0.0;
  for (const auto& s : samples) power += std::norm(s);
  power /= static_cast<double>(n);

  DitherResult out;
  if (power <= d) {
    out.reconstruction.assign(n, {0.0, 0.0});
    out.empirical_rate_bits = 0.0;
    out.empirical_mse = power;
    return out;
  }

  // Subtractive dither makes the per-dimension error uniform on one step,
  // so MSE per real dimension is step^2/12 and step^2/6 per complex sample.
  const double step = std::sqrt(6.0 * d);
  out.reconstruction.resize(n);
  std::map<long long, long long> hist_re, hist_im;
  double mse = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double ur = rng.uniform(-step / 2.0, step / 2.0);
    const double ui = rng.uniform(-step / 2.0, step / 2.0);
    const long long qr = std::llround((samples[i].real() + ur) / step);
    const long long qi = std::llround((samples[i].imag() + ui) / step);
    ++hist_re[qr];
    ++hist_im[qi];
    const std::complex<double> rec(qr * step - ur, qi * step - ui);
    out.reconstruction[i] = rec;
    mse += std::norm(samples[i] - rec);
  }
  out.empirical_mse = mse / static_cast<double>(n);

  auto entropy_bits = [n](const std::map<long long, long long>& hist) {
    double h = 0.0;
    for (const auto& [idx, count] : hist) {
      const double p = static_cast<double>(count) / static_cast<double>(n);
      h -= p * std::log2(p);
    }
    return h;
  };
  out.empirical_rate_bits = entropy_bits(hist_re) + entropy_bits(hist_im);
  return out;
}

}  // namespace cfmimo
