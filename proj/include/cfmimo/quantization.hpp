#pragma once

#include <complex>
#include <span>
#include <vector>

#include "cfmimo/cluster.hpp"
#include "cfmimo/rng.hpp"

namespace cfmimo {

// Bits per complex sample to reach mean-square distortion `d` on a source of
// variance `sigma2`; zero when the source is weaker than the distortion.
double quant_rate(double sigma2, double d);

struct BussgangParams {
  double gain = 0.0;     // scaling of the input in the quantized output
  double err_var = 0.0;  // variance of the uncorrelated residual
};

BussgangParams bussgang_params(double sigma2, double d);

// Per-link quantization profile for one shared distortion level. Entries are
// aligned with Association::link_list of the association the profile was
// built from.
struct QuantProfile {
  double distortion = 0.0;
  std::vector<double> sigma2;
  std::vector<double> rate_bits;
  std::vector<double> gain;
  std::vector<double> err_var;
  std::vector<std::uint8_t> pruned;  // rate == 0

  int num_links() const { return static_cast<int>(sigma2.size()); }
  int num_pruned() const;
};

QuantProfile make_quant_profile(const std::vector<double>& sigma2_per_link, double d);

// Zero-distortion profile: unit gain, no residual, nothing pruned.
QuantProfile zero_distortion_profile(int num_links);

// Drops every zero-rate link from the association.
Association prune_clusters(const Association& assoc, const QuantProfile& profile);

struct DitherResult {
  std::vector<std::complex<double>> reconstruction;
  double empirical_rate_bits = 0.0;  // plug-in index entropy per complex sample
  double empirical_mse = 0.0;
};

// Entropy-coded dithered uniform scalar quantizer applied per real dimension.
// The step is chosen so the complex-sample MSE equals `d` exactly; sources
// weaker than `d` are represented by the all-zero reconstruction at zero rate.
DitherResult dithered_scalar_quantize(std::span<const std::complex<double>> samples,
                                      double d, Rng& rng);

}  // namespace cfmimo
