#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cfmimo/ul_phy.hpp"

namespace cfmimo {

// Per-link precoding blocks, aligned with the effective association links.
// The stacked precoder of each served UE has unit norm; power is uniform
// over served UEs.
struct Precoders {
  Eigen::MatrixXcd u;         // antennas x num effective links
  std::vector<double> power;  // per UE: 1 when served, 0 otherwise
};

// Reciprocity-based precoders: local combiners scaled by the zero-distortion
// cluster combining weights, stacked and normalized per UE.
Precoders build_precoders(const LocalCombiners& comb, const ChannelEstimates& est,
                          const Association& nominal, const Association& effective,
                          double snr);

std::vector<double> dl_sinr(const ChannelRealization& h, const Precoders& pre,
                            const Association& effective, double snr);

}  // namespace cfmimo
