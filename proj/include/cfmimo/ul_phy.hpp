#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cfmimo/channel.hpp"
#include "cfmimo/cluster.hpp"
#include "cfmimo/quantization.hpp"

namespace cfmimo {

// Per-link channel estimates; column i holds the estimate for
// assoc.link_list[i]. Estimates live in the link's DFT subspace.
struct ChannelEstimates {
  Eigen::MatrixXcd h_hat;  // antennas x num_links
};

// Local receive vectors, one column per association link, and the per-RU
// noise plus out-of-cluster interference variance.
struct LocalCombiners {
  Eigen::MatrixXcd v;      // antennas x num_links
  std::vector<double> nu;  // per RU, >= 1
};

// Subspace-projected pilot estimation. Every UE sharing a pilot leaks into
// the projection along with fresh projected noise per (RU, pilot).
ChannelEstimates estimate_channels(const ChannelRealization& h, const PilotAssignment& pilots,
                                   const Association& assoc, const ChannelStats& stats,
                                   double snr, int tau_p, Rng& rng);

std::vector<double> noise_plus_oci_variance(const Association& assoc, const ChannelStats& stats,
                                            double snr);

// Plug-in LMMSE receive vectors; one Hermitian factorization per RU shared by
// its served UEs.
LocalCombiners lmmse_vectors(const ChannelEstimates& est, const std::vector<double>& nu,
                             const Association& assoc, double snr);

// Monte Carlo mean power of the local observations, symbols and noise
// marginalized analytically. One value per association link.
std::vector<double> observation_variance(const Association& assoc, const ChannelStats& stats,
                                         const PilotAssignment& pilots, double snr, int tau_p,
                                         int n_mc, std::uint64_t seed);

// Cluster-level combining for one channel realization. Rows follow the
// effective cluster of each UE; interference columns cover the UEs known to
// the cluster processor.
struct ClusterCombining {
  std::vector<Eigen::VectorXcd> weights;  // per UE, |effective cluster| entries
  std::vector<double> nominal_sinr;       // attained by the optimal weights
};

ClusterCombining cluster_combining(const ChannelEstimates& est, const LocalCombiners& comb,
                                   const QuantProfile& quant, const Association& nominal,
                                   const Association& effective, double snr);

// SINR conditioned on the true channels, interference summed over every
// transmitting UE. Weight scaling cancels; all-zero weights give zero.
std::vector<double> actual_sinr_ul(const ChannelRealization& h, const ChannelEstimates& est,
                                   const LocalCombiners& comb, const ClusterCombining& cc,
                                   const QuantProfile& quant, const Association& nominal,
                                   const Association& effective, double snr);

// Mean of log2(1 + sinr) over realizations.
double optimistic_rate(const std::vector<double>& sinr_samples);

}  // namespace cfmimo
