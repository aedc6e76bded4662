#include "cfmimo/dl_phy.hpp"

#include <cmath>

namespace cfmimo {

Precoders build_precoders(const LocalCombiners& comb, const ChannelEstimates& est,
                          const Association& nominal, const Association& effective,
                          double snr) {
  const int M = static_cast<int>(comb.v.rows());
  const int K = effective.num_ues;

  // Combining weights at zero distortion drive the reciprocity precoder.
  const QuantProfile ideal = zero_distortion_profile(nominal.num_links());
  const ClusterCombining cc = cluster_combining(est, comb, ideal, nominal, effective, snr);

  Precoders out;
  out.u.setZero(M, effective.num_links());
  out.power.assign(K, 0.0);

  for (int k = 0; k < K; ++k) {
    const auto& cluster = effective.clusters[k];
    if (cluster.empty() || cc.weights[k].size() == 0) continue;
    double norm2 = 0.0;
    for (int r = 0; r < static_cast<int>(cluster.size()); ++r) {
      const int l = cluster[r];
      const auto v = comb.v.col(nominal.link_index(l, k));
      norm2 += std::norm(cc.weights[k][r]) * v.squaredNorm();
    }
    if (norm2 <= 0.0) continue;  // all-zero stack, UE skipped
    const double inv = 1.0 / std::sqrt(norm2);
    for (int r = 0; r < static_cast<int>(cluster.size()); ++r) {
      const int l = cluster[r];
      out.u.col(effective.link_index(l, k)) =
          (cc.weights[k][r] * inv) * comb.v.col(nominal.link_index(l, k));
    }
    out.power[k] = 1.0;
  }
  return out;
}

std::vector<double> dl_sinr(const ChannelRealization& h, const Precoders& pre,
                            const Association& effective, double snr) {
  const int K = effective.num_ues;
  std::vector<double> sinr(K, 0.0);

  // cross(k, j) = h_k^H u_j over the blocks of UE j's cluster.
  Eigen::MatrixXcd cross = Eigen::MatrixXcd::Zero(K, K);
  for (int j = 0; j < K; ++j) {
    if (pre.power[j] <= 0.0) continue;
    for (int l : effective.clusters[j]) {
      const auto u = pre.u.col(effective.link_index(l, j));
      for (int k = 0; k < K; ++k) cross(k, j) += h.block(l, k).dot(u);
    }
  }

  for (int k = 0; k < K; ++k) {
    if (pre.power[k] <= 0.0) continue;
    double interf = 0.0;
    for (int j = 0; j < K; ++j)
      if (j != k && pre.power[j] > 0.0) interf += std::norm(cross(k, j)) * pre.power[j];
    const double num = std::norm(cross(k, k)) * pre.power[k];
    sinr[k] = num / (1.0 / snr + interf);
  }
  return sinr;
}

}  // namespace cfmimo
