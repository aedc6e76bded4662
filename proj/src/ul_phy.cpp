#include "cfmimo/ul_phy.hpp"

#include <cmath>
#include <stdexcept>

namespace cfmimo {

ChannelEstimates estimate_channels(const ChannelRealization& h, const PilotAssignment& pilots,
                                   const Association& assoc, const ChannelStats& stats,
                                   double snr, int tau_p, Rng& rng) {
  if (tau_p < 1) throw std::invalid_argument("estimate_channels: tau_p must be >= 1");
  const int M = stats.antennas;
  const int K = stats.num_ues;
  const int L = stats.num_rus;
  const double noise_std = std::sqrt(1.0 / (tau_p * snr));

  ChannelEstimates out;
  out.h_hat.setZero(M, assoc.num_links());

  // Pilots actually transmitted, in ascending order for reproducible draws.
  std::vector<int> pilots_in_use;
  for (int t = 0; t < pilots.num_pilots; ++t) {
    bool used = false;
    for (int k = 0; k < K && !used; ++k) used = pilots.pilot[k] == t;
    if (used) pilots_in_use.push_back(t);
  }

  Eigen::VectorXcd projected(M);
  for (int l = 0; l < L; ++l) {
    for (int t : pilots_in_use) {
      // Projection of the received pilot field onto pilot t: superposition of
      // the co-pilot channels plus scaled noise, shared by all UEs on t.
      Eigen::VectorXcd y = Eigen::VectorXcd::Zero(M);
      for (int k = 0; k < K; ++k)
        if (pilots.pilot[k] == t) y += h.block(l, k);
      for (int a = 0; a < M; ++a) y[a] += noise_std * rng.cnormal();

      for (int k : assoc.served[l]) {
        if (pilots.pilot[k] != t) continue;
        const auto& sup = stats.support[stats.index(l, k)];
        projected.setZero();
        for (int m : sup) {
          const Eigen::VectorXcd f = dft_column(M, m);
          projected += f * (f.adjoint() * y)(0);
        }
        out.h_hat.col(assoc.link_index(l, k)) = projected;
      }
    }
  }
  return out;
}

std::vector<double> noise_plus_oci_variance(const Association& assoc, const ChannelStats& stats,
                                            double snr) {
  std::vector<double> nu(assoc.num_rus, 1.0);
  for (int l = 0; l < assoc.num_rus; ++l) {
    double oci = 0.0;
    for (int k = 0; k < assoc.num_ues; ++k)
      if (!assoc.contains(l, k)) oci += stats.lsfc(l, k);
    nu[l] = 1.0 + snr * oci;
  }
  return nu;
}

LocalCombiners lmmse_vectors(const ChannelEstimates& est, const std::vector<double>& nu,
                             const Association& assoc, double snr) {
  const int M = static_cast<int>(est.h_hat.rows());
  LocalCombiners out;
  out.nu = nu;
  out.v.setZero(M, assoc.num_links());

  for (int l = 0; l < assoc.num_rus; ++l) {
    if (assoc.served[l].empty()) continue;
    Eigen::MatrixXcd gram = nu[l] * Eigen::MatrixXcd::Identity(M, M);
    for (int k : assoc.served[l]) {
      const auto hh = est.h_hat.col(assoc.link_index(l, k));
      gram.noalias() += snr * hh * hh.adjoint();
    }
    const Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    for (int k : assoc.served[l]) {
      const int idx = assoc.link_index(l, k);
      out.v.col(idx) = llt.solve(est.h_hat.col(idx));
    }
  }
  return out;
}

std::vector<double> observation_variance(const Association& assoc, const ChannelStats& stats,
                                         const PilotAssignment& pilots, double snr, int tau_p,
                                         int n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw std::invalid_argument("observation_variance: n_mc must be >= 1");
  std::vector<double> acc(assoc.num_links(), 0.0);
  const std::vector<double> nu_unit = noise_plus_oci_variance(assoc, stats, snr);

  for (int rep = 0; rep < n_mc; ++rep) {
    Rng rng = Rng::substream(seed, {0x7369676dULL, static_cast<std::uint64_t>(rep)});
    const ChannelRealization h = sample_channel(stats, rng);
    const ChannelEstimates est = estimate_channels(h, pilots, assoc, stats, snr, tau_p, rng);
    const LocalCombiners comb = lmmse_vectors(est, nu_unit, assoc, snr);

    for (int i = 0; i < assoc.num_links(); ++i) {
      const auto [k, l] = assoc.link_list[i];
      const auto v = comb.v.col(i);
      // E over symbols and noise: SNR * sum_i |v^H h_i|^2 + ||v||^2,
      // the sum running over every transmitting (served) UE.
      double p = v.squaredNorm();
      for (int kk = 0; kk < assoc.num_ues; ++kk) {
        if (!assoc.is_served(kk)) continue;
        const std::complex<double> g = v.dot(h.block(l, kk));
        p += snr * std::norm(g);
      }
      acc[i] += p;
    }
  }
  for (auto& a : acc) a /= static_cast<double>(n_mc);
  return acc;
}

ClusterCombining cluster_combining(const ChannelEstimates& est, const LocalCombiners& comb,
                                   const QuantProfile& quant, const Association& nominal,
                                   const Association& effective, double snr) {
  if (quant.num_links() != nominal.num_links())
    throw std::invalid_argument("cluster_combining: profile does not match the association");
  const int K = nominal.num_ues;
  ClusterCombining out;
  out.weights.resize(K);
  out.nominal_sinr.assign(K, 0.0);

  for (int k = 0; k < K; ++k) {
    const auto& cluster = effective.clusters[k];
    const int rows = static_cast<int>(cluster.size());
    if (rows == 0) continue;

    // UEs whose estimates are visible to this cluster processor.
    std::vector<int> others;
    {
      std::vector<char> seen(K, 0);
      for (int l : cluster)
        for (int i : nominal.served[l])
          if (i != k && !seen[i]) {
            seen[i] = 1;
            others.push_back(i);
          }
      std::sort(others.begin(), others.end());
    }

    Eigen::VectorXcd a(rows);
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(rows, static_cast<int>(others.size()));
    Eigen::VectorXd diag(rows);
    for (int r = 0; r < rows; ++r) {
      const int l = cluster[r];
      const int idx = nominal.link_index(l, k);
      const double gain = quant.gain[idx];
      const auto v = comb.v.col(idx);
      a[r] = gain * v.dot(est.h_hat.col(idx));
      for (size_t c = 0; c < others.size(); ++c) {
        const int i = others[c];
        if (!nominal.contains(l, i)) continue;
        g(r, static_cast<int>(c)) = gain * v.dot(est.h_hat.col(nominal.link_index(l, i)));
      }
      diag[r] = gain * gain * v.squaredNorm() * comb.nu[l] + quant.err_var[idx];
    }

    Eigen::MatrixXcd gamma = snr * g * g.adjoint();
    gamma.diagonal() += diag.cast<std::complex<double>>();

    const Eigen::LLT<Eigen::MatrixXcd> llt(gamma);
    Eigen::VectorXcd w;
    if (llt.info() == Eigen::Success) {
      w = llt.solve(a);
    } else {
      w = Eigen::VectorXcd::Zero(rows);
    }
    // Rayleigh quotient at the optimum: SNR * |w^H a|^2 / (w^H Gamma w).
    const double quad = std::real(w.dot(gamma * w));
    if (quad > 0.0) out.nominal_sinr[k] = snr * std::norm(w.dot(a)) / quad;
    out.weights[k] = std::move(w);
  }
  return out;
}

std::vector<double> actual_sinr_ul(const ChannelRealization& h, const ChannelEstimates& est,
                                   const LocalCombiners& comb, const ClusterCombining& cc,
                                   const QuantProfile& quant, const Association& nominal,
                                   const Association& effective, double snr) {
  (void)est;
  const int K = nominal.num_ues;
  std::vector<double> sinr(K, 0.0);

  for (int k = 0; k < K; ++k) {
    const auto& cluster = effective.clusters[k];
    if (cluster.empty() || cc.weights[k].size() == 0) continue;
    const auto& w = cc.weights[k];

    double noise = 0.0;
    std::vector<std::complex<double>> coupling(K, {0.0, 0.0});
    for (int r = 0; r < static_cast<int>(cluster.size()); ++r) {
      const int l = cluster[r];
      const int idx = nominal.link_index(l, k);
      const double gain = quant.gain[idx];
      const auto v = comb.v.col(idx);
      const std::complex<double> wc = std::conj(w[r]);
      noise += std::norm(w[r]) * (gain * gain * v.squaredNorm() + quant.err_var[idx]);
      for (int i = 0; i < K; ++i) {
        if (!nominal.is_served(i)) continue;
        coupling[i] += wc * gain * v.dot(h.block(l, i));
      }
    }
    double interf = 0.0;
    for (int i = 0; i < K; ++i)
      if (i != k) interf += std::norm(coupling[i]);
    const double den = noise + snr * interf;
    const double num = snr * std::norm(coupling[k]);
    sinr[k] = den > 0.0 ? num / den : 0.0;
  }
  return sinr;
}

double optimistic_rate(const std::vector<double>& sinr_samples) {
  if (sinr_samples.empty()) throw std::invalid_argument("optimistic_rate: no realizations");
  double acc = 0.0;
  for (double s : sinr_samples) acc += std::log2(1.0 + s);
  return acc / static_cast<double>(sinr_samples.size());
}

}  // namespace cfmimo
