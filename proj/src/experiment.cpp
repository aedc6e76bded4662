#include "cfmimo/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cfmimo/dl_phy.hpp"
#include "cfmimo/quantization.hpp"
#include "cfmimo/ul_phy.hpp"

namespace cfmimo {

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  if (num_rus <= 0 || num_ues <= 0 || num_routers <= 0 || num_dus <= 0 || antennas <= 0)
    bad.push_back("node and antenna counts must be positive");
  if (area_side <= 0.0) bad.push_back("area_side must be positive");
  if (tau_p < 1 || tau_p > block_len) bad.push_back("tau_p must lie in [1, block_len]");
  if (!(alpha_dl > 0.0 && alpha_dl < 1.0)) bad.push_back("alpha_dl must lie in (0,1)");
  if (d_ratios.empty()) bad.push_back("d_ratios must not be empty");
  for (double r : d_ratios)
    if (r <= 0.0) bad.push_back("d_ratios must be positive");
  if (n_realizations < 1 || n_mc_sigma < 1) bad.push_back("realization counts must be >= 1");
  if (!du_capacity.empty() && static_cast<int>(du_capacity.size()) != num_dus)
    bad.push_back("du_capacity must have one entry per DU");
  return bad;
}

std::pair<double, double> compute_se(const std::vector<double>& ul_rates,
                                     const std::vector<double>& dl_rates, double alpha_dl,
                                     int tau_p, int block_len) {
  double ul = 0.0, dl = 0.0;
  for (double r : ul_rates) {
    if (r < 0.0) throw std::invalid_argument("compute_se: negative rate");
    ul += r;
  }
  for (double r : dl_rates) {
    if (r < 0.0) throw std::invalid_argument("compute_se: negative rate");
    dl += r;
  }
  const double data_frac = 1.0 - static_cast<double>(tau_p) / block_len;
  return {(1.0 - alpha_dl) * data_frac * ul, alpha_dl * data_frac * dl};
}

namespace {

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const char* duplex_name(DuplexMode m) { return m == DuplexMode::Full ? "full" : "half"; }

struct RealizationCache {
  ChannelRealization h;
  ChannelEstimates est;
  LocalCombiners comb;
};

}  // namespace

SweepResult run_distortion_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
  const auto bad = cfg.validate();
  if (!bad.empty()) throw std::invalid_argument("run_distortion_sweep: " + bad.front());
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  GridTopologyParams tp;
  tp.num_rus = cfg.num_rus;
  tp.num_ues = cfg.num_ues;
  tp.num_routers = cfg.num_routers;
  tp.num_dus = cfg.num_dus;
  tp.area_side = cfg.area_side;
  tp.deg_ru_router = cfg.deg_ru_router;
  tp.deg_router_du = cfg.deg_router_du;
  tp.rng_seed = cfg.seed;
  NetworkTopology topo = build_grid_topology(tp);
  topo.du_capacity = cfg.du_capacity;

  const double snr = calibrate_snr(cfg.area_side * cfg.area_side, cfg.num_rus, cfg.antennas,
                                   cfg.lsfc, cfg.beta_bar_mode);
  const ChannelStats stats =
      sample_lsfc(topo, cfg.lsfc, cfg.antennas, cfg.angular_spread, cfg.seed);
  const Association assoc =
      form_clusters(stats, snr, {cfg.snr_threshold, cfg.max_cluster_size});
  const PilotAssignment pilots =
      assign_pilots(assoc, stats, {cfg.tau_p, cfg.pilot_overlap_tolerance});

  SweepResult result;
  result.snr = snr;
  result.n_unserved = cfg.num_ues - assoc.num_served();

  const std::vector<double> sigma2 = observation_variance(assoc, stats, pilots, snr, cfg.tau_p,
                                                          cfg.n_mc_sigma, cfg.seed);
  double sigma2_min = kInf;
  for (double s : sigma2) sigma2_min = std::min(sigma2_min, s);
  if (assoc.num_links() == 0) sigma2_min = 0.0;
  result.sigma2_min = sigma2_min;

  // Common random numbers: one realization ensemble shared by every
  // distortion point of the sweep.
  const std::vector<double> nu = noise_plus_oci_variance(assoc, stats, snr);
  std::vector<RealizationCache> reals(cfg.n_realizations);
  for (int r = 0; r < cfg.n_realizations; ++r) {
    Rng rng = Rng::substream(cfg.seed, {0x6f6572ULL, static_cast<std::uint64_t>(r)});
    reals[r].h = sample_channel(stats, rng);
    reals[r].est = estimate_channels(reals[r].h, pilots, assoc, stats, snr, cfg.tau_p, rng);
    reals[r].comb = lmmse_vectors(reals[r].est, nu, assoc, snr);
  }

  std::vector<DuplexMode> modes;
  if (cfg.duplex != DuplexSelect::Half) modes.push_back(DuplexMode::Full);
  if (cfg.duplex != DuplexSelect::Full) modes.push_back(DuplexMode::Half);

  // DL rates only change when the pruned association changes.
  std::map<std::vector<std::pair<int, int>>, std::vector<double>> dl_cache;

  SolverOptions sopts;
  sopts.node_limit = cfg.node_limit;
  sopts.time_limit_s = cfg.time_limit_s;

  for (size_t di = 0; di < cfg.d_ratios.size(); ++di) {
    const double ratio = cfg.d_ratios[di];
    const double dlev = ratio * sigma2_min;
    const QuantProfile profile = make_quant_profile(sigma2, dlev);
    const Association eff = prune_clusters(assoc, profile);

    std::vector<double> ul_rates(cfg.num_ues, 0.0);
    for (int r = 0; r < cfg.n_realizations; ++r) {
      const ClusterCombining cc =
          cluster_combining(reals[r].est, reals[r].comb, profile, assoc, eff, snr);
      const std::vector<double> sinr = actual_sinr_ul(reals[r].h, reals[r].est, reals[r].comb,
                                                      cc, profile, assoc, eff, snr);
      for (int k = 0; k < cfg.num_ues; ++k) ul_rates[k] += std::log2(1.0 + sinr[k]);
    }
    for (auto& v : ul_rates) v /= cfg.n_realizations;

    std::vector<double>& dl_rates = dl_cache[eff.link_list];
    if (dl_rates.empty()) {
      dl_rates.assign(cfg.num_ues, 0.0);
      for (int r = 0; r < cfg.n_realizations; ++r) {
        const Precoders pre = build_precoders(reals[r].comb, reals[r].est, assoc, eff, snr);
        const std::vector<double> sinr = dl_sinr(reals[r].h, pre, eff, snr);
        for (int k = 0; k < cfg.num_ues; ++k) dl_rates[k] += std::log2(1.0 + sinr[k]);
      }
      for (auto& v : dl_rates) v /= cfg.n_realizations;
    }

    const auto [se_ul, se_dl] = compute_se(ul_rates, dl_rates, cfg.alpha_dl, cfg.tau_p,
                                           cfg.block_len);

    FlowProblemInput input;
    input.topology = topo;
    input.assoc = eff;
    input.ul_rate_bits.resize(eff.num_links());
    for (int i = 0; i < eff.num_links(); ++i) {
      const auto [k, l] = eff.link_list[i];
      input.ul_rate_bits[i] = profile.rate_bits[assoc.link_index(l, k)];
    }
    input.dl_rate_bits = dl_rates;
    input.alpha_dl = cfg.alpha_dl;
    input.w_ul = cfg.w_ul;
    input.w_dl = cfg.w_dl;
    input.w_hd = cfg.w_hd;

    for (DuplexMode mode : modes) {
      SweepRow row;
      row.d_ratio = ratio;
      row.d = dlev;
      row.se_ul = se_ul;
      row.se_dl = se_dl;
      row.se_tot = se_ul + se_dl;
      row.duplex = duplex_name(mode);
      row.n_pruned_links = profile.num_pruned();

      const auto t0 = std::chrono::steady_clock::now();
      try {
        const FlowSolution fs = solve_flow_problem(input, mode, sopts);
        if (fs.status == SolveStatus::Optimal || fs.status == SolveStatus::ResourceLimit) {
          const auto viols = verify_solution(fs, input);
          for (const auto& v : viols)
            result.violations.push_back("d=" + fmt6(ratio) + " " + row.duplex + ": " + v);
          const FronthaulMetrics metrics = fronthaul_capacities(fs, input);
          row.fh_ul = metrics.load_ul;
          row.fh_dl = metrics.load_dl;
          row.fh_tot = metrics.load_total;
          row.objective = fs.objective;
          if (fs.status == SolveStatus::ResourceLimit)
            row.error = "node or time limit, incumbent reported, bound " + fmt6(fs.best_bound);
        } else {
          row.error = "solver status not optimal";
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      row.runtime_s = dt.count();

      if (!out_dir.empty()) {
        const std::string tag = "d" + std::to_string(di) + "_" + row.duplex;
        std::ofstream dump(out_dir + "/instance_" + tag + ".json");
        dump << input.to_json().dump(2) << "\n";
        if (cfg.export_mps_files) {
          const FlowModel fmod = mode == DuplexMode::Full ? build_full_duplex_model(input)
                                                          : build_half_duplex_model(input);
          std::ofstream mps(out_dir + "/model_" + tag + ".mps");
          mps << export_mps(fmod.model);
        }
      }
      result.rows.push_back(std::move(row));
    }
  }

  if (!out_dir.empty()) emit_csv(result.rows, out_dir + "/sweep.csv");
  return result;
}

void emit_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "d_ratio,d,se_ul,se_dl,se_tot,fh_ul,fh_dl,fh_tot,objective,duplex,n_pruned_links,"
        "runtime_s\n";
  for (const auto& r : rows) {
    os << fmt6(r.d_ratio) << ',' << fmt6(r.d) << ',' << fmt6(r.se_ul) << ',' << fmt6(r.se_dl)
       << ',' << fmt6(r.se_tot) << ',' << fmt6(r.fh_ul) << ',' << fmt6(r.fh_dl) << ','
       << fmt6(r.fh_tot) << ',' << fmt6(r.objective) << ',' << r.duplex << ','
       << r.n_pruned_links << ',' << fmt6(r.runtime_s) << '\n';
  }
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
  emit_csv(rows, f);
}

namespace {

DuplexSelect duplex_from_string(const std::string& s) {
  if (s == "full") return DuplexSelect::Full;
  if (s == "half") return DuplexSelect::Half;
  if (s == "both") return DuplexSelect::Both;
  throw std::invalid_argument("duplex must be full, half, or both");
}

std::string duplex_to_string(DuplexSelect d) {
  switch (d) {
    case DuplexSelect::Full: return "full";
    case DuplexSelect::Half: return "half";
    default: return "both";
  }
}

BetaBarMode beta_mode_from_string(const std::string& s) {
  if (s == "weighted") return BetaBarMode::LosWeighted;
  if (s == "los") return BetaBarMode::LosOnly;
  if (s == "nlos") return BetaBarMode::NlosOnly;
  throw std::invalid_argument("beta_bar_mode must be weighted, los, or nlos");
}

std::string beta_mode_to_string(BetaBarMode m) {
  switch (m) {
    case BetaBarMode::LosOnly: return "los";
    case BetaBarMode::NlosOnly: return "nlos";
    default: return "weighted";
  }
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["num_rus"] = num_rus;
  j["num_ues"] = num_ues;
  j["num_routers"] = num_routers;
  j["num_dus"] = num_dus;
  j["antennas"] = antennas;
  j["area_side"] = area_side;
  j["deg_ru_router"] = deg_ru_router;
  j["deg_router_du"] = deg_router_du;
  j["angular_spread"] = angular_spread;
  j["tau_p"] = tau_p;
  j["block_len"] = block_len;
  j["snr_threshold"] = snr_threshold;
  j["max_cluster_size"] = max_cluster_size;
  j["pilot_overlap_tolerance"] = pilot_overlap_tolerance;
  j["alpha_dl"] = alpha_dl;
  j["d_ratios"] = d_ratios;
  j["n_realizations"] = n_realizations;
  j["n_mc_sigma"] = n_mc_sigma;
  j["seed"] = seed;
  j["duplex"] = duplex_to_string(duplex);
  j["carrier_freq_ghz"] = lsfc.carrier_freq_ghz;
  j["h_bs_m"] = lsfc.h_bs_m;
  j["h_ut_m"] = lsfc.h_ut_m;
  j["shadow_std_los_db"] = lsfc.shadow_std_los_db;
  j["shadow_std_nlos_db"] = lsfc.shadow_std_nlos_db;
  j["beta_bar_mode"] = beta_mode_to_string(beta_bar_mode);
  j["weight_ul_ru"] = w_ul.ru;
  j["weight_ul_rr"] = w_ul.rr;
  j["weight_ul_du"] = w_ul.du;
  j["weight_dl_ru"] = w_dl.ru;
  j["weight_dl_rr"] = w_dl.rr;
  j["weight_dl_du"] = w_dl.du;
  j["weight_hd_ru"] = w_hd.ru;
  j["weight_hd_rr"] = w_hd.rr;
  j["weight_hd_du"] = w_hd.du;
  j["node_limit"] = node_limit;
  j["time_limit_s"] = time_limit_s;
  if (!du_capacity.empty()) j["du_capacity"] = du_capacity;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.num_rus = j.value("num_rus", c.num_rus);
  c.num_ues = j.value("num_ues", c.num_ues);
  c.num_routers = j.value("num_routers", c.num_routers);
  c.num_dus = j.value("num_dus", c.num_dus);
  c.antennas = j.value("antennas", c.antennas);
  c.area_side = j.value("area_side", c.area_side);
  c.deg_ru_router = j.value("deg_ru_router", c.deg_ru_router);
  c.deg_router_du = j.value("deg_router_du", c.deg_router_du);
  c.angular_spread = j.value("angular_spread", c.angular_spread);
  c.tau_p = j.value("tau_p", c.tau_p);
  c.block_len = j.value("block_len", c.block_len);
  c.snr_threshold = j.value("snr_threshold", c.snr_threshold);
  c.max_cluster_size = j.value("max_cluster_size", c.max_cluster_size);
  c.pilot_overlap_tolerance = j.value("pilot_overlap_tolerance", c.pilot_overlap_tolerance);
  c.alpha_dl = j.value("alpha_dl", c.alpha_dl);
  if (j.contains("d_ratios")) c.d_ratios = j.at("d_ratios").get<std::vector<double>>();
  c.n_realizations = j.value("n_realizations", c.n_realizations);
  c.n_mc_sigma = j.value("n_mc_sigma", c.n_mc_sigma);
  c.seed = j.value("seed", c.seed);
  if (j.contains("duplex")) c.duplex = duplex_from_string(j.at("duplex").get<std::string>());
  c.lsfc.carrier_freq_ghz = j.value("carrier_freq_ghz", c.lsfc.carrier_freq_ghz);
  c.lsfc.h_bs_m = j.value("h_bs_m", c.lsfc.h_bs_m);
  c.lsfc.h_ut_m = j.value("h_ut_m", c.lsfc.h_ut_m);
  c.lsfc.shadow_std_los_db = j.value("shadow_std_los_db", c.lsfc.shadow_std_los_db);
  c.lsfc.shadow_std_nlos_db = j.value("shadow_std_nlos_db", c.lsfc.shadow_std_nlos_db);
  if (j.contains("beta_bar_mode"))
    c.beta_bar_mode = beta_mode_from_string(j.at("beta_bar_mode").get<std::string>());
  c.w_ul.ru = j.value("weight_ul_ru", 1.0);
  c.w_ul.rr = j.value("weight_ul_rr", 1.0);
  c.w_ul.du = j.value("weight_ul_du", 1.0);
  c.w_dl.ru = j.value("weight_dl_ru", 1.0);
  c.w_dl.rr = j.value("weight_dl_rr", 1.0);
  c.w_dl.du = j.value("weight_dl_du", 1.0);
  c.w_hd.ru = j.value("weight_hd_ru", 1.0);
  c.w_hd.rr = j.value("weight_hd_rr", 1.0);
  c.w_hd.du = j.value("weight_hd_du", 1.0);
  c.node_limit = j.value("node_limit", c.node_limit);
  c.time_limit_s = j.value("time_limit_s", c.time_limit_s);
  if (j.contains("du_capacity")) c.du_capacity = j.at("du_capacity").get<std::vector<double>>();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  f >> j;
  return from_json(j);
}

}  // namespace cfmimo
