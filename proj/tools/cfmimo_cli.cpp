#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cfmimo/experiment.hpp"
#include "cfmimo/rng.hpp"

namespace {

// Random small routing instances solved both exactly and by placement
// enumeration; any mismatch is a solver defect.
int run_oracle_check(const cfmimo::ExperimentConfig& cfg, int instances) {
  using namespace cfmimo;
  int failures = 0;
  for (int i = 0; i < instances; ++i) {
    Rng rng = Rng::substream(cfg.seed, {0x6f7263ULL, static_cast<std::uint64_t>(i)});

    GridTopologyParams tp;
    tp.num_rus = 2 + static_cast<int>(rng.uniform_int(3));
    tp.num_ues = 1 + static_cast<int>(rng.uniform_int(4));
    tp.num_routers = 1 + static_cast<int>(rng.uniform_int(3));
    tp.num_dus = 1 + static_cast<int>(rng.uniform_int(2));
    tp.area_side = 100.0;
    tp.deg_ru_router = 1 + static_cast<int>(rng.uniform_int(tp.num_routers));
    tp.deg_router_du = 1 + static_cast<int>(rng.uniform_int(tp.num_dus));
    tp.rng_seed = rng.next_u64();

    FlowProblemInput in;
    in.topology = build_grid_topology(tp);
    std::vector<std::vector<int>> clusters(tp.num_ues);
    for (int k = 0; k < tp.num_ues; ++k)
      for (int l = 0; l < tp.num_rus; ++l)
        if (rng.uniform() < 0.6) clusters[k].push_back(l);
    in.assoc = Association::from_clusters(tp.num_rus, tp.num_ues, std::move(clusters));
    in.ul_rate_bits.resize(in.assoc.num_links());
    for (auto& v : in.ul_rate_bits) v = rng.uniform(0.01, 8.0);
    in.dl_rate_bits.resize(tp.num_ues);
    for (auto& v : in.dl_rate_bits) v = rng.uniform(0.0, 4.0);
    const double alphas[3] = {0.2, 0.5, 0.8};
    in.alpha_dl = alphas[rng.uniform_int(3)];

    for (DuplexMode mode : {DuplexMode::Full, DuplexMode::Half}) {
      const char* name = mode == DuplexMode::Full ? "full" : "half";
      try {
        const FlowModel fm = mode == DuplexMode::Full ? build_full_duplex_model(in)
                                                      : build_half_duplex_model(in);
        const Solution sol = solve_milp(fm.model);
        const double oracle = brute_force_placement(in, mode);
        const bool ok = sol.status == SolveStatus::Optimal &&
                        std::fabs(sol.objective - oracle) <= 1e-6;
        std::printf("instance %3d %s: milp %.9g enumeration %.9g %s\n", i, name, sol.objective,
                    oracle, ok ? "ok" : "MISMATCH");
        if (!ok) ++failures;
      } catch (const std::exception& e) {
        std::printf("instance %3d %s: error %s\n", i, name, e.what());
        ++failures;
      }
    }
  }
  std::printf("%s\n", failures == 0 ? "oracle check passed" : "oracle check FAILED");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free massive MIMO fronthaul simulator and optimizer"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string duplex;
  bool export_mps_files = false;

  auto* sim = app.add_subcommand("simulate", "Run a distortion sweep and write sweep.csv");
  sim->add_option("--config", config_path, "Experiment config (json)")->required();
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_option("--seed", seed, "Override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  sim->add_option("--duplex", duplex, "full, half, or both")
      ->check(CLI::IsMember({"full", "half", "both"}));
  sim->add_flag("--export-mps", export_mps_files, "Also write one MPS file per solved model");

  int instances = 50;
  auto* oracle = app.add_subcommand("oracle-check",
                                    "Compare branch and bound with placement enumeration");
  oracle->add_option("--config", config_path, "Experiment config (json)")->required();
  oracle->add_option("--instances", instances, "Number of random instances");

  CLI11_PARSE(app, argc, argv);

  try {
    cfmimo::ExperimentConfig cfg = cfmimo::ExperimentConfig::load(config_path);
    if (seed_set) cfg.seed = seed;
    if (!duplex.empty()) {
      if (duplex == "full") cfg.duplex = cfmimo::DuplexSelect::Full;
      if (duplex == "half") cfg.duplex = cfmimo::DuplexSelect::Half;
      if (duplex == "both") cfg.duplex = cfmimo::DuplexSelect::Both;
    }
    if (export_mps_files) cfg.export_mps_files = true;

    if (sim->parsed()) {
      const cfmimo::SweepResult res = cfmimo::run_distortion_sweep(cfg, out_dir);
      std::printf("snr %.6g, sigma2_min %.6g, unserved %d\n", res.snr, res.sigma2_min,
                  res.n_unserved);
      for (const auto& row : res.rows) {
        std::printf("d/s2min %-8.4g %-4s se_ul %-8.4g se_dl %-8.4g fh_ul %-8.4g fh_dl %-8.4g "
                    "obj %-8.4g %s\n",
                    row.d_ratio, row.duplex.c_str(), row.se_ul, row.se_dl, row.fh_ul, row.fh_dl,
                    row.objective, row.error.c_str());
      }
      if (!res.violations.empty()) {
        std::printf("verifier violations:\n");
        for (const auto& v : res.violations) std::printf("  %s\n", v.c_str());
        return 2;
      }
      std::printf("wrote %s/sweep.csv\n", out_dir.c_str());
      return 0;
    }
    return run_oracle_check(cfg, instances);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
