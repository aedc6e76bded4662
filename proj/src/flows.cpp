#include "cfmimo/flows.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cfmimo {

namespace {

constexpr double kTol = 1e-6;

std::string b36(int v, int width) {
  static const char* digits = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  std::string s(width, '0');
  for (int i = width - 1; i >= 0; --i) {
    s[i] = digits[v % 36];
    v /= 36;
  }
  if (v != 0) throw std::invalid_argument("index too large for flow variable naming");
  return s;
}

struct Demands {
  std::vector<int> served;             // UEs with a nonempty cluster
  std::vector<double> ul_scale_rate;   // per association link, duplex-scaled
  std::vector<double> dl_scale_rate;   // per UE, duplex-scaled
  std::vector<double> ul_sum;          // per UE: sum of scaled link rates
};

Demands make_demands(const FlowProblemInput& in, DuplexMode mode) {
  Demands d;
  const double ul_f = mode == DuplexMode::Half ? 1.0 - in.alpha_dl : 1.0;
  const double dl_f = mode == DuplexMode::Half ? in.alpha_dl : 1.0;
  d.ul_scale_rate.resize(in.assoc.num_links());
  for (int i = 0; i < in.assoc.num_links(); ++i) d.ul_scale_rate[i] = ul_f * in.ul_rate_bits[i];
  d.dl_scale_rate.resize(in.assoc.num_ues);
  d.ul_sum.assign(in.assoc.num_ues, 0.0);
  for (int k = 0; k < in.assoc.num_ues; ++k) {
    d.dl_scale_rate[k] = dl_f * in.dl_rate_bits[k];
    if (in.assoc.is_served(k)) {
      d.served.push_back(k);
      for (int l : in.assoc.clusters[k]) d.ul_sum[k] += d.ul_scale_rate[in.assoc.link_index(l, k)];
    }
  }
  return d;
}

// Router-to-router reachability closure over the oriented relay edges.
std::vector<std::vector<char>> router_closure(const NetworkTopology& topo) {
  const int Q = topo.num_routers;
  std::vector<std::vector<int>> out(Q);
  for (const auto& [q, qq] : topo.router_router_edges) out[q].push_back(qq);
  std::vector<std::vector<char>> reach(Q, std::vector<char>(Q, 0));
  for (int s = 0; s < Q; ++s) {
    std::queue<int> fr;
    fr.push(s);
    reach[s][s] = 1;
    while (!fr.empty()) {
      const int q = fr.front();
      fr.pop();
      for (int qq : out[q])
        if (!reach[s][qq]) {
          reach[s][qq] = 1;
          fr.push(qq);
        }
    }
  }
  return reach;
}

void check_paths(const FlowProblemInput& in, const Demands& d) {
  const auto& topo = in.topology;
  const auto reach = router_closure(topo);
  const int N = topo.num_dus;

  std::vector<std::vector<int>> ru_routers(topo.num_rus());
  for (const auto& [l, q] : topo.ru_router_edges) ru_routers[l].push_back(q);
  std::vector<std::vector<int>> du_routers(N);
  for (const auto& [q, n] : topo.router_du_edges) du_routers[n].push_back(q);

  auto connected = [&](int l, int n) {
    for (int q1 : ru_routers[l])
      for (int q2 : du_routers[n])
        if (reach[q1][q2] && reach[q2][q1]) return true;
    return false;
  };

  for (int k : d.served) {
    bool any = false;
    for (int n = 0; n < N && !any; ++n) {
      bool all = true;
      for (int l : in.assoc.clusters[k])
        if (!connected(l, n)) {
          all = false;
          break;
        }
      any = all;
    }
    if (!any)
      throw std::runtime_error("flow problem: UE " + std::to_string(k) +
                               " has no DU reachable from its whole cluster");
  }
}

struct EdgeIndex {
  std::vector<std::vector<int>> ru_edges_of_ru;      // RU -> positions in ru_router_edges
  std::vector<std::vector<int>> ru_edges_of_router;  // router -> positions in ru_router_edges
  std::vector<std::vector<int>> rr_out;              // router -> positions (q, ·)
  std::vector<std::vector<int>> rr_in;               // router -> positions (·, q)
  std::vector<std::vector<int>> rd_edges_of_router;  // router -> positions in router_du_edges
  std::vector<std::vector<int>> rd_edges_of_du;      // DU -> positions in router_du_edges
};

EdgeIndex index_edges(const NetworkTopology& topo) {
  EdgeIndex ix;
  ix.ru_edges_of_ru.resize(topo.num_rus());
  ix.ru_edges_of_router.resize(topo.num_routers);
  ix.rr_out.resize(topo.num_routers);
  ix.rr_in.resize(topo.num_routers);
  ix.rd_edges_of_router.resize(topo.num_routers);
  ix.rd_edges_of_du.resize(topo.num_dus);
  for (int e = 0; e < static_cast<int>(topo.ru_router_edges.size()); ++e) {
    ix.ru_edges_of_ru[topo.ru_router_edges[e].first].push_back(e);
    ix.ru_edges_of_router[topo.ru_router_edges[e].second].push_back(e);
  }
  for (int e = 0; e < static_cast<int>(topo.router_router_edges.size()); ++e) {
    ix.rr_out[topo.router_router_edges[e].first].push_back(e);
    ix.rr_in[topo.router_router_edges[e].second].push_back(e);
  }
  for (int e = 0; e < static_cast<int>(topo.router_du_edges.size()); ++e) {
    ix.rd_edges_of_router[topo.router_du_edges[e].first].push_back(e);
    ix.rd_edges_of_du[topo.router_du_edges[e].second].push_back(e);
  }
  return ix;
}

FlowModel build_model(const FlowProblemInput& input, DuplexMode mode) {
  const auto bad = input.validate();
  if (!bad.empty()) throw std::invalid_argument("flow model: " + bad.front());
  const Demands d = make_demands(input, mode);
  check_paths(input, d);

  const auto& topo = input.topology;
  const auto& assoc = input.assoc;
  const EdgeIndex ix = index_edges(topo);
  const int K = assoc.num_ues;
  const int N = topo.num_dus;
  const int n_ru_e = static_cast<int>(topo.ru_router_edges.size());
  const int n_rr_e = static_cast<int>(topo.router_router_edges.size());
  const int n_rd_e = static_cast<int>(topo.router_du_edges.size());

  FlowModel fm;
  fm.mode = mode;
  fm.x_ru.setConstant(K, std::max(n_ru_e, 1), -1);
  fm.x_rr.setConstant(K, std::max(n_rr_e, 1), -1);
  fm.x_du.setConstant(K, std::max(n_rd_e, 1), -1);
  fm.y_ru.setConstant(K, std::max(n_ru_e, 1), -1);
  fm.y_rr.setConstant(K, std::max(n_rr_e, 1), -1);
  fm.y_du.setConstant(K, std::max(n_rd_e, 1), -1);
  fm.b.setConstant(K, N, -1);
  MilpModel& m = fm.model;

  for (int k : d.served) {
    const std::string kk = b36(k, 2);
    for (int l : assoc.clusters[k]) {
      const double cap = d.ul_scale_rate[assoc.link_index(l, k)];
      for (int e : ix.ru_edges_of_ru[l]) {
        const auto& [el, eq] = topo.ru_router_edges[e];
        fm.x_ru(k, e) = m.add_continuous("XR" + kk + b36(el, 2) + b36(eq, 1), 0.0, cap);
      }
    }
    for (int e = 0; e < n_rr_e; ++e) {
      const auto& [q1, q2] = topo.router_router_edges[e];
      fm.x_rr(k, e) = m.add_continuous("XQ" + kk + b36(q1, 1) + b36(q2, 1));
    }
    for (int e = 0; e < n_rd_e; ++e) {
      const auto& [q, n] = topo.router_du_edges[e];
      fm.x_du(k, e) = m.add_continuous("XD" + kk + b36(q, 1) + b36(n, 1));
    }
    for (int l : assoc.clusters[k]) {
      for (int e : ix.ru_edges_of_ru[l]) {
        const auto& [el, eq] = topo.ru_router_edges[e];
        fm.y_ru(k, e) = m.add_continuous("YR" + kk + b36(eq, 1) + b36(el, 2));
      }
    }
    for (int e = 0; e < n_rr_e; ++e) {
      const auto& [q1, q2] = topo.router_router_edges[e];
      fm.y_rr(k, e) = m.add_continuous("YQ" + kk + b36(q1, 1) + b36(q2, 1));
    }
    for (int e = 0; e < n_rd_e; ++e) {
      const auto& [q, n] = topo.router_du_edges[e];
      fm.y_du(k, e) = m.add_continuous("YD" + kk + b36(n, 1) + b36(q, 1));
    }
  }
  for (int k : d.served)
    for (int n = 0; n < N; ++n) fm.b(k, n) = m.add_binary("B" + b36(k, 2) + b36(n, 1));

  if (mode == DuplexMode::Full) {
    fm.cap_ru_ul = m.add_continuous("CLU");
    fm.cap_rr_ul = m.add_continuous("CQU");
    fm.cap_du_ul = m.add_continuous("CDU");
    fm.cap_ru_dl = m.add_continuous("CLD");
    fm.cap_rr_dl = m.add_continuous("CQD");
    fm.cap_du_dl = m.add_continuous("CDD");
    fm.aux_max = m.add_continuous("T");
  } else {
    fm.cap_ru = m.add_continuous("CL");
    fm.cap_rr = m.add_continuous("CQ");
    fm.cap_du = m.add_continuous("CD");
  }

  // Per-UE routing structure.
  for (int k : d.served) {
    const std::string kk = b36(k, 2);

    // UL flow conservation at every router.
    for (int q = 0; q < topo.num_routers; ++q) {
      std::vector<LinearTerm> terms;
      for (int e : ix.ru_edges_of_router[q])
        if (fm.x_ru(k, e) >= 0) terms.push_back({fm.x_ru(k, e), 1.0});
      for (int e : ix.rr_in[q]) terms.push_back({fm.x_rr(k, e), 1.0});
      for (int e : ix.rr_out[q]) terms.push_back({fm.x_rr(k, e), -1.0});
      for (int e : ix.rd_edges_of_router[q]) terms.push_back({fm.x_du(k, e), -1.0});
      m.add_constraint("FC" + kk + b36(q, 1), std::move(terms), Relation::Equal, 0.0);
    }

    // Each serving RU must push out its whole quantized observation rate.
    for (int l : assoc.clusters[k]) {
      std::vector<LinearTerm> terms;
      for (int e : ix.ru_edges_of_ru[l]) terms.push_back({fm.x_ru(k, e), 1.0});
      m.add_constraint("US" + kk + b36(l, 2), std::move(terms), Relation::GreaterEqual,
                       d.ul_scale_rate[assoc.link_index(l, k)]);
    }

    // Exactly one hosting DU.
    {
      std::vector<LinearTerm> terms;
      for (int n = 0; n < N; ++n) terms.push_back({fm.b(k, n), 1.0});
      m.add_constraint("PL" + kk, std::move(terms), Relation::Equal, 1.0);
    }

    // The hosting DU absorbs the whole cluster rate; others receive nothing.
    for (int n = 0; n < N; ++n) {
      std::vector<LinearTerm> terms;
      for (int e : ix.rd_edges_of_du[n]) terms.push_back({fm.x_du(k, e), 1.0});
      terms.push_back({fm.b(k, n), -d.ul_sum[k]});
      m.add_constraint("UK" + kk + b36(n, 1), std::move(terms), Relation::GreaterEqual, 0.0);
    }
    for (int e = 0; e < n_rd_e; ++e) {
      const auto& [q, n] = topo.router_du_edges[e];
      m.add_constraint("UX" + kk + b36(q, 1) + b36(n, 1),
                       {{fm.x_du(k, e), 1.0}, {fm.b(k, n), -d.ul_sum[k]}}, Relation::LessEqual,
                       0.0);
    }

    // DL multicast: router output is covered by router input, per receiver.
    for (int l : assoc.clusters[k]) {
      for (int e : ix.ru_edges_of_ru[l]) {
        const auto& [el, eq] = topo.ru_router_edges[e];
        std::vector<LinearTerm> terms;
        for (int ee : ix.rd_edges_of_router[eq]) terms.push_back({fm.y_du(k, ee), 1.0});
        for (int ee : ix.rr_in[eq]) terms.push_back({fm.y_rr(k, ee), 1.0});
        terms.push_back({fm.y_ru(k, e), -1.0});
        m.add_constraint("DR" + kk + b36(eq, 1) + b36(el, 2), std::move(terms),
                         Relation::GreaterEqual, 0.0);
      }
    }
    for (int e = 0; e < n_rr_e; ++e) {
      const auto& [q1, q2] = topo.router_router_edges[e];
      std::vector<LinearTerm> terms;
      for (int ee : ix.rd_edges_of_router[q1]) terms.push_back({fm.y_du(k, ee), 1.0});
      for (int ee : ix.rr_in[q1]) terms.push_back({fm.y_rr(k, ee), 1.0});
      terms.push_back({fm.y_rr(k, e), -1.0});
      m.add_constraint("DQ" + kk + b36(q1, 1) + b36(q2, 1), std::move(terms),
                       Relation::GreaterEqual, 0.0);
    }

    // Only the hosting DU injects the UE's DL stream.
    for (int n = 0; n < N; ++n) {
      std::vector<LinearTerm> terms;
      for (int e : ix.rd_edges_of_du[n]) terms.push_back({fm.y_du(k, e), 1.0});
      terms.push_back({fm.b(k, n), -d.dl_scale_rate[k]});
      m.add_constraint("DS" + kk + b36(n, 1), std::move(terms), Relation::GreaterEqual, 0.0);
    }
    for (int e = 0; e < n_rd_e; ++e) {
      const auto& [q, n] = topo.router_du_edges[e];
      m.add_constraint("DX" + kk + b36(n, 1) + b36(q, 1),
                       {{fm.y_du(k, e), 1.0}, {fm.b(k, n), -d.dl_scale_rate[k]}},
                       Relation::LessEqual, 0.0);
    }

    // Every serving RU receives the full DL stream.
    for (int l : assoc.clusters[k]) {
      std::vector<LinearTerm> terms;
      for (int e : ix.ru_edges_of_ru[l]) terms.push_back({fm.y_ru(k, e), 1.0});
      m.add_constraint("DK" + kk + b36(l, 2), std::move(terms), Relation::GreaterEqual,
                       d.dl_scale_rate[k]);
    }
  }

  // Link capacities.
  auto cap_rows = [&](const char* tag, const Eigen::MatrixXi& xs, const Eigen::MatrixXi& ys,
                      int edges, int cap_var, auto edge_name) {
    for (int e = 0; e < edges; ++e) {
      std::vector<LinearTerm> terms;
      for (int k : d.served) {
        if (xs(k, e) >= 0) terms.push_back({xs(k, e), 1.0});
        if (ys.size() > 0 && ys(k, e) >= 0) terms.push_back({ys(k, e), 1.0});
      }
      terms.push_back({cap_var, -1.0});
      m.add_constraint(tag + edge_name(e), std::move(terms), Relation::LessEqual, 0.0);
    }
  };
  const Eigen::MatrixXi none;
  auto ru_name = [&](int e) {
    const auto& [l, q] = topo.ru_router_edges[e];
    return b36(l, 2) + b36(q, 1);
  };
  auto rr_name = [&](int e) {
    const auto& [q1, q2] = topo.router_router_edges[e];
    return b36(q1, 1) + b36(q2, 1);
  };
  auto rd_name = [&](int e) {
    const auto& [q, n] = topo.router_du_edges[e];
    return b36(q, 1) + b36(n, 1);
  };

  if (mode == DuplexMode::Full) {
    cap_rows("KA", fm.x_ru, none, n_ru_e, fm.cap_ru_ul, ru_name);
    cap_rows("KB", fm.x_rr, none, n_rr_e, fm.cap_rr_ul, rr_name);
    cap_rows("KC", fm.x_du, none, n_rd_e, fm.cap_du_ul, rd_name);
    cap_rows("KD", fm.y_ru, none, n_ru_e, fm.cap_ru_dl, ru_name);
    cap_rows("KE", fm.y_rr, none, n_rr_e, fm.cap_rr_dl, rr_name);
    cap_rows("KF", fm.y_du, none, n_rd_e, fm.cap_du_dl, rd_name);

    const double ua = 1.0 - input.alpha_dl;
    const double da = input.alpha_dl;
    m.add_constraint("TUL",
                     {{fm.cap_ru_ul, ua * input.w_ul.ru},
                      {fm.cap_rr_ul, ua * input.w_ul.rr},
                      {fm.cap_du_ul, ua * input.w_ul.du},
                      {fm.aux_max, -1.0}},
                     Relation::LessEqual, 0.0);
    m.add_constraint("TDL",
                     {{fm.cap_ru_dl, da * input.w_dl.ru},
                      {fm.cap_rr_dl, da * input.w_dl.rr},
                      {fm.cap_du_dl, da * input.w_dl.du},
                      {fm.aux_max, -1.0}},
                     Relation::LessEqual, 0.0);
    m.set_objective({{fm.aux_max, 1.0}});
  } else {
    cap_rows("KG", fm.x_ru, fm.y_ru, n_ru_e, fm.cap_ru, ru_name);
    cap_rows("KH", fm.x_rr, fm.y_rr, n_rr_e, fm.cap_rr, rr_name);
    cap_rows("KI", fm.x_du, fm.y_du, n_rd_e, fm.cap_du, rd_name);
    m.set_objective({{fm.cap_ru, input.w_hd.ru},
                     {fm.cap_rr, input.w_hd.rr},
                     {fm.cap_du, input.w_hd.du}});
  }

  // Optional per-DU hosting limits.
  if (!topo.du_capacity.empty()) {
    for (int n = 0; n < N; ++n) {
      if (!std::isfinite(topo.du_capacity[n])) continue;
      std::vector<LinearTerm> terms;
      for (int k : d.served) terms.push_back({fm.b(k, n), 1.0});
      m.add_constraint("HN" + b36(n, 1), std::move(terms), Relation::LessEqual,
                       topo.du_capacity[n]);
    }
  }

  return fm;
}

}  // namespace

std::vector<std::string> FlowProblemInput::validate() const {
  std::vector<std::string> bad;
  if (static_cast<int>(ul_rate_bits.size()) != assoc.num_links())
    bad.push_back("ul_rate_bits not aligned with the association links");
  if (static_cast<int>(dl_rate_bits.size()) != assoc.num_ues)
    bad.push_back("dl_rate_bits not aligned with the UEs");
  if (!(alpha_dl > 0.0 && alpha_dl < 1.0)) bad.push_back("alpha_dl must lie in (0,1)");
  for (double v : ul_rate_bits)
    if (v <= 0.0) bad.push_back("nonpositive UL rate on an effective link");
  for (double v : dl_rate_bits)
    if (v < 0.0) bad.push_back("negative DL rate");
  if (topology.num_rus() != assoc.num_rus || topology.num_ues() != assoc.num_ues)
    bad.push_back("association does not match the topology");
  for (double w : {w_ul.ru, w_ul.rr, w_ul.du, w_dl.ru, w_dl.rr, w_dl.du, w_hd.ru, w_hd.rr, w_hd.du})
    if (w <= 0.0) bad.push_back("weights must be positive");
  return bad;
}

FlowModel build_full_duplex_model(const FlowProblemInput& input) {
  return build_model(input, DuplexMode::Full);
}

FlowModel build_half_duplex_model(const FlowProblemInput& input) {
  return build_model(input, DuplexMode::Half);
}

FlowSolution extract_solution(const FlowModel& fm, const Solution& sol,
                              const FlowProblemInput& input) {
  if (!sol.has_incumbent)
    throw std::invalid_argument("extract_solution: solution carries no feasible point");
  const auto& x = sol.values;
  const int K = input.assoc.num_ues;
  const int N = input.topology.num_dus;

  FlowSolution fs;
  fs.mode = fm.mode;
  fs.status = sol.status;
  fs.objective = sol.objective;
  fs.best_bound = sol.best_bound;
  fs.nodes = sol.nodes;

  auto grab = [&](const Eigen::MatrixXi& ids) {
    Eigen::MatrixXd vals = Eigen::MatrixXd::Zero(ids.rows(), ids.cols());
    for (int r = 0; r < ids.rows(); ++r)
      for (int c = 0; c < ids.cols(); ++c)
        if (ids(r, c) >= 0) vals(r, c) = x[ids(r, c)];
    return vals;
  };
  fs.x_ru = grab(fm.x_ru);
  fs.x_rr = grab(fm.x_rr);
  fs.x_du = grab(fm.x_du);
  fs.y_ru = grab(fm.y_ru);
  fs.y_rr = grab(fm.y_rr);
  fs.y_du = grab(fm.y_du);

  fs.placement.assign(K, -1);
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < N; ++n) {
      if (fm.b(k, n) >= 0 && x[fm.b(k, n)] > 0.5) {
        fs.placement[k] = n;
        break;
      }
    }
  }
  if (fm.mode == DuplexMode::Full) {
    fs.cap_ru_ul = x[fm.cap_ru_ul];
    fs.cap_rr_ul = x[fm.cap_rr_ul];
    fs.cap_du_ul = x[fm.cap_du_ul];
    fs.cap_ru_dl = x[fm.cap_ru_dl];
    fs.cap_rr_dl = x[fm.cap_rr_dl];
    fs.cap_du_dl = x[fm.cap_du_dl];
  } else {
    fs.cap_ru = x[fm.cap_ru];
    fs.cap_rr = x[fm.cap_rr];
    fs.cap_du = x[fm.cap_du];
  }
  return fs;
}

std::vector<std::string> verify_solution(const FlowSolution& fs, const FlowProblemInput& input) {
  std::vector<std::string> bad;
  const auto& topo = input.topology;
  const auto& assoc = input.assoc;
  const Demands d = make_demands(input, fs.mode);
  const EdgeIndex ix = index_edges(topo);
  const int N = topo.num_dus;

  auto id2 = [](int a, int b) { return "(" + std::to_string(a) + "," + std::to_string(b) + ")"; };

  for (int k = 0; k < assoc.num_ues; ++k) {
    if (!assoc.is_served(k)) {
      if (fs.placement[k] != -1) bad.push_back("unserved UE " + std::to_string(k) + " hosted");
      continue;
    }
    // placement uniqueness comes from the extraction; re-check hosting exists
    if (fs.placement[k] < 0 || fs.placement[k] >= N) {
      bad.push_back("ue-placement UE " + std::to_string(k) + " has no hosting DU");
      continue;
    }
    const int host = fs.placement[k];

    // nonnegative flows
    auto check_nonneg = [&](const Eigen::MatrixXd& f, const char* tag) {
      for (int e = 0; e < f.cols(); ++e)
        if (f(k, e) < -kTol)
          bad.push_back(std::string(tag) + " negative flow UE " + std::to_string(k) + " edge " +
                        std::to_string(e));
    };
    check_nonneg(fs.x_ru, "ul-ru");
    check_nonneg(fs.x_rr, "ul-rr");
    check_nonneg(fs.x_du, "ul-du");
    check_nonneg(fs.y_ru, "dl-ru");
    check_nonneg(fs.y_rr, "dl-rr");
    check_nonneg(fs.y_du, "dl-du");

    // UL conservation per router
    for (int q = 0; q < topo.num_routers; ++q) {
      double in = 0.0, out = 0.0;
      for (int e : ix.ru_edges_of_router[q]) in += fs.x_ru(k, e);
      for (int e : ix.rr_in[q]) in += fs.x_rr(k, e);
      for (int e : ix.rr_out[q]) out += fs.x_rr(k, e);
      for (int e : ix.rd_edges_of_router[q]) out += fs.x_du(k, e);
      if (std::fabs(in - out) > kTol)
        bad.push_back("ul-conservation UE " + std::to_string(k) + " router " + std::to_string(q));
    }

    // UL source bounds and sums
    for (int l : assoc.clusters[k]) {
      const double rate = d.ul_scale_rate[assoc.link_index(l, k)];
      double sum = 0.0;
      for (int e : ix.ru_edges_of_ru[l]) {
        sum += fs.x_ru(k, e);
        if (fs.x_ru(k, e) > rate + kTol)
          bad.push_back("ul-source-cap UE " + std::to_string(k) + " link " +
                        id2(l, topo.ru_router_edges[e].second));
      }
      if (sum < rate - kTol)
        bad.push_back("ul-source UE " + std::to_string(k) + " RU " + std::to_string(l) +
                      " ships too little");
    }
    for (int e = 0; e < static_cast<int>(topo.ru_router_edges.size()); ++e) {
      const auto& [l, q] = topo.ru_router_edges[e];
      if (!assoc.contains(l, k) && fs.x_ru(k, e) > kTol)
        bad.push_back("ul-source-cap UE " + std::to_string(k) + " nonserving RU " + std::to_string(l));
    }

    // UL sink
    for (int n = 0; n < N; ++n) {
      const double need = n == host ? d.ul_sum[k] : 0.0;
      double got = 0.0;
      for (int e : ix.rd_edges_of_du[n]) {
        got += fs.x_du(k, e);
        if (fs.x_du(k, e) > need + kTol)
          bad.push_back("ul-sink-cap UE " + std::to_string(k) + " edge " +
                        id2(topo.router_du_edges[e].first, n));
      }
      if (got < need - kTol)
        bad.push_back("ul-sink UE " + std::to_string(k) + " DU " + std::to_string(n));
    }

    // DL multicast coverage
    for (int l : assoc.clusters[k]) {
      for (int e : ix.ru_edges_of_ru[l]) {
        const int q = topo.ru_router_edges[e].second;
        double in = 0.0;
        for (int ee : ix.rd_edges_of_router[q]) in += fs.y_du(k, ee);
        for (int ee : ix.rr_in[q]) in += fs.y_rr(k, ee);
        if (fs.y_ru(k, e) > in + kTol)
          bad.push_back("dl-cover UE " + std::to_string(k) + " router " + std::to_string(q) +
                        " RU " + std::to_string(l));
      }
    }
    for (int e = 0; e < static_cast<int>(topo.router_router_edges.size()); ++e) {
      const auto& [q1, q2] = topo.router_router_edges[e];
      double in = 0.0;
      for (int ee : ix.rd_edges_of_router[q1]) in += fs.y_du(k, ee);
      for (int ee : ix.rr_in[q1]) in += fs.y_rr(k, ee);
      if (fs.y_rr(k, e) > in + kTol)
        bad.push_back("dl-cover UE " + std::to_string(k) + " relay " + id2(q1, q2));
    }

    // DL source and per-link bounds
    for (int n = 0; n < N; ++n) {
      const double need = n == host ? d.dl_scale_rate[k] : 0.0;
      double sent = 0.0;
      for (int e : ix.rd_edges_of_du[n]) {
        sent += fs.y_du(k, e);
        if (fs.y_du(k, e) > need + kTol)
          bad.push_back("dl-source-cap UE " + std::to_string(k) + " edge " +
                        id2(n, topo.router_du_edges[e].first));
      }
      if (sent < need - kTol)
        bad.push_back("dl-source UE " + std::to_string(k) + " DU " + std::to_string(n));
    }

    // DL sinks at the serving RUs
    for (int l : assoc.clusters[k]) {
      double got = 0.0;
      for (int e : ix.ru_edges_of_ru[l]) got += fs.y_ru(k, e);
      if (got < d.dl_scale_rate[k] - kTol)
        bad.push_back("dl-sink UE " + std::to_string(k) + " RU " + std::to_string(l));
    }
  }

  // Capacities
  const int n_ru_e = static_cast<int>(topo.ru_router_edges.size());
  const int n_rr_e = static_cast<int>(topo.router_router_edges.size());
  const int n_rd_e = static_cast<int>(topo.router_du_edges.size());
  auto col_sum = [&](const Eigen::MatrixXd& f, int e) {
    double s = 0.0;
    for (int k : d.served) s += f(k, e);
    return s;
  };
  if (fs.mode == DuplexMode::Full) {
    for (int e = 0; e < n_ru_e; ++e) {
      if (col_sum(fs.x_ru, e) > fs.cap_ru_ul + kTol) bad.push_back("cap-ul-ru edge " + std::to_string(e));
      if (col_sum(fs.y_ru, e) > fs.cap_ru_dl + kTol) bad.push_back("cap-dl-ru edge " + std::to_string(e));
    }
    for (int e = 0; e < n_rr_e; ++e) {
      if (col_sum(fs.x_rr, e) > fs.cap_rr_ul + kTol) bad.push_back("cap-ul-rr edge " + std::to_string(e));
      if (col_sum(fs.y_rr, e) > fs.cap_rr_dl + kTol) bad.push_back("cap-dl-rr edge " + std::to_string(e));
    }
    for (int e = 0; e < n_rd_e; ++e) {
      if (col_sum(fs.x_du, e) > fs.cap_du_ul + kTol) bad.push_back("cap-ul-du edge " + std::to_string(e));
      if (col_sum(fs.y_du, e) > fs.cap_du_dl + kTol) bad.push_back("cap-dl-du edge " + std::to_string(e));
    }
  } else {
    for (int e = 0; e < n_ru_e; ++e)
      if (col_sum(fs.x_ru, e) + col_sum(fs.y_ru, e) > fs.cap_ru + kTol)
        bad.push_back("cap-hd-ru edge " + std::to_string(e));
    for (int e = 0; e < n_rr_e; ++e)
      if (col_sum(fs.x_rr, e) + col_sum(fs.y_rr, e) > fs.cap_rr + kTol)
        bad.push_back("cap-hd-rr edge " + std::to_string(e));
    for (int e = 0; e < n_rd_e; ++e)
      if (col_sum(fs.x_du, e) + col_sum(fs.y_du, e) > fs.cap_du + kTol)
        bad.push_back("cap-hd-du edge " + std::to_string(e));
  }

  // Optional hosting limits
  if (!topo.du_capacity.empty()) {
    for (int n = 0; n < N; ++n) {
      if (!std::isfinite(topo.du_capacity[n])) continue;
      int hosted = 0;
      for (int k : d.served) hosted += fs.placement[k] == n ? 1 : 0;
      if (hosted > topo.du_capacity[n] + kTol)
        bad.push_back("du-capacity DU " + std::to_string(n));
    }
  }

  return bad;
}

FronthaulMetrics fronthaul_capacities(const FlowSolution& fs, const FlowProblemInput& input) {
  FronthaulMetrics out;
  if (fs.mode == DuplexMode::Full) {
    const double ua = 1.0 - input.alpha_dl;
    out.load_ul = ua * (input.w_ul.ru * fs.cap_ru_ul + input.w_ul.rr * fs.cap_rr_ul +
                        input.w_ul.du * fs.cap_du_ul);
    out.load_dl = input.alpha_dl * (input.w_dl.ru * fs.cap_ru_dl + input.w_dl.rr * fs.cap_rr_dl +
                                    input.w_dl.du * fs.cap_du_dl);
    out.load_total = out.load_ul + out.load_dl;
    return out;
  }

  const Demands d = make_demands(input, fs.mode);
  auto class_max = [&](const Eigen::MatrixXd& f) {
    double mx = 0.0;
    for (int e = 0; e < f.cols(); ++e) {
      double s = 0.0;
      for (int k : d.served) s += f(k, e);
      mx = std::max(mx, s);
    }
    return f.cols() > 0 ? mx : 0.0;
  };
  out.load_ul = input.w_hd.ru * class_max(fs.x_ru) + input.w_hd.rr * class_max(fs.x_rr) +
                input.w_hd.du * class_max(fs.x_du);
  out.load_dl = input.w_hd.ru * class_max(fs.y_ru) + input.w_hd.rr * class_max(fs.y_rr) +
                input.w_hd.du * class_max(fs.y_du);
  out.load_total =
      input.w_hd.ru * fs.cap_ru + input.w_hd.rr * fs.cap_rr + input.w_hd.du * fs.cap_du;
  out.hd_flow_total = out.load_ul + out.load_dl;
  out.hd_discrepancy = out.hd_flow_total - out.load_total;
  return out;
}

double brute_force_placement(const FlowProblemInput& input, DuplexMode mode,
                             const SolverOptions& opts) {
  FlowModel fm = build_model(input, mode);
  const Demands d = make_demands(input, mode);
  const int N = input.topology.num_dus;
  const int S = static_cast<int>(d.served.size());

  double combos = 1.0;
  for (int i = 0; i < S; ++i) {
    combos *= N;
    if (combos > 1e4) throw std::invalid_argument("brute_force_placement: instance too large");
  }

  double best = kInf;
  std::vector<int> assign(S, 0);
  const long total = static_cast<long>(combos);
  for (long c = 0; c < total; ++c) {
    long rem = c;
    for (int i = 0; i < S; ++i) {
      assign[i] = static_cast<int>(rem % N);
      rem /= N;
    }
    MilpModel m = fm.model;
    for (int i = 0; i < S; ++i) {
      const int k = d.served[i];
      for (int n = 0; n < N; ++n) {
        m.vars[fm.b(k, n)].kind = VarKind::Continuous;
        m.vars[fm.b(k, n)].lb = n == assign[i] ? 1.0 : 0.0;
        m.vars[fm.b(k, n)].ub = n == assign[i] ? 1.0 : 0.0;
      }
    }
    const Solution sol = solve_lp(m, opts);
    if (sol.status == SolveStatus::Optimal) best = std::min(best, sol.objective);
  }
  if (best == kInf) throw std::runtime_error("brute_force_placement: no feasible placement");
  return best;
}

FlowSolution solve_flow_problem(const FlowProblemInput& input, DuplexMode mode,
                                const SolverOptions& opts, bool tighten) {
  FlowModel fm = build_model(input, mode);
  Solution sol = solve_milp(fm.model, opts);
  if (!sol.has_incumbent) {
    FlowSolution fs;
    fs.mode = mode;
    fs.status = sol.status;
    fs.best_bound = sol.best_bound;
    fs.nodes = sol.nodes;
    return fs;
  }

  if (tighten) {
    detail::SimplexSolver solver(fm.model, opts);
    for (int j = 0; j < fm.model.num_vars(); ++j) {
      if (fm.model.vars[j].kind == VarKind::Binary)
        solver.set_var_bounds(j, std::round(sol.values[j]), std::round(sol.values[j]));
    }
    std::vector<double> costs(fm.model.num_vars(), 0.0);
    if (mode == DuplexMode::Full) {
      solver.set_var_bounds(fm.aux_max, 0.0, sol.objective + 1e-9);
      const double ua = 1.0 - input.alpha_dl;
      costs[fm.cap_ru_ul] = ua * input.w_ul.ru;
      costs[fm.cap_rr_ul] = ua * input.w_ul.rr;
      costs[fm.cap_du_ul] = ua * input.w_ul.du;
      costs[fm.cap_ru_dl] = input.alpha_dl * input.w_dl.ru;
      costs[fm.cap_rr_dl] = input.alpha_dl * input.w_dl.rr;
      costs[fm.cap_du_dl] = input.alpha_dl * input.w_dl.du;
    } else {
      costs[fm.cap_ru] = input.w_hd.ru;
      costs[fm.cap_rr] = input.w_hd.rr;
      costs[fm.cap_du] = input.w_hd.du;
    }
    solver.set_costs(costs);
    if (solver.solve() == SolveStatus::Optimal) {
      // Pin the capacities and sweep junk flow off the links.
      const Eigen::VectorXd stage_a = solver.structural_values();
      std::vector<int> caps;
      if (mode == DuplexMode::Full)
        caps = {fm.cap_ru_ul, fm.cap_rr_ul, fm.cap_du_ul, fm.cap_ru_dl, fm.cap_rr_dl, fm.cap_du_dl};
      else
        caps = {fm.cap_ru, fm.cap_rr, fm.cap_du};
      for (int cv : caps) solver.set_var_bounds(cv, 0.0, stage_a[cv] + 1e-9);
      std::vector<double> flow_costs(fm.model.num_vars(), 0.0);
      for (int j = 0; j < fm.model.num_vars(); ++j)
        if (fm.model.vars[j].kind == VarKind::Continuous) flow_costs[j] = 1.0;
      for (int cv : caps) flow_costs[cv] = 0.0;
      if (fm.aux_max >= 0) flow_costs[fm.aux_max] = 0.0;
      solver.set_costs(flow_costs);
      if (solver.solve() == SolveStatus::Optimal) {
        sol.values = solver.structural_values();
      } else {
        sol.values = stage_a;
      }
    }
  }

  FlowSolution fs = extract_solution(fm, sol, input);
  return fs;
}

namespace {

nlohmann::json weights_json(const ClassWeights& w) {
  return nlohmann::json{{"ru", w.ru}, {"rr", w.rr}, {"du", w.du}};
}

ClassWeights weights_from(const nlohmann::json& j) {
  ClassWeights w;
  w.ru = j.at("ru").get<double>();
  w.rr = j.at("rr").get<double>();
  w.du = j.at("du").get<double>();
  return w;
}

}  // namespace

nlohmann::json FlowProblemInput::to_json() const {
  nlohmann::json j;
  j["topology"] = topology.to_json();
  j["clusters"] = assoc.clusters;
  j["ul_rate_bits"] = ul_rate_bits;
  j["dl_rate_bits"] = dl_rate_bits;
  j["alpha_dl"] = alpha_dl;
  j["weights_ul"] = weights_json(w_ul);
  j["weights_dl"] = weights_json(w_dl);
  j["weights_hd"] = weights_json(w_hd);
  return j;
}

FlowProblemInput FlowProblemInput::from_json(const nlohmann::json& j) {
  FlowProblemInput in;
  in.topology = NetworkTopology::from_json(j.at("topology"));
  in.assoc = Association::from_clusters(in.topology.num_rus(), in.topology.num_ues(),
                                        j.at("clusters").get<std::vector<std::vector<int>>>());
  in.ul_rate_bits = j.at("ul_rate_bits").get<std::vector<double>>();
  in.dl_rate_bits = j.at("dl_rate_bits").get<std::vector<double>>();
  in.alpha_dl = j.at("alpha_dl").get<double>();
  in.w_ul = weights_from(j.at("weights_ul"));
  in.w_dl = weights_from(j.at("weights_dl"));
  in.w_hd = weights_from(j.at("weights_hd"));
  return in;
}

}  // namespace cfmimo
