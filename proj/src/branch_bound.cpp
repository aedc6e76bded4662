#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "cfmimo/milp.hpp"

namespace cfmimo {

namespace {

struct Node {
  double bound = -kInf;
  long id = 0;
  std::vector<std::pair<int, int>> fixings;  // (binary var, 0/1)
  std::vector<std::uint8_t> warm;            // parent basis, may be empty
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

constexpr size_t kWarmStorePqCap = 4096;  // stop storing bases when the queue is this deep

void apply_fixings(detail::SimplexSolver& solver, const std::vector<std::pair<int, int>>& fixings) {
  solver.reset_bounds();
  for (const auto& [var, val] : fixings)
    solver.set_var_bounds(var, static_cast<double>(val), static_cast<double>(val));
}

}  // namespace

Solution solve_milp(const MilpModel& model, const SolverOptions& opts) {
  const auto problems = model.validate();
  if (!problems.empty()) throw std::invalid_argument("solve_milp: " + problems.front());

  std::vector<int> binaries;
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.vars[j].kind == VarKind::Binary) binaries.push_back(j);

  detail::SimplexSolver solver(model, opts);
  const auto t_start = std::chrono::steady_clock::now();
  auto out_of_time = [&]() {
    if (opts.time_limit_s <= 0.0) return false;
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t_start;
    return dt.count() > opts.time_limit_s;
  };

  Solution best;
  best.status = SolveStatus::Infeasible;
  best.objective = kInf;
  double incumbent = kInf;
  long nodes = 0;
  long next_id = 1;

  auto most_fractional = [&](const Eigen::VectorXd& x) {
    int pick = -1;
    double best_frac = opts.int_tol;
    for (int j : binaries) {
      const double f = std::fabs(x[j] - std::round(x[j]));
      if (f > best_frac + 1e-15) {
        best_frac = f;
        pick = j;
      }
    }
    return pick;
  };

  auto try_rounding_dive = [&](const Eigen::VectorXd& x,
                               const std::vector<std::pair<int, int>>& fixings) {
    std::vector<std::pair<int, int>> dive = fixings;
    for (int j : binaries) dive.emplace_back(j, x[j] >= 0.5 ? 1 : 0);
    apply_fixings(solver, dive);
    if (solver.solve() != SolveStatus::Optimal) return;
    const double obj = solver.objective();
    if (obj < incumbent - 1e-9) {
      incumbent = obj;
      best.objective = obj;
      best.values = solver.structural_values();
      best.has_incumbent = true;
    }
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push({-kInf, 0, {}, {}});
  double last_popped_bound = -kInf;
  bool limit_hit = false;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (node.bound >= incumbent - 1e-9) continue;  // nothing better below this subtree
    if (nodes >= opts.node_limit || out_of_time()) {
      limit_hit = true;
      last_popped_bound = node.bound;
      break;
    }
    ++nodes;
    last_popped_bound = std::max(last_popped_bound, node.bound);

    apply_fixings(solver, node.fixings);
    SolveStatus st;
    if (node.warm.empty())
      st = solver.solve();
    else
      st = solver.solve_from(node.warm);

    if (st == SolveStatus::Infeasible) continue;
    if (st == SolveStatus::Unbounded) {
      if (node.fixings.empty() && !best.has_incumbent) {
        best.status = SolveStatus::Unbounded;
        best.nodes = nodes;
        return best;
      }
      continue;
    }
    if (st == SolveStatus::ResourceLimit) {
      limit_hit = true;
      break;
    }

    const double obj = solver.objective();
    if (obj >= incumbent - 1e-9) continue;
    const Eigen::VectorXd x = solver.structural_values();
    const int branch_var = most_fractional(x);

    if (branch_var < 0) {
      incumbent = obj;
      best.objective = obj;
      best.values = x;
      best.has_incumbent = true;
      continue;
    }

    const std::vector<std::uint8_t> snapshot =
        open.size() < kWarmStorePqCap ? solver.basis_snapshot() : std::vector<std::uint8_t>{};

    if (nodes == 1 || nodes % 32 == 0) try_rounding_dive(x, node.fixings);

    for (int val : {0, 1}) {
      Node child;
      child.bound = obj;
      child.id = next_id++;
      child.fixings = node.fixings;
      child.fixings.emplace_back(branch_var, val);
      child.warm = snapshot;
      if (child.bound < incumbent - 1e-9) open.push(std::move(child));
    }
  }

  best.nodes = nodes;
  best.iterations = solver.iterations();
  if (limit_hit) {
    best.status = SolveStatus::ResourceLimit;
    double bound = last_popped_bound;
    if (!open.empty()) bound = std::min(bound, open.top().bound);
    best.best_bound = std::min(bound, incumbent);
    return best;
  }
  if (best.has_incumbent) {
    best.status = SolveStatus::Optimal;
    best.best_bound = best.objective;
  } else {
    best.status = SolveStatus::Infeasible;
  }
  return best;
}

}  // namespace cfmimo
