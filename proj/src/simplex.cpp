#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfmimo/milp.hpp"

namespace cfmimo::detail {

namespace {
constexpr int kRefactorEvery = 64;
constexpr int kStallLimit = 400;  // iterations without progress before Bland kicks in
constexpr double kProgressEps = 1e-10;

struct LuHolder {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool ok = false;
};
}  // namespace

SimplexSolver::SimplexSolver(const MilpModel& model, const SolverOptions& opts) : opts_(opts) {
  n_ = model.num_vars();
  m_ = model.num_cons();
  cols_.assign(n_, {});
  for (int i = 0; i < m_; ++i)
    for (const auto& t : model.cons[i].terms)
      if (t.coef != 0.0) cols_[t.var].emplace_back(i, t.coef);
  for (auto& col : cols_) {
    std::sort(col.begin(), col.end());
    // merge duplicate row entries
    size_t w = 0;
    for (size_t r = 0; r < col.size(); ++r) {
      if (w > 0 && col[w - 1].first == col[r].first)
        col[w - 1].second += col[r].second;
      else
        col[w++] = col[r];
    }
    col.resize(w);
  }

  lb_.assign(n_ + m_, 0.0);
  ub_.assign(n_ + m_, kInf);
  for (int j = 0; j < n_; ++j) {
    lb_[j] = model.vars[j].lb;
    ub_[j] = model.vars[j].ub;
  }
  rhs_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    rhs_[i] = model.cons[i].rhs;
    switch (model.cons[i].rel) {
      case Relation::LessEqual:
        lb_[n_ + i] = 0.0;
        ub_[n_ + i] = kInf;
        break;
      case Relation::GreaterEqual:
        lb_[n_ + i] = -kInf;
        ub_[n_ + i] = 0.0;
        break;
      case Relation::Equal:
        lb_[n_ + i] = 0.0;
        ub_[n_ + i] = 0.0;
        break;
    }
  }
  cost_.assign(n_, 0.0);
  for (const auto& t : model.objective) cost_[t.var] += t.coef;
  lb0_ = lb_;
  ub0_ = ub_;
  cost0_ = cost_;
  lu_ = new LuHolder();
}

SimplexSolver::~SimplexSolver() { delete static_cast<LuHolder*>(lu_); }

void SimplexSolver::set_var_bounds(int var, double lb, double ub) {
  if (var < 0 || var >= n_) throw std::invalid_argument("set_var_bounds: bad variable");
  lb_[var] = lb;
  ub_[var] = ub;
}

void SimplexSolver::reset_bounds() {
  lb_ = lb0_;
  ub_ = ub0_;
}

void SimplexSolver::set_costs(const std::vector<double>& structural_costs) {
  if (static_cast<int>(structural_costs.size()) != n_)
    throw std::invalid_argument("set_costs: bad size");
  cost_ = structural_costs;
}

void SimplexSolver::reset_costs() { cost_ = cost0_; }

void SimplexSolver::factorize() {
  auto* holder = static_cast<LuHolder*>(lu_);
  Eigen::SparseMatrix<double> b(m_, m_);
  std::vector<Eigen::Triplet<double>> trips;
  for (int slot = 0; slot < m_; ++slot) {
    const int col = basis_[slot];
    if (col >= n_) {
      trips.emplace_back(col - n_, slot, 1.0);
    } else {
      for (const auto& [row, val] : cols_[col]) trips.emplace_back(row, slot, val);
    }
  }
  b.setFromTriplets(trips.begin(), trips.end());
  holder->lu.compute(b);
  holder->ok = holder->lu.info() == Eigen::Success;
  etas_.clear();
}

void SimplexSolver::ftran(Eigen::VectorXd& v) const {
  const auto* holder = static_cast<const LuHolder*>(lu_);
  v = holder->lu.solve(v);
  for (const auto& e : etas_) {
    const double a = v[e.row] / e.pivot;
    if (a != 0.0) {
      for (const auto& [i, val] : e.col) v[i] -= a * val;
    }
    v[e.row] = a;
  }
}

void SimplexSolver::btran(Eigen::VectorXd& v) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = 0.0;
    for (const auto& [i, val] : it->col) s += val * v[i];
    v[it->row] -= (s - v[it->row]) / it->pivot;
  }
  // adjoint() lacks a const overload in this Eigen release; the solve itself
  // leaves the factorization untouched.
  auto* holder = static_cast<LuHolder*>(lu_);
  v = holder->lu.adjoint().solve(v);
}

void SimplexSolver::compute_basic_values() {
  Eigen::VectorXd r = rhs_;
  for (int j = 0; j < n_ + m_; ++j) {
    if (vstat_[j] == kBasic) continue;
    const double x = xn_[j];
    if (x == 0.0) continue;
    if (j >= n_) {
      r[j - n_] -= x;
    } else {
      for (const auto& [row, val] : cols_[j]) r[row] -= val * x;
    }
  }
  ftran(r);
  xb_ = r;
}

double SimplexSolver::infeasibility(std::vector<int>* which) const {
  double max_viol = 0.0;
  for (int slot = 0; slot < m_; ++slot) {
    const int col = basis_[slot];
    const double x = xb_[slot];
    int flag = 0;
    double viol = 0.0;
    if (x < lb_[col] - feas_eps_) {
      flag = -1;
      viol = lb_[col] - x;
    } else if (x > ub_[col] + feas_eps_) {
      flag = 1;
      viol = x - ub_[col];
    }
    max_viol = std::max(max_viol, viol);
    if (which) (*which)[slot] = flag;
  }
  return max_viol;
}

SolveStatus SimplexSolver::solve() {
  if (static_cast<int>(vstat_.size()) == n_ + m_) {
    int basics = 0;
    for (auto s : vstat_) basics += (s == kBasic);
    if (basics == m_) return solve_from(vstat_);
  }
  std::vector<std::uint8_t> cold(n_ + m_, kAtLower);
  for (int i = 0; i < m_; ++i) cold[n_ + i] = kBasic;
  return solve_from(cold);
}

SolveStatus SimplexSolver::solve_from(const std::vector<std::uint8_t>& vstat_in) {
  if (static_cast<int>(vstat_in.size()) != n_ + m_)
    throw std::invalid_argument("solve_from: bad basis size");
  vstat_ = vstat_in;
  basis_.clear();
  basis_slot_.assign(n_ + m_, -1);
  xn_.assign(n_ + m_, 0.0);
  for (int j = 0; j < n_ + m_; ++j) {
    if (vstat_[j] == kBasic) {
      basis_slot_[j] = static_cast<int>(basis_.size());
      basis_.push_back(j);
      continue;
    }
    // Normalize stale statuses against the current bounds.
    if (lb_[j] == ub_[j]) {
      vstat_[j] = kAtLower;
    } else if (vstat_[j] == kAtLower && !std::isfinite(lb_[j])) {
      vstat_[j] = std::isfinite(ub_[j]) ? kAtUpper : kFree;
    } else if (vstat_[j] == kAtUpper && !std::isfinite(ub_[j])) {
      vstat_[j] = std::isfinite(lb_[j]) ? kAtLower : kFree;
    } else if (vstat_[j] == kFree && (std::isfinite(lb_[j]) || std::isfinite(ub_[j]))) {
      vstat_[j] = std::isfinite(lb_[j]) ? kAtLower : kAtUpper;
    }
    xn_[j] = vstat_[j] == kAtLower ? lb_[j] : (vstat_[j] == kAtUpper ? ub_[j] : 0.0);
  }
  if (static_cast<int>(basis_.size()) != m_) {
    // Unusable start, fall back to the logical basis.
    std::vector<std::uint8_t> cold(n_ + m_, kAtLower);
    for (int i = 0; i < m_; ++i) cold[n_ + i] = kBasic;
    if (vstat_in != cold) return solve_from(cold);
    throw std::runtime_error("simplex: cannot form a starting basis");
  }
  feas_eps_ = 1e-9;

  factorize();
  auto* holder = static_cast<LuHolder*>(lu_);
  if (!holder->ok) {
    std::vector<std::uint8_t> cold(n_ + m_, kAtLower);
    for (int i = 0; i < m_; ++i) cold[n_ + i] = kBasic;
    if (vstat_in != cold) return solve_from(cold);
    throw std::runtime_error("simplex: logical basis failed to factorize");
  }
  compute_basic_values();
  return iterate();
}

SolveStatus SimplexSolver::iterate() {
  const long iter_cap = opts_.iteration_limit > 0
                            ? opts_.iteration_limit
                            : 20L * (n_ + m_) + 10000L;
  long iter = 0;
  int pivots_since_refactor = 0;
  bool bland = false;
  int stall = 0;
  double last_merit = kInf;
  std::vector<int> inf_flag(m_, 0);
  Eigen::VectorXd pi(m_), work(m_);

  while (true) {
    if (iter++ > iter_cap) return SolveStatus::ResourceLimit;
    ++total_iters_;

    if (pivots_since_refactor >= kRefactorEvery) {
      factorize();
      if (!static_cast<LuHolder*>(lu_)->ok) throw std::runtime_error("simplex: refactorization failed");
      compute_basic_values();
      pivots_since_refactor = 0;
    }

    const double max_viol = infeasibility(&inf_flag);
    phase_one_ = max_viol > 0.0;

    // Merit: worst violation in phase 1, objective in phase 2.
    double merit = max_viol;
    if (!phase_one_) {
      merit = 0.0;
      for (int slot = 0; slot < m_; ++slot)
        if (basis_[slot] < n_) merit += cost_[basis_[slot]] * xb_[slot];
      for (int j = 0; j < n_; ++j)
        if (vstat_[j] != kBasic) merit += cost_[j] * xn_[j];
    }
    if (merit < last_merit - kProgressEps) {
      stall = 0;
      bland = false;
      last_merit = merit;
    } else if (++stall > kStallLimit) {
      bland = true;
    }

    // Prices under the current phase's costs.
    for (int slot = 0; slot < m_; ++slot) {
      const int col = basis_[slot];
      if (phase_one_)
        pi[slot] = static_cast<double>(inf_flag[slot]);
      else
        pi[slot] = col < n_ ? cost_[col] : 0.0;
    }
    btran(pi);

    int enter = -1;
    double best_score = 0.0;
    int enter_dir = 0;
    for (int j = 0; j < n_ + m_; ++j) {
      if (vstat_[j] == kBasic || lb_[j] == ub_[j]) continue;
      double d = phase_one_ ? 0.0 : (j < n_ ? cost_[j] : 0.0);
      if (j >= n_) {
        d -= pi[j - n_];
      } else {
        for (const auto& [row, val] : cols_[j]) d -= val * pi[row];
      }
      int dir = 0;
      if (vstat_[j] == kAtLower && d < -opts_.dual_tol)
        dir = 1;
      else if (vstat_[j] == kAtUpper && d > opts_.dual_tol)
        dir = -1;
      else if (vstat_[j] == kFree && std::fabs(d) > opts_.dual_tol)
        dir = d < 0.0 ? 1 : -1;
      if (dir == 0) continue;
      if (bland) {
        enter = j;
        enter_dir = dir;
        break;
      }
      const double score = std::fabs(d);
      if (score > best_score) {
        best_score = score;
        enter = j;
        enter_dir = dir;
      }
    }

    if (enter < 0) {
      if (phase_one_) {
        // Residual violations small enough are absorbed into the working
        // feasibility tolerance; anything larger is genuine infeasibility.
        if (max_viol <= 1e-7) {
          feas_eps_ = max_viol + 1e-12;
          continue;
        }
        return SolveStatus::Infeasible;
      }
      return SolveStatus::Optimal;
    }

    // Direction of basic change per unit of the entering variable.
    work.setZero();
    if (enter >= n_) {
      work[enter - n_] = 1.0;
    } else {
      for (const auto& [row, val] : cols_[enter]) work[row] = val;
    }
    ftran(work);
    const double sigma = static_cast<double>(enter_dir);

    double best_t = kInf;
    int leave_slot = -1;
    int leave_to_upper = 0;
    bool bound_flip = false;
    if (std::isfinite(lb_[enter]) && std::isfinite(ub_[enter])) {
      best_t = ub_[enter] - lb_[enter];
      bound_flip = true;
    }

    for (int slot = 0; slot < m_; ++slot) {
      const double w = work[slot];
      if (std::fabs(w) < opts_.pivot_tol) continue;
      const int col = basis_[slot];
      const double delta = -sigma * w;  // d x_B[slot] / dt
      double t = kInf;
      int to_upper = 0;
      if (inf_flag[slot] < 0) {
        if (delta > 0.0) t = (lb_[col] - xb_[slot]) / delta;
      } else if (inf_flag[slot] > 0) {
        if (delta < 0.0) {
          t = (ub_[col] - xb_[slot]) / delta;
          to_upper = 1;
        }
      } else if (delta < 0.0) {
        if (std::isfinite(lb_[col])) t = (xb_[slot] - lb_[col]) / (-delta);
      } else {
        if (std::isfinite(ub_[col])) {
          t = (ub_[col] - xb_[slot]) / delta;
          to_upper = 1;
        }
      }
      if (t >= kInf) continue;
      t = std::max(t, 0.0);
      bool take = false;
      if (t < best_t - 1e-12) {
        take = true;
      } else if (t <= best_t + 1e-12 && leave_slot >= 0) {
        // Tie break: stability by larger pivot, lowest index under Bland.
        take = bland ? basis_[slot] < basis_[leave_slot]
                     : std::fabs(w) > std::fabs(work[leave_slot]);
      }
      if (take) {
        best_t = std::min(best_t, t);
        leave_slot = slot;
        leave_to_upper = to_upper;
        bound_flip = false;
      }
    }

    if (!bound_flip && leave_slot < 0) {
      if (phase_one_) return SolveStatus::Infeasible;  // numerically stuck
      return SolveStatus::Unbounded;
    }

    const double t = best_t;
    // Move the basics.
    if (t != 0.0) {
      for (int slot = 0; slot < m_; ++slot) xb_[slot] -= sigma * t * work[slot];
    }

    if (bound_flip) {
      vstat_[enter] = vstat_[enter] == kAtLower ? kAtUpper : kAtLower;
      xn_[enter] = vstat_[enter] == kAtLower ? lb_[enter] : ub_[enter];
      continue;
    }

    const int leave_col = basis_[leave_slot];
    const double enter_start = xn_[enter];

    // Basis exchange.
    vstat_[leave_col] = leave_to_upper ? kAtUpper : kAtLower;
    xn_[leave_col] = leave_to_upper ? ub_[leave_col] : lb_[leave_col];
    basis_slot_[leave_col] = -1;
    basis_[leave_slot] = enter;
    basis_slot_[enter] = leave_slot;
    vstat_[enter] = kBasic;
    xb_[leave_slot] = enter_start + sigma * t;
    xn_[enter] = 0.0;

    Eta eta;
    eta.row = leave_slot;
    eta.pivot = work[leave_slot];
    for (int slot = 0; slot < m_; ++slot)
      if (work[slot] != 0.0) eta.col.emplace_back(slot, work[slot]);
    etas_.push_back(std::move(eta));
    ++pivots_since_refactor;
  }
}

double SimplexSolver::objective() const {
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) {
    const double x = vstat_[j] == kBasic ? xb_[basis_slot_[j]] : xn_[j];
    obj += cost_[j] * x;
  }
  return obj;
}

Eigen::VectorXd SimplexSolver::structural_values() const {
  Eigen::VectorXd x(n_);
  for (int j = 0; j < n_; ++j) x[j] = vstat_[j] == kBasic ? xb_[basis_slot_[j]] : xn_[j];
  return x;
}

Eigen::VectorXd SimplexSolver::duals() const {
  Eigen::VectorXd pi(m_);
  for (int slot = 0; slot < m_; ++slot) {
    const int col = basis_[slot];
    pi[slot] = col < n_ ? cost_[col] : 0.0;
  }
  btran(pi);
  return pi;
}

Eigen::VectorXd SimplexSolver::structural_reduced_costs() const {
  const Eigen::VectorXd pi = duals();
  Eigen::VectorXd d(n_);
  for (int j = 0; j < n_; ++j) {
    if (vstat_[j] == kBasic) {
      d[j] = 0.0;
      continue;
    }
    double v = cost_[j];
    for (const auto& [row, val] : cols_[j]) v -= val * pi[row];
    d[j] = v;
  }
  return d;
}

}  // namespace cfmimo::detail

namespace cfmimo {

Solution solve_lp(const MilpModel& model, const SolverOptions& opts) {
  const auto problems = model.validate();
  if (!problems.empty()) throw std::invalid_argument("solve_lp: " + problems.front());

  detail::SimplexSolver solver(model, opts);
  const SolveStatus st = solver.solve();
  Solution sol;
  sol.status = st;
  sol.iterations = solver.iterations();
  if (st == SolveStatus::Optimal) {
    sol.objective = solver.objective();
    sol.values = solver.structural_values();
    sol.duals = solver.duals();
    sol.reduced_costs = solver.structural_reduced_costs();
    sol.best_bound = sol.objective;
    sol.has_incumbent = true;
  }
  return sol;
}

}  // namespace cfmimo
