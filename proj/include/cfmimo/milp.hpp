#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cfmimo {

enum class VarKind { Continuous, Binary };
enum class Relation { LessEqual, Equal, GreaterEqual };

struct LinearTerm {
  int var = -1;
  double coef = 0.0;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Generic linear model, objective sense is always minimize.
struct MilpModel {
  struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lb = 0.0;
    double ub = kInf;
  };
  struct Constraint {
    std::string name;
    std::vector<LinearTerm> terms;
    Relation rel = Relation::LessEqual;
    double rhs = 0.0;
  };

  std::vector<Variable> vars;
  std::vector<Constraint> cons;
  std::vector<LinearTerm> objective;

  int add_continuous(const std::string& name, double lb = 0.0, double ub = kInf);
  int add_binary(const std::string& name);
  int add_constraint(const std::string& name, std::vector<LinearTerm> terms, Relation rel,
                     double rhs);
  void set_objective(std::vector<LinearTerm> terms);

  int num_vars() const { return static_cast<int>(vars.size()); }
  int num_cons() const { return static_cast<int>(cons.size()); }
  int num_binaries() const;

  // Structural problems: dangling variable references, bad bounds, duplicate
  // names. Empty result means well-formed.
  std::vector<std::string> validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, ResourceLimit };

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd values;         // per variable
  Eigen::VectorXd duals;          // per constraint (LP solves)
  Eigen::VectorXd reduced_costs;  // per variable (LP solves)
  double best_bound = -kInf;      // proven lower bound (branch and bound)
  long nodes = 0;
  long iterations = 0;
  bool has_incumbent = false;
};

struct SolverOptions {
  double feas_tol = 1e-6;       // row feasibility for checks
  double dual_tol = 1e-7;       // reduced-cost optimality tolerance
  double int_tol = 1e-6;        // binary integrality tolerance
  double pivot_tol = 1e-9;      // minimum pivot magnitude
  long node_limit = 1'000'000;  // branch and bound nodes
  double time_limit_s = 0.0;    // 0 = unlimited
  long iteration_limit = 0;     // per LP solve, 0 = automatic
};

// Primal simplex on the bound-relaxed model (binaries become [0,1]).
Solution solve_lp(const MilpModel& model, const SolverOptions& opts = {});

// Exact best-first branch and bound over the binary variables, branching on
// the most fractional one. On the node limit the incumbent (if any) is
// returned with status ResourceLimit and the proven bound.
Solution solve_milp(const MilpModel& model, const SolverOptions& opts = {});

// Re-evaluates every row, bound, and binary against the given point.
std::vector<std::string> check_solution(const MilpModel& model, const Eigen::VectorXd& x,
                                        double tol = 1e-6);

// Fixed-format MPS with INTORG/INTEND markers around binaries. Names must be
// at most 8 characters after truncation; collisions raise.
std::string export_mps(const MilpModel& model, const std::string& model_name = "CFMODEL");

namespace detail {

// Bounded-variable revised primal simplex over the columns of a MilpModel
// plus one logical column per row. Supports warm starting from a previous
// basis (stored as per-column statuses) and in-place cost/bound changes, so
// branch and bound and lexicographic re-solves avoid rebuilding the matrix.
class SimplexSolver {
 public:
  enum VStat : std::uint8_t { kAtLower = 0, kAtUpper = 1, kFree = 2, kBasic = 3 };

  SimplexSolver(const MilpModel& model, const SolverOptions& opts);

  void set_var_bounds(int var, double lb, double ub);
  void reset_bounds();  // back to the model's (relaxed) bounds
  void set_costs(const std::vector<double>& structural_costs);
  void reset_costs();

  SolveStatus solve();
  SolveStatus solve_from(const std::vector<std::uint8_t>& vstat);

  double objective() const;
  Eigen::VectorXd structural_values() const;
  Eigen::VectorXd duals() const;
  Eigen::VectorXd structural_reduced_costs() const;
  const std::vector<std::uint8_t>& basis_snapshot() const { return vstat_; }
  long iterations() const { return total_iters_; }
  int num_structural() const { return n_; }
  double lower_bound(int var) const { return lb_[var]; }
  double upper_bound(int var) const { return ub_[var]; }

 private:
  struct Eta {
    int row;
    double pivot;
    std::vector<std::pair<int, double>> col;  // nonzeros of the direction
  };

  void factorize();
  void compute_basic_values();
  void ftran(Eigen::VectorXd& v) const;
  void btran(Eigen::VectorXd& v) const;
  double infeasibility(std::vector<int>* which = nullptr) const;
  SolveStatus iterate();

  int n_ = 0;  // structural columns
  int m_ = 0;  // rows == logical columns
  std::vector<std::vector<std::pair<int, double>>> cols_;  // structural, row-index/value
  std::vector<double> lb_, ub_;      // n_ + m_ working bounds
  std::vector<double> lb0_, ub0_;    // pristine bounds
  std::vector<double> cost_;         // structural objective
  std::vector<double> cost0_;
  Eigen::VectorXd rhs_;
  SolverOptions opts_;

  std::vector<int> basis_;            // column in each basis slot
  std::vector<int> basis_slot_;       // column -> slot or -1
  std::vector<std::uint8_t> vstat_;   // per column
  Eigen::VectorXd xb_;                // basic values per slot
  std::vector<double> xn_;            // nonbasic values per column

  void* lu_ = nullptr;  // Eigen::SparseLU, type-erased to keep the header light
  std::vector<Eta> etas_;
  long total_iters_ = 0;
  bool phase_one_ = false;
  double feas_eps_ = 1e-9;  // working bound-violation tolerance

 public:
  ~SimplexSolver();
  SimplexSolver(const SimplexSolver&) = delete;
  SimplexSolver& operator=(const SimplexSolver&) = delete;
};

}  // namespace detail

}  // namespace cfmimo
