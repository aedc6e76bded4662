#include "cfmimo/milp.hpp"

#include <cmath>
#include <unordered_set>

namespace cfmimo {

int MilpModel::add_continuous(const std::string& name, double lb, double ub) {
  vars.push_back({name, VarKind::Continuous, lb, ub});
  return static_cast<int>(vars.size()) - 1;
}

int MilpModel::add_binary(const std::string& name) {
  vars.push_back({name, VarKind::Binary, 0.0, 1.0});
  return static_cast<int>(vars.size()) - 1;
}

int MilpModel::add_constraint(const std::string& name, std::vector<LinearTerm> terms,
                              Relation rel, double rhs) {
  cons.push_back({name, std::move(terms), rel, rhs});
  return static_cast<int>(cons.size()) - 1;
}

void MilpModel::set_objective(std::vector<LinearTerm> terms) { objective = std::move(terms); }

int MilpModel::num_binaries() const {
  int n = 0;
  for (const auto& v : vars)
    if (v.kind == VarKind::Binary) ++n;
  return n;
}

std::vector<std::string> MilpModel::validate() const {
  std::vector<std::string> bad;
  std::unordered_set<std::string> names;
  for (int j = 0; j < num_vars(); ++j) {
    const auto& v = vars[j];
    if (!names.insert(v.name).second) bad.push_back("duplicate variable name " + v.name);
    if (v.kind == VarKind::Binary && (v.lb != 0.0 || v.ub != 1.0))
      bad.push_back("binary variable " + v.name + " without [0,1] bounds");
    if (v.lb > v.ub) bad.push_back("variable " + v.name + " has empty bound interval");
  }
  std::unordered_set<std::string> rnames;
  for (const auto& c : cons) {
    if (!rnames.insert(c.name).second) bad.push_back("duplicate constraint name " + c.name);
    for (const auto& t : c.terms)
      if (t.var < 0 || t.var >= num_vars())
        bad.push_back("constraint " + c.name + " references unknown variable");
  }
  for (const auto& t : objective)
    if (t.var < 0 || t.var >= num_vars()) bad.push_back("objective references unknown variable");
  return bad;
}

std::vector<std::string> check_solution(const MilpModel& model, const Eigen::VectorXd& x,
                                        double tol) {
  std::vector<std::string> bad;
  if (x.size() != model.num_vars()) {
    bad.push_back("solution dimension mismatch");
    return bad;
  }
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.vars[j];
    if (x[j] < v.lb - tol || x[j] > v.ub + tol)
      bad.push_back("variable " + v.name + " out of bounds");
    if (v.kind == VarKind::Binary && std::fabs(x[j] - std::round(x[j])) > tol)
      bad.push_back("binary variable " + v.name + " fractional");
  }
  for (const auto& c : model.cons) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[t.var];
    const double resid = lhs - c.rhs;
    const bool ok = (c.rel == Relation::LessEqual && resid <= tol) ||
                    (c.rel == Relation::Equal && std::fabs(resid) <= tol) ||
                    (c.rel == Relation::GreaterEqual && resid >= -tol);
    if (!ok) bad.push_back("constraint " + c.name + " violated by " + std::to_string(resid));
  }
  return bad;
}

}  // namespace cfmimo
