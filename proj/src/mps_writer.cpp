#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "cfmimo/milp.hpp"

namespace cfmimo {

namespace {

std::string mps_name(const std::string& name, std::unordered_set<std::string>& seen) {
  if (name.empty()) throw std::invalid_argument("export_mps: empty name");
  for (char c : name)
    if (c == ' ' || c == '\t') throw std::invalid_argument("export_mps: name contains whitespace");
  std::string t = name.size() > 8 ? name.substr(0, 8) : name;
  if (!seen.insert(t).second)
    throw std::invalid_argument("export_mps: name collision after truncation: " + t);
  return t;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// field positions: 2-3, 5-12, 15-22, 25-36, 40-47, 50-61 (1-indexed)
std::string line(const std::string& f1, const std::string& f2, const std::string& f3 = "",
                 const std::string& f4 = "", const std::string& f5 = "",
                 const std::string& f6 = "") {
  std::string s;
  auto put = [&s](size_t col, const std::string& f) {
    if (f.empty()) return;
    if (s.size() < col - 1) s.resize(col - 1, ' ');
    if (!s.empty() && s.size() > col - 1) s += ' ';
    s += f;
  };
  put(2, f1);
  put(5, f2);
  put(15, f3);
  put(25, f4);
  put(40, f5);
  put(50, f6);
  s += '\n';
  return s;
}

}  // namespace

std::string export_mps(const MilpModel& model, const std::string& model_name) {
  const auto problems = model.validate();
  if (!problems.empty()) throw std::invalid_argument("export_mps: " + problems.front());

  std::unordered_set<std::string> row_seen, col_seen;
  std::vector<std::string> row_names(model.num_cons());
  std::vector<std::string> col_names(model.num_vars());
  row_seen.insert("COST");
  for (int i = 0; i < model.num_cons(); ++i) row_names[i] = mps_name(model.cons[i].name, row_seen);
  for (int j = 0; j < model.num_vars(); ++j) col_names[j] = mps_name(model.vars[j].name, col_seen);

  std::string out;
  out += "NAME          " + model_name + "\n";
  out += "ROWS\n";
  out += line("N", "COST");
  for (int i = 0; i < model.num_cons(); ++i) {
    const char* rel = model.cons[i].rel == Relation::LessEqual
                          ? "L"
                          : (model.cons[i].rel == Relation::Equal ? "E" : "G");
    out += line(rel, row_names[i]);
  }

  // column-major entries: objective first, then rows in constraint order
  std::vector<double> obj_coef(model.num_vars(), 0.0);
  for (const auto& t : model.objective) obj_coef[t.var] += t.coef;
  std::vector<std::vector<std::pair<int, double>>> col_rows(model.num_vars());
  for (int i = 0; i < model.num_cons(); ++i) {
    std::unordered_map<int, double> agg;
    for (const auto& t : model.cons[i].terms) agg[t.var] += t.coef;
    for (const auto& [var, coef] : agg)
      if (coef != 0.0) col_rows[var].emplace_back(i, coef);
  }
  for (auto& rows : col_rows) std::sort(rows.begin(), rows.end());

  out += "COLUMNS\n";
  bool in_int = false;
  int marker_count = 0;
  for (int j = 0; j < model.num_vars(); ++j) {
    const bool is_int = model.vars[j].kind == VarKind::Binary;
    if (is_int && !in_int) {
      out += line("", "MARKER" + std::to_string(marker_count++), "'MARKER'", "'INTORG'");
      in_int = true;
    } else if (!is_int && in_int) {
      out += line("", "MARKER" + std::to_string(marker_count++), "'MARKER'", "'INTEND'");
      in_int = false;
    }
    if (obj_coef[j] != 0.0) out += line("", col_names[j], "COST", num(obj_coef[j]));
    for (const auto& [row, coef] : col_rows[j])
      out += line("", col_names[j], row_names[row], num(coef));
  }
  if (in_int) out += line("", "MARKER" + std::to_string(marker_count++), "'MARKER'", "'INTEND'");

  out += "RHS\n";
  for (int i = 0; i < model.num_cons(); ++i)
    if (model.cons[i].rhs != 0.0) out += line("", "RHS", row_names[i], num(model.cons[i].rhs));

  out += "BOUNDS\n";
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.vars[j];
    if (v.kind == VarKind::Binary) {
      out += line("BV", "BND", col_names[j]);
      continue;
    }
    const bool lb_fin = std::isfinite(v.lb);
    const bool ub_fin = std::isfinite(v.ub);
    if (lb_fin && ub_fin && v.lb == v.ub) {
      out += line("FX", "BND", col_names[j], num(v.lb));
      continue;
    }
    if (!lb_fin && !ub_fin) {
      out += line("FR", "BND", col_names[j]);
      continue;
    }
    if (!lb_fin) out += line("MI", "BND", col_names[j]);
    if (lb_fin && v.lb != 0.0) out += line("LO", "BND", col_names[j], num(v.lb));
    if (ub_fin) out += line("UP", "BND", col_names[j], num(v.ub));
  }
  out += "ENDATA\n";
  return out;
}

}  // namespace cfmimo
