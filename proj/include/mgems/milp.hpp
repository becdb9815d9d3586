#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mgems/common.hpp"
#include "mgems/pwl.hpp"

// MILP problem container plus a deterministic text interchange format. The
// format is lossless (%.17g) and fully ordered, so exporting the same model
// twice yields identical bytes and an import/export cycle is the identity.

namespace mgems {

enum class RowSense { le, eq, ge };

struct MilpVar {
  std::string name;
  double lo = 0.0;
  double up = 0.0;
  bool is_binary = false;
};

struct MilpRow {
  std::string name;
  RowSense sense = RowSense::le;
  double rhs = 0.0;
  std::vector<std::pair<int, double>> coef;  // sorted by variable id, unique
};

struct MilpModel {
  std::string name = "model";
  std::vector<MilpVar> vars;
  std::vector<MilpRow> rows;
  std::vector<double> obj;   // objective coefficient per variable
  double obj_offset = 0.0;   // constant term carried into reported objectives

  int add_var(const std::string& vname, double lo, double up, bool binary) {
    vars.push_back({vname, lo, up, binary});
    obj.push_back(0.0);
    return static_cast<int>(vars.size()) - 1;
  }

  void add_obj(int var, double coef) { obj[var] += coef; }

  int add_row(const std::string& rname, RowSense sense, double rhs,
              std::vector<std::pair<int, double>> coef) {
    std::sort(coef.begin(), coef.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<int, double>> merged;
    for (const auto& [id, c] : coef) {
      if (!merged.empty() && merged.back().first == id)
        merged.back().second += c;
      else
        merged.emplace_back(id, c);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const auto& p) { return p.second == 0.0; }),
                 merged.end());
    rows.push_back({rname, sense, rhs, std::move(merged)});
    return static_cast<int>(rows.size()) - 1;
  }

  int n_vars() const { return static_cast<int>(vars.size()); }
  int n_rows() const { return static_cast<int>(rows.size()); }
  int n_binary() const {
    int k = 0;
    for (const auto& v : vars) k += v.is_binary;
    return k;
  }

  void validate() const {
    for (int j = 0; j < n_vars(); ++j) {
      const auto& v = vars[j];
      if (!std::isfinite(v.lo) || !std::isfinite(v.up))
        throw std::invalid_argument("milp: variable " + v.name + " lacks finite bounds");
      if (v.lo > v.up + 1e-12)
        throw std::invalid_argument("milp: variable " + v.name + " has empty bound interval");
      if (v.is_binary && (v.lo < -1e-12 || v.up > 1.0 + 1e-12))
        throw std::invalid_argument("milp: binary " + v.name + " has bounds outside [0,1]");
      if (!std::isfinite(obj[j]))
        throw std::invalid_argument("milp: non-finite objective coefficient on " + v.name);
    }
    for (const auto& r : rows) {
      if (!std::isfinite(r.rhs))
        throw std::invalid_argument("milp: non-finite rhs in row " + r.name);
      int prev = -1;
      for (const auto& [id, c] : r.coef) {
        if (id < 0 || id >= n_vars())
          throw std::invalid_argument("milp: row " + r.name + " references unknown variable");
        if (id <= prev)
          throw std::invalid_argument("milp: row " + r.name + " has unsorted coefficients");
        if (!std::isfinite(c))
          throw std::invalid_argument("milp: non-finite coefficient in row " + r.name);
        prev = id;
      }
    }
    if (!std::isfinite(obj_offset))
      throw std::invalid_argument("milp: non-finite objective offset");
  }
};

enum class SolveStatus {
  optimal,
  feasible_with_gap,
  infeasible,
  unbounded,
  time_limit,
  numerical_failure,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible_with_gap: return "feasible-with-gap";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::time_limit: return "time-limit";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "?";
}

struct MilpSolution {
  SolveStatus status = SolveStatus::infeasible;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double bound = -kInf;  // proven lower bound (minimization)
  double gap = std::numeric_limits<double>::quiet_NaN();
  long node_count = 0;
  long pivot_count = 0;
  double wall_time_s = 0.0;

  bool has_solution() const {
    return status == SolveStatus::optimal || status == SolveStatus::feasible_with_gap;
  }
};

inline double relative_gap(double objective, double bound) {
  if (!std::isfinite(objective) || !std::isfinite(bound)) return kInf;
  return std::max(0.0, (objective - bound) / std::max(1.0, std::fabs(objective)));
}

// ---- deterministic text format ----
//
//   MILPTEXT 1
//   name <model name, may contain spaces>
//   vars <N>
//   var <id> <name> <lo> <up> <bin|cont>
//   obj_offset <c>
//   obj <nnz> { <id> <coef> }...
//   rows <M>
//   row <name> <le|eq|ge> <rhs> <nnz> { <id> <coef> }...
//   end
//
// Variable and row names must be whitespace-free (writers here only emit such
// names); the model name line takes the rest of the line verbatim.

inline std::string export_model_text(const MilpModel& m) {
  std::ostringstream out;
  out << "MILPTEXT 1\n";
  out << "name " << m.name << "\n";
  out << "vars " << m.n_vars() << "\n";
  for (int j = 0; j < m.n_vars(); ++j) {
    const auto& v = m.vars[j];
    out << "var " << j << " " << v.name << " " << fmt_double(v.lo) << " "
        << fmt_double(v.up) << " " << (v.is_binary ? "bin" : "cont") << "\n";
  }
  out << "obj_offset " << fmt_double(m.obj_offset) << "\n";
  int nnz = 0;
  for (int j = 0; j < m.n_vars(); ++j) nnz += m.obj[j] != 0.0;
  out << "obj " << nnz;
  for (int j = 0; j < m.n_vars(); ++j)
    if (m.obj[j] != 0.0) out << " " << j << " " << fmt_double(m.obj[j]);
  out << "\n";
  out << "rows " << m.n_rows() << "\n";
  for (const auto& r : m.rows) {
    const char* sense = r.sense == RowSense::le ? "le" : r.sense == RowSense::eq ? "eq" : "ge";
    out << "row " << r.name << " " << sense << " " << fmt_double(r.rhs) << " "
        << r.coef.size();
    for (const auto& [id, c] : r.coef) out << " " << id << " " << fmt_double(c);
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

inline void export_model_file(const MilpModel& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("milp: cannot open " + path + " for writing");
  f << export_model_text(m);
}

inline MilpModel import_model_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto fail = [](const std::string& msg) -> void {
    throw std::invalid_argument("milp import: " + msg);
  };
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      if (!line.empty()) return;
    }
    fail(std::string("unexpected end of input, wanted ") + what);
  };

  next_line("header");
  if (line != "MILPTEXT 1") fail("bad header '" + line + "'");
  MilpModel m;

  next_line("name");
  if (line.rfind("name ", 0) != 0) fail("expected name line");
  m.name = line.substr(5);

  next_line("vars");
  int nvars = 0;
  if (std::sscanf(line.c_str(), "vars %d", &nvars) != 1 || nvars < 0)
    fail("bad vars line");
  for (int j = 0; j < nvars; ++j) {
    next_line("var");
    std::istringstream ls(line);
    std::string tag, vname, kind;
    int id;
    double lo, up;
    if (!(ls >> tag >> id >> vname >> lo >> up >> kind) || tag != "var" || id != j)
      fail("bad var line '" + line + "'");
    if (kind != "bin" && kind != "cont") fail("bad var kind in '" + line + "'");
    m.add_var(vname, lo, up, kind == "bin");
  }

  next_line("obj_offset");
  {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag >> m.obj_offset) || tag != "obj_offset") fail("bad obj_offset line");
  }
  next_line("obj");
  {
    std::istringstream ls(line);
    std::string tag;
    int nnz;
    if (!(ls >> tag >> nnz) || tag != "obj" || nnz < 0) fail("bad obj line");
    for (int k = 0; k < nnz; ++k) {
      int id;
      double c;
      if (!(ls >> id >> c)) fail("truncated obj line");
      if (id < 0 || id >= nvars) fail("objective references unknown variable");
      m.obj[id] = c;
    }
  }

  next_line("rows");
  int nrows = 0;
  if (std::sscanf(line.c_str(), "rows %d", &nrows) != 1 || nrows < 0)
    fail("bad rows line");
  for (int i = 0; i < nrows; ++i) {
    next_line("row");
    std::istringstream ls(line);
    std::string tag, rname, sense;
    double rhs;
    int nnz;
    if (!(ls >> tag >> rname >> sense >> rhs >> nnz) || tag != "row" || nnz < 0)
      fail("bad row line '" + line + "'");
    RowSense s;
    if (sense == "le")
      s = RowSense::le;
    else if (sense == "eq")
      s = RowSense::eq;
    else if (sense == "ge")
      s = RowSense::ge;
    else {
      fail("bad row sense in '" + line + "'");
      s = RowSense::le;
    }
    std::vector<std::pair<int, double>> coef;
    coef.reserve(nnz);
    for (int k = 0; k < nnz; ++k) {
      int id;
      double c;
      if (!(ls >> id >> c)) fail("truncated row line '" + line + "'");
      coef.emplace_back(id, c);
    }
    m.add_row(rname, s, rhs, std::move(coef));
  }

  next_line("end");
  if (line != "end") fail("missing end marker");
  m.validate();
  return m;
}

inline MilpModel import_model_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("milp: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return import_model_text(ss.str());
}

// Convenience used by the formulation layer: attach the epigraph rows of a
// PWL curve to model variables x (argument) and z (cost carrier).
inline void add_pwl_epigraph(MilpModel& m, const PwlCurve& curve, int x_var, int z_var,
                             const std::string& row_prefix) {
  auto rows = pwl_epigraph_rows(curve);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    m.add_row(row_prefix + "_s" + std::to_string(k), RowSense::le, rows[k].rhs,
              {{x_var, rows[k].x_coef}, {z_var, -1.0}});
  }
}

}  // namespace mgems
