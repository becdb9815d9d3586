#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "mgems/branch_and_bound.hpp"
#include "mgems/config.hpp"
#include "mgems/formulation.hpp"
#include "mgems/rng.hpp"
#include "mgems/uc.hpp"

// Shared fixtures for the test binaries: a deterministic random-MILP
// generator, an exhaustive-enumeration MIP oracle, a run-length oracle for
// minimum on/off feasibility, and small handcrafted grid configurations.

namespace mgems::testing {

// Deterministic small MILP. Binaries biased toward few; all bounds finite. A
// feasible reference point is planted with high probability so most instances
// are feasible, but infeasible ones remain possible and are valid test cases.
inline MilpModel make_random_milp(std::uint64_t seed, int max_bin = 12,
                                  int max_cont = 30) {
  std::uint64_t ctr = 0;
  auto u = [&]() { return keyed_u01(seed, ++ctr, 31, 77); };

  MilpModel m;
  m.name = "rand" + std::to_string(seed);
  int nb = 1 + static_cast<int>(std::pow(u(), 1.7) * max_bin);
  nb = std::min(nb, max_bin);
  int nc = static_cast<int>(u() * (max_cont + 1));
  nc = std::min(nc, max_cont);
  if (nb >= 10) nc = std::min(nc, 10);

  std::vector<double> ref;
  for (int j = 0; j < nb; ++j) {
    m.add_var("b" + std::to_string(j), 0.0, 1.0, true);
    ref.push_back(u() < 0.5 ? 0.0 : 1.0);
  }
  for (int j = 0; j < nc; ++j) {
    double lo = -5.0 * u();
    double up = lo + 0.5 + 10.0 * u();
    m.add_var("x" + std::to_string(j), lo, up, false);
    ref.push_back(lo + (up - lo) * u());
  }
  int n = nb + nc;
  for (int j = 0; j < n; ++j)
    if (u() < 0.8) m.add_obj(j, -10.0 + 20.0 * u());
  m.obj_offset = -5.0 + 10.0 * u();

  int nr = 1 + static_cast<int>(u() * (n + 2));
  for (int r = 0; r < nr; ++r) {
    std::vector<std::pair<int, double>> coefs;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (u() < std::min(1.0, 3.5 / n)) {
        double c = -5.0 + 10.0 * u();
        if (c == 0.0) continue;
        coefs.push_back({j, c});
        act += c * ref[j];
      }
    }
    if (coefs.empty()) continue;
    double roll = u();
    RowSense sense = roll < 0.4 ? RowSense::le : roll < 0.8 ? RowSense::ge : RowSense::eq;
    double rhs;
    if (sense == RowSense::eq) {
      rhs = act;
    } else {
      double slack = 3.0 * u();
      bool satisfy = u() < 0.85;
      if (sense == RowSense::le)
        rhs = satisfy ? act + slack : act - 0.1 - slack;
      else
        rhs = satisfy ? act - slack : act + 0.1 + slack;
    }
    m.add_row("r" + std::to_string(r), sense, rhs, coefs);
  }
  m.validate();
  return m;
}

struct EnumResult {
  bool feasible = false;
  double objective = kInf;
};

// Exhaustive oracle: every binary assignment, continuous part by LP (or by
// direct row evaluation when there is none).
inline EnumResult enum_mip_oracle(const MilpModel& model) {
  int nb = 0;
  std::vector<int> bin_ids;
  for (int j = 0; j < model.n_vars(); ++j)
    if (model.vars[j].is_binary) bin_ids.push_back(j);
  nb = static_cast<int>(bin_ids.size());
  bool pure_binary = nb == model.n_vars();

  EnumResult best;
  for (long mask = 0; mask < (1L << nb); ++mask) {
    std::vector<double> x(model.n_vars(), 0.0);
    bool ok = true;
    for (int k = 0; k < nb; ++k) {
      double val = (mask >> k) & 1 ? 1.0 : 0.0;
      const MilpVar& v = model.vars[bin_ids[k]];
      if (val < v.lo - 1e-9 || val > v.up + 1e-9) {
        ok = false;
        break;
      }
      x[bin_ids[k]] = val;
    }
    if (!ok) continue;

    if (pure_binary) {
      for (const auto& r : model.rows) {
        double act = 0.0;
        for (const auto& [id, c] : r.coef) act += c * x[id];
        if (r.sense == RowSense::le && act > r.rhs + 1e-9) ok = false;
        if (r.sense == RowSense::ge && act < r.rhs - 1e-9) ok = false;
        if (r.sense == RowSense::eq && std::fabs(act - r.rhs) > 1e-9) ok = false;
        if (!ok) break;
      }
      if (!ok) continue;
      double obj = model.obj_offset;
      for (int j = 0; j < model.n_vars(); ++j) obj += model.obj[j] * x[j];
      best.feasible = true;
      best.objective = std::min(best.objective, obj);
    } else {
      MilpModel fixed = model;
      for (int k = 0; k < nb; ++k) {
        fixed.vars[bin_ids[k]].lo = x[bin_ids[k]];
        fixed.vars[bin_ids[k]].up = x[bin_ids[k]];
      }
      MilpSolution s = solve_lp(fixed);
      if (s.status == SolveStatus::optimal) {
        best.feasible = true;
        best.objective = std::min(best.objective, s.objective);
      }
    }
  }
  return best;
}

// Direct run-length semantics of minimum on/off times: every completed run
// must meet its minimum; the trailing run (cut by the horizon) is exempt.
inline bool min_run_pattern_ok(const std::vector<int>& u, int t_on_min, int t_off_min,
                               const CgState& boundary) {
  int cur = boundary.u_prev;
  int len = cur ? boundary.t_on : boundary.t_off;
  for (int value : u) {
    if (value != cur) {
      if (cur == 1 && len < t_on_min) return false;
      if (cur == 0 && len < t_off_min) return false;
      cur = value;
      len = 1;
    } else {
      ++len;
    }
  }
  return true;
}

// Single generator, no storage, negligible demand: the only nontrivial
// feasibility content of the grid model is the commitment-pattern logic.
inline MicrogridConfig tiny_cfg_1cg(int t_on_min, int t_off_min) {
  MicrogridConfig c = default_config();
  c.cgs.resize(1);
  c.cg_init.resize(1);
  c.cgs[0].t_on_min = t_on_min;
  c.cgs[0].t_off_min = t_off_min;
  c.esses.clear();
  c.ess_init.clear();
  c.qos.reserve_req = 0.0;
  c.qos.emission_cap = 1e9;
  c.qos.d_e_min = 1e-9;
  c.market.p_p_max = 5000.0;
  c.market.p_s_max = 5000.0;
  c.validate();
  return c;
}

inline SlotObservation exact_obs(double d_ie, double d_e, double p_rg) {
  SlotObservation o;
  o.d_ie = o.d_ie_hat = d_ie;
  o.d_e = o.d_e_hat = d_e;
  o.p_rg = o.p_rg_hat = p_rg;
  return o;
}

// Intersect a variable's bounds with a 0/1 fixing. Returns false when the
// fixing contradicts bounds already pinned by the builder (model infeasible).
inline bool fix_binary(MilpModel& m, int id, int value) {
  MilpVar& v = m.vars[id];
  double lo = std::max(v.lo, static_cast<double>(value));
  double up = std::min(v.up, static_cast<double>(value));
  if (lo > up + 0.5) return false;
  v.lo = lo;
  v.up = up;
  return true;
}

// Feasibility verdict of the emitted commitment rows for one fixed pattern,
// via the LP relaxation of the pattern-fixed grid model.
inline bool pattern_rows_feasible(const MicrogridConfig& cfg, const std::vector<int>& pat) {
  Linearization lin = make_linearization(cfg);
  std::vector<SlotInputs> slots(pat.size());
  for (std::size_t t = 0; t < pat.size(); ++t)
    slots[t] = {exact_obs(0.0, 1e-9, 0.0), static_cast<int>(t), cfg.qos.alpha_max};
  GridProblem gp = build_grid_milp(cfg, lin, slots, cfg.cg_init, cfg.ess_init);
  for (std::size_t t = 0; t < pat.size(); ++t)
    if (!fix_binary(gp.model, gp.lay.u(0, static_cast<int>(t)), pat[t])) return false;
  MilpSolution s = solve_lp(gp.model);
  if (s.status == SolveStatus::numerical_failure || s.status == SolveStatus::unbounded)
    throw SolverError("pattern feasibility probe failed: " +
                      std::string(to_string(s.status)));
  return s.status == SolveStatus::optimal;
}

// Two generators, no storage, tight trade caps: commitment patterns stay
// enumerable while both units still matter.
inline MicrogridConfig two_cg_cfg() {
  MicrogridConfig c = default_config();
  c.cgs.resize(2);
  c.cg_init.resize(2);
  c.esses.clear();
  c.ess_init.clear();
  c.market.p_p_max = 200.0;
  c.market.p_s_max = 200.0;
  c.budgets.uc_gap_target = 0.0;
  c.budgets.uc_node_limit = 200000;
  c.validate();
  return c;
}

// Exhaustive commitment oracle: every run-length-feasible on/off pattern pair,
// continuous dispatch by LP with the pair fixed. Returns +inf when no pattern
// admits a feasible dispatch.
inline double uc_enum_objective(const MicrogridConfig& cfg,
                                const std::vector<SlotObservation>& obs) {
  const int T = static_cast<int>(obs.size());
  Linearization lin = make_linearization(cfg);

  std::vector<std::vector<std::vector<int>>> pats(cfg.cgs.size());
  for (std::size_t i = 0; i < cfg.cgs.size(); ++i) {
    for (int mask = 0; mask < (1 << T); ++mask) {
      std::vector<int> p(T);
      for (int t = 0; t < T; ++t) p[t] = (mask >> t) & 1;
      if (min_run_pattern_ok(p, cfg.cgs[i].t_on_min, cfg.cgs[i].t_off_min, cfg.cg_init[i]))
        pats[i].push_back(std::move(p));
    }
  }

  double best = kInf;
  for (const auto& pa : pats[0]) {
    for (const auto& pb : pats[1]) {
      GridProblem gp = build_p0(cfg, lin, obs, 0, cfg.cg_init, cfg.ess_init);
      bool ok = true;
      for (int t = 0; t < T && ok; ++t) {
        ok = fix_binary(gp.model, gp.lay.u(0, t), pa[t]) &&
             fix_binary(gp.model, gp.lay.u(1, t), pb[t]);
      }
      if (!ok) continue;
      MilpSolution s = solve_lp(gp.model);
      if (s.status == SolveStatus::optimal) best = std::min(best, s.objective);
    }
  }
  return best;
}

}  // namespace mgems::testing
