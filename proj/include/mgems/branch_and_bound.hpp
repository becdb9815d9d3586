#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "mgems/milp.hpp"
#include "mgems/simplex.hpp"

// Best-bound branch-and-bound over the dual simplex engine. One tableau is
// kept for the whole search: processing a node applies its binary fixings as
// bound changes and re-optimizes dually, so a child visited right after its
// parent reuses the parent basis verbatim and tree jumps reuse the most
// recent (still dual-feasible) basis.
//
// All default limits are deterministic (node and pivot budgets); the wall
// clock limit is a safety net that normally never binds, keeping node counts
// and hence all downstream reports reproducible.

namespace mgems {

struct MipOptions {
  double gap_target = 0.0;
  long node_limit = 1'000'000;
  long pivot_limit = 400'000'000;
  double time_limit_s = 600.0;
  double int_tol = 1e-6;
  bool rounding_heuristic = true;
  // Optional domain repair for the rounding heuristic: receives the model and
  // the fractional relaxation, returns explicit 0/1 fixings for binaries.
  std::function<std::optional<std::vector<std::pair<int, double>>>(
      const MilpModel&, const std::vector<double>&)>
      repair;
  std::function<void(long node, double incumbent, double bound)> on_node;
};

namespace detail {

// Scaled feasibility of a candidate point against the original model data,
// independent of any engine state.
inline double point_residual(const MilpModel& m, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& r : m.rows) {
    double act = 0.0, scale = 1.0 + std::fabs(r.rhs);
    for (const auto& [id, c] : r.coef) {
      act += c * x[id];
      scale += std::fabs(c * x[id]);
    }
    double viol = 0.0;
    switch (r.sense) {
      case RowSense::le: viol = act - r.rhs; break;
      case RowSense::ge: viol = r.rhs - act; break;
      case RowSense::eq: viol = std::fabs(act - r.rhs); break;
    }
    worst = std::max(worst, viol / scale);
  }
  for (int j = 0; j < m.n_vars(); ++j) {
    const auto& v = m.vars[j];
    double scale = 1.0 + std::fabs(v.lo) + std::fabs(v.up);
    worst = std::max(worst, std::max(v.lo - x[j], x[j] - v.up) / scale);
  }
  return worst;
}

inline MilpSolution finish_lp(SimplexEngine& eng, const MilpModel& m, LpStatus st,
                              std::chrono::steady_clock::time_point t0) {
  MilpSolution sol;
  sol.node_count = 1;
  sol.pivot_count = eng.total_pivots();
  if (st == LpStatus::infeasible) {
    sol.status = SolveStatus::infeasible;
    sol.bound = kInf;
  } else if (st == LpStatus::budget_exceeded) {
    sol.status = SolveStatus::time_limit;
    sol.bound = -kInf;
  } else if (st == LpStatus::numerical) {
    sol.status = SolveStatus::numerical_failure;
  } else {
    double resid = eng.primal_residual();
    double dsign = eng.dual_sign_violation();
    double pobj = eng.objective_from_state();
    double dobj = eng.dual_objective();
    bool ok = resid <= 1e-7 && dsign <= 1e-6 &&
              std::fabs(pobj - dobj) <= 1e-6 * (1.0 + std::fabs(pobj));
    if (!ok) {
      sol.status = SolveStatus::numerical_failure;
    } else {
      sol.status = SolveStatus::optimal;
      sol.x = eng.extract_x();
      sol.objective = pobj + m.obj_offset;
      sol.bound = sol.objective;
      sol.gap = 0.0;
    }
  }
  sol.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace detail

// Solve the LP relaxation (binaries already carry [0,1] bounds).
inline MilpSolution solve_lp(const MilpModel& m, long pivot_limit = 200'000'000,
                             double time_limit_s = 600.0) {
  m.validate();
  auto t0 = std::chrono::steady_clock::now();
  SimplexEngine eng(m);
  LpControls ctl;
  ctl.pivot_limit = pivot_limit;
  ctl.deadline_s = time_limit_s;
  ctl.t0 = t0;
  LpStatus st = eng.dual_solve(ctl);
  return detail::finish_lp(eng, m, st, t0);
}

inline MilpSolution solve_mip(const MilpModel& m, const MipOptions& opts = {}) {
  m.validate();
  auto t0 = std::chrono::steady_clock::now();

  std::vector<int> bin_ids;
  for (int j = 0; j < m.n_vars(); ++j)
    if (m.vars[j].is_binary) bin_ids.push_back(j);

  std::vector<std::pair<int, int>> applied;  // (var, val) fixings currently active
  std::vector<std::pair<int, int>> want;

  std::optional<SimplexEngine> engbox;
  engbox.emplace(m);
  long pivot_base = 0;  // pivots spent in engines discarded by rebuilds
  auto total_pivots = [&] { return pivot_base + engbox->total_pivots(); };
  // A fresh engine is the refactorization step of this solver: the persistent
  // tableau accumulates error, so on numerical trouble the whole thing is
  // rebuilt from the original data and the active fixings re-applied.
  auto rebuild = [&] {
    pivot_base += engbox->total_pivots();
    engbox.emplace(m);
    for (const auto& [var, val] : applied) engbox->set_var_bounds(var, val, val);
  };

  LpControls ctl;
  ctl.deadline_s = opts.time_limit_s;
  ctl.t0 = t0;

  MilpSolution out;
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto budget_left = [&] {
    return total_pivots() < opts.pivot_limit && elapsed() < opts.time_limit_s;
  };

  // Solve the current node LP, verifying claimed optima against the original
  // data; any numerical verdict or failed verification triggers one rebuild.
  auto verified_ok = [&](LpStatus st) {
    if (st == LpStatus::numerical) return false;
    if (st != LpStatus::optimal) return true;  // nothing further to verify here
    return engbox->primal_residual() <= 1e-7 && engbox->dual_sign_violation() <= 1e-6;
  };
  auto solve_node_lp = [&](const LpControls& c) {
    LpStatus st = engbox->dual_solve(c);
    for (int attempt = 0; attempt < 2 && !verified_ok(st); ++attempt) {
      rebuild();
      st = engbox->dual_solve(c);
    }
    if (!verified_ok(st)) st = LpStatus::numerical;
    return st;
  };

  struct Node {
    double bound;
    long id;
    int parent;       // index into storage, -1 for root
    int branch_var;   // variable fixed relative to parent
    int branch_val;
  };
  std::deque<Node> store;
  auto cmp = [&](long a, long b) {
    if (store[a].bound != store[b].bound) return store[a].bound > store[b].bound;
    return store[a].id > store[b].id;
  };
  std::priority_queue<long, std::vector<long>, decltype(cmp)> heap(cmp);

  std::vector<double> incumbent_x;
  double incumbent = kInf;
  long nodes_done = 0;
  long next_id = 0;
  double best_bound = -kInf;

  auto apply_fixings = [&](int node_idx) {
    // path from root for the target node
    want.clear();
    for (int i = node_idx; i >= 0; i = store[i].parent) {
      if (store[i].branch_var >= 0) want.emplace_back(store[i].branch_var, store[i].branch_val);
      if (store[i].parent < 0) break;
    }
    for (const auto& [var, val] : applied) engbox->reset_var_bounds(var);
    applied.clear();
    for (auto it = want.rbegin(); it != want.rend(); ++it) {
      engbox->set_var_bounds(it->first, it->second, it->second);
      applied.emplace_back(it->first, it->second);
    }
  };

  auto integral = [&](const std::vector<double>& x) {
    for (int id : bin_ids) {
      double f = x[id] - std::floor(x[id] + 0.5);
      if (std::fabs(f) > opts.int_tol) return false;
    }
    return true;
  };

  auto try_accept = [&](double obj, const std::vector<double>& x) {
    if (obj < incumbent - 1e-9 * (1.0 + std::fabs(obj))) {
      if (detail::point_residual(m, x) > 1e-7) return;  // never accept a bad point
      incumbent = obj;
      incumbent_x = x;
      for (int id : bin_ids) incumbent_x[id] = std::floor(incumbent_x[id] + 0.5);
    }
  };

  // ---- root ----
  LpControls rctl = ctl;
  rctl.pivot_limit = opts.pivot_limit;
  LpStatus rst = solve_node_lp(rctl);
  if (rst == LpStatus::numerical) {
    out.status = SolveStatus::numerical_failure;
    out.wall_time_s = elapsed();
    return out;
  }
  if (rst == LpStatus::infeasible) {
    out.status = SolveStatus::infeasible;
    out.bound = kInf;
    out.wall_time_s = elapsed();
    out.node_count = 1;
    out.pivot_count = total_pivots();
    return out;
  }
  if (rst == LpStatus::budget_exceeded) {
    out.status = SolveStatus::time_limit;
    out.wall_time_s = elapsed();
    out.node_count = 1;
    out.pivot_count = total_pivots();
    return out;
  }
  nodes_done = 1;
  double root_obj = engbox->objective_from_state() + m.obj_offset;
  best_bound = root_obj;
  std::vector<double> root_x = engbox->extract_x();
  if (opts.on_node) opts.on_node(nodes_done, incumbent, best_bound);

  if (integral(root_x)) {
    try_accept(root_obj, root_x);
    out.node_count = nodes_done;
    out.pivot_count = total_pivots();
    out.wall_time_s = elapsed();
    if (incumbent < kInf) {
      out.status = SolveStatus::optimal;
      out.x = incumbent_x;
      out.objective = incumbent;
      out.bound = incumbent;
      out.gap = 0.0;
    } else {
      out.status = SolveStatus::numerical_failure;  // integral root failed verification
    }
    return out;
  }

  // ---- rounding heuristic to seed the incumbent ----
  // Runs on its own throwaway engine so a wild fixed-bound solve can never
  // pollute the tree engine's tableau.
  if (opts.rounding_heuristic && !bin_ids.empty()) {
    std::vector<std::pair<int, double>> fix;
    bool have = false;
    if (opts.repair) {
      if (auto r = opts.repair(m, root_x)) {
        fix = *r;
        have = true;
      }
    }
    if (!have) {
      fix.reserve(bin_ids.size());
      for (int id : bin_ids) fix.emplace_back(id, root_x[id] >= 0.5 ? 1.0 : 0.0);
    }
    SimplexEngine heng(m);
    for (const auto& [var, val] : fix) heng.set_var_bounds(var, val, val);
    LpControls hctl = ctl;
    hctl.pivot_limit = std::max<long>(10'000, opts.pivot_limit / 8);
    LpStatus hst = heng.dual_solve(hctl);
    if (hst == LpStatus::optimal && heng.primal_residual() <= 1e-7) {
      std::vector<double> hx = heng.extract_x();
      if (integral(hx)) try_accept(heng.objective_from_state() + m.obj_offset, hx);
    }
    pivot_base += heng.total_pivots();
  }

  // ---- tree ----
  store.push_back({root_obj, next_id++, -1, -1, 0});
  {
    // immediately branch the root
    int bv = -1;
    double best_frac = -1.0;
    for (int id : bin_ids) {
      double f = root_x[id] - std::floor(root_x[id]);
      double score = std::min(f, 1.0 - f);
      if (score > opts.int_tol && score > best_frac + 1e-12) {
        best_frac = score;
        bv = id;
      }
    }
    store.push_back({root_obj, next_id++, 0, bv, 0});
    heap.push(1);
    store.push_back({root_obj, next_id++, 0, bv, 1});
    heap.push(2);
  }

  SolveStatus final_status = SolveStatus::feasible_with_gap;
  while (true) {
    if (heap.empty()) {
      best_bound = incumbent;
      final_status = SolveStatus::optimal;
      break;
    }
    long cur = heap.top();
    best_bound = std::min(store[cur].bound, incumbent);
    double gap = relative_gap(incumbent, best_bound);
    if (opts.on_node) opts.on_node(nodes_done, incumbent, best_bound);
    if (incumbent < kInf && gap <= opts.gap_target + 1e-15) {
      final_status = gap <= 1e-9 ? SolveStatus::optimal : SolveStatus::feasible_with_gap;
      break;
    }
    if (nodes_done >= opts.node_limit || !budget_left()) {
      final_status = incumbent < kInf ? SolveStatus::feasible_with_gap : SolveStatus::time_limit;
      break;
    }
    heap.pop();
    if (store[cur].bound >= incumbent - 1e-9 * (1.0 + std::fabs(incumbent))) continue;

    apply_fixings(static_cast<int>(cur));
    LpControls nctl = ctl;
    nctl.pivot_limit = std::max<long>(1000, opts.pivot_limit - total_pivots());
    nctl.cutoff = incumbent < kInf ? incumbent - m.obj_offset : kInf;
    LpStatus st = solve_node_lp(nctl);
    ++nodes_done;
    if (st == LpStatus::numerical) {
      // abandon this node honestly: treat as unexplored bound, stop the search
      final_status = incumbent < kInf ? SolveStatus::feasible_with_gap : SolveStatus::numerical_failure;
      break;
    }
    if (st == LpStatus::infeasible || st == LpStatus::cutoff_reached) continue;
    if (st == LpStatus::budget_exceeded) {
      final_status = incumbent < kInf ? SolveStatus::feasible_with_gap : SolveStatus::time_limit;
      break;
    }
    double obj = engbox->objective_from_state() + m.obj_offset;
    store[cur].bound = obj;
    if (obj >= incumbent - 1e-9 * (1.0 + std::fabs(incumbent))) continue;
    std::vector<double> x = engbox->extract_x();
    if (integral(x)) {
      try_accept(obj, x);
      continue;
    }
    int bv = -1;
    double best_frac = -1.0;
    for (int id : bin_ids) {
      double f = x[id] - std::floor(x[id]);
      double score = std::min(f, 1.0 - f);
      if (score > opts.int_tol && score > best_frac + 1e-12) {
        best_frac = score;
        bv = id;
      }
    }
    int parent = static_cast<int>(cur);
    store.push_back({obj, next_id++, parent, bv, 0});
    heap.push(static_cast<long>(store.size()) - 1);
    store.push_back({obj, next_id++, parent, bv, 1});
    heap.push(static_cast<long>(store.size()) - 1);
  }

  out.node_count = nodes_done;
  out.pivot_count = total_pivots();
  out.wall_time_s = elapsed();
  if (incumbent < kInf) {
    out.status = final_status;
    out.x = incumbent_x;
    out.objective = incumbent;
    out.bound = std::min(best_bound, incumbent);
    out.gap = relative_gap(out.objective, out.bound);
  } else {
    out.status = final_status == SolveStatus::optimal ? SolveStatus::infeasible : final_status;
    out.bound = final_status == SolveStatus::optimal ? kInf : best_bound;
  }
  return out;
}

}  // namespace mgems
