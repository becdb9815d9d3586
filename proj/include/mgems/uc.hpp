#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "mgems/branch_and_bound.hpp"
#include "mgems/formulation.hpp"

// Day-ahead commitment stage: build the 24-slot problem from day-ahead
// forecasts with the conservative band width (the long-run shedding allowance
// applied per slot), solve it, and keep the commitment pattern plus advisory
// dispatch for the day.

namespace mgems {

struct UcPlan {
  int T = 0, ncg = 0, ness = 0;
  std::vector<int> u, v;    // index t * ncg + i
  std::vector<int> tau;     // contiguous scheduled-on slots from t; 0 when off
  std::vector<double> p;    // advisory generator output, t * ncg + i
  std::vector<double> pc, pd, soc;  // advisory storage profile, t * ness + j
  std::vector<double> pp, ps, w;    // advisory trade and shortfall, per slot
  double objective = 0.0;           // planning objective (PWL surrogate costs)
  double gap = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  long nodes = 0, pivots = 0;
  double wall_s = 0.0;

  int at(int i, int t) const { return t * ncg + i; }
  int ess_at(int j, int t) const { return t * ness + j; }
};

inline GridProblem build_p0(const MicrogridConfig& cfg, const Linearization& lin,
                            const std::vector<SlotObservation>& obs, int day_start_abs,
                            const std::vector<CgState>& cg0,
                            const std::vector<EssState>& ess0,
                            const FormulationFlags& flags = {},
                            double alpha_override = -1.0, double avg_ratio_cap = -1.0) {
  std::vector<SlotInputs> slots(obs.size());
  double alpha = alpha_override >= 0.0 ? alpha_override : cfg.qos.alpha_avg;
  for (std::size_t t = 0; t < obs.size(); ++t)
    slots[t] = {obs[t], day_start_abs + static_cast<int>(t), alpha};
  return build_grid_milp(cfg, lin, slots, cg0, ess0, flags, avg_ratio_cap, nullptr,
                         "dayahead_d" + std::to_string(day_start_abs / 24));
}

// Round a fractional relaxation to a commitment pattern that honors minimum
// run lengths and the boundary pins, then derive the matching run-continuation
// and charge indicators. Used as the incumbent heuristic inside the tree
// search; must assign every binary.
inline std::optional<std::vector<std::pair<int, double>>> repair_commitment(
    const MicrogridConfig& cfg, const GridLayout& L, const std::vector<CgState>& cg0,
    const MilpModel& m, const std::vector<double>& x) {
  std::vector<std::pair<int, double>> out;
  out.reserve(static_cast<std::size_t>(L.T) * (2 * L.ncg + L.ness));
  for (int i = 0; i < L.ncg; ++i) {
    const CgSpec& g = cfg.cgs[i];
    int cur = cg0[i].u_prev;
    int len = cur ? cg0[i].t_on : cg0[i].t_off;
    for (int t = 0; t < L.T; ++t) {
      int want = x[L.u(i, t)] >= 0.5 ? 1 : 0;
      const MilpVar& uv = m.vars[L.u(i, t)];
      if (uv.lo > 0.5) want = 1;
      if (uv.up < 0.5) want = 0;
      if (want != cur && len < (cur ? g.t_on_min : g.t_off_min)) want = cur;
      int v_t = (want == 1 && cur == 1) ? 1 : 0;
      if (want == cur)
        ++len;
      else {
        cur = want;
        len = 1;
      }
      out.push_back({L.u(i, t), static_cast<double>(cur)});
      out.push_back({L.v(i, t), static_cast<double>(v_t)});
    }
  }
  for (int j = 0; j < L.ness; ++j)
    for (int t = 0; t < L.T; ++t)
      out.push_back({L.vc(j, t), x[L.vc(j, t)] >= 0.5 ? 1.0 : 0.0});
  return out;
}

inline UcPlan solve_uc(const MicrogridConfig& cfg, const GridProblem& gp,
                       const std::vector<CgState>& cg0) {
  MipOptions opt;
  opt.gap_target = cfg.budgets.uc_gap_target;
  opt.node_limit = cfg.budgets.uc_node_limit;
  opt.pivot_limit = cfg.budgets.uc_pivot_limit;
  opt.time_limit_s = cfg.budgets.uc_time_limit_s;
  opt.rounding_heuristic = true;
  const GridLayout& L = gp.lay;
  opt.repair = [&cfg, &L, &cg0](const MilpModel& m, const std::vector<double>& x) {
    return repair_commitment(cfg, L, cg0, m, x);
  };

  MilpSolution sol = solve_mip(gp.model, opt);
  if (!sol.has_solution())
    throw SolverError("day-ahead schedule not found: " +
                      std::string(to_string(sol.status)));

  UcPlan plan;
  plan.T = L.T;
  plan.ncg = L.ncg;
  plan.ness = L.ness;
  plan.status = sol.status;
  plan.objective = sol.objective;
  plan.gap = sol.gap;
  plan.nodes = sol.node_count;
  plan.pivots = sol.pivot_count;
  plan.wall_s = sol.wall_time_s;
  plan.u.resize(L.T * L.ncg);
  plan.v.resize(L.T * L.ncg);
  plan.tau.assign(L.T * L.ncg, 0);
  plan.p.resize(L.T * L.ncg);
  plan.pc.resize(L.T * L.ness);
  plan.pd.resize(L.T * L.ness);
  plan.soc.resize(L.T * L.ness);
  plan.pp.resize(L.T);
  plan.ps.resize(L.T);
  plan.w.resize(L.T);
  auto snap = [](double v) { return std::fabs(v) < 1e-9 ? 0.0 : v; };
  for (int t = 0; t < L.T; ++t) {
    for (int i = 0; i < L.ncg; ++i) {
      plan.u[plan.at(i, t)] = static_cast<int>(std::lround(sol.x[L.u(i, t)]));
      plan.v[plan.at(i, t)] = static_cast<int>(std::lround(sol.x[L.v(i, t)]));
      plan.p[plan.at(i, t)] = snap(sol.x[L.p(i, t)]);
    }
    for (int j = 0; j < L.ness; ++j) {
      plan.pc[plan.ess_at(j, t)] = snap(sol.x[L.pc(j, t)]);
      plan.pd[plan.ess_at(j, t)] = snap(sol.x[L.pd(j, t)]);
      plan.soc[plan.ess_at(j, t)] = sol.x[L.s(j, t)];
    }
    plan.pp[t] = snap(sol.x[L.pp(t)]);
    plan.ps[t] = snap(sol.x[L.ps(t)]);
    plan.w[t] = snap(sol.x[L.w(t)]);
  }
  for (int i = 0; i < L.ncg; ++i) {
    for (int t = L.T - 1; t >= 0; --t) {
      if (plan.u[plan.at(i, t)] == 0) continue;
      bool last = t == L.T - 1 || plan.u[plan.at(i, t + 1)] == 0;
      plan.tau[plan.at(i, t)] = last ? 1 : plan.tau[plan.at(i, t + 1)] + 1;
    }
  }
  return plan;
}

inline void write_uc_plan_csv(const UcPlan& plan, std::ostream& os) {
  os << "slot";
  for (int i = 1; i <= plan.ncg; ++i)
    os << ",u" << i << ",v" << i << ",tau" << i << ",p" << i << "_kw";
  for (int j = 1; j <= plan.ness; ++j)
    os << ",pc" << j << "_kw,pd" << j << "_kw,soc" << j;
  os << ",pp_kw,ps_kw,w_kw\n";
  for (int t = 0; t < plan.T; ++t) {
    os << t;
    for (int i = 0; i < plan.ncg; ++i)
      os << "," << plan.u[plan.at(i, t)] << "," << plan.v[plan.at(i, t)] << ","
         << plan.tau[plan.at(i, t)] << "," << fmt_double(plan.p[plan.at(i, t)]);
    for (int j = 0; j < plan.ness; ++j)
      os << "," << fmt_double(plan.pc[plan.ess_at(j, t)]) << ","
         << fmt_double(plan.pd[plan.ess_at(j, t)]) << ","
         << fmt_double(plan.soc[plan.ess_at(j, t)]);
    os << "," << fmt_double(plan.pp[t]) << "," << fmt_double(plan.ps[t]) << ","
       << fmt_double(plan.w[t]) << "\n";
  }
}

}  // namespace mgems
