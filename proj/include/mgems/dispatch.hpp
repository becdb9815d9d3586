#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mgems/branch_and_bound.hpp"
#include "mgems/formulation.hpp"
#include "mgems/uc.hpp"

// Hour-ahead dispatch stage. Commitment is taken from the day-ahead plan;
// output, storage, trade, and shortfall re-optimize each slot against
// hour-ahead forecasts. Two virtual queues couple the slots: a shortage-ratio
// debt queue enforcing the long-run shedding allowance, and per-storage
// shifted-SOC queues that replace the hard SOC window in the long-run
// analysis (the window itself stays enforced). The per-slot objective is the
// standard drift-plus-penalty form: V * slot cost + queue pressure terms.

namespace mgems {

struct EssLyapunov {
  double c_c_max = 0.0;  // steepest marginal aging cost over the charge range
  double c_d_max = 0.0;  // same for discharge
  double beta = 0.0;     // SOC shift defining the storage queue
};

struct LyapunovParams {
  double c_p_max = 0.0;  // highest purchase price over the day
  double c_s_min = 0.0;  // lowest sale price over the day
  double v_max = 0.0;    // largest penalty weight with a stability guarantee
  double v = 0.0;        // selected penalty weight
  std::vector<EssLyapunov> ess;
};

// Steepest slope of the aging-cost envelope of one side (charge or discharge)
// over [0, rate_max]. The envelope is a max of convex quadratics, so the
// steepest slope is attained at rate_max; among segments active there, take
// the largest derivative.
inline double marginal_aging_max(const EssSpec& e, double rate_max, bool charge_side) {
  if (e.aging.empty() || rate_max <= 0.0) return 0.0;
  double n = static_cast<double>(e.n_modules());
  double vmax = -kInf;
  for (const auto& seg : e.aging)
    vmax = std::max(vmax, 1000.0 * seg.a * rate_max * rate_max + n * seg.b * rate_max);
  double deriv = -kInf;
  for (const auto& seg : e.aging) {
    double val = 1000.0 * seg.a * rate_max * rate_max + n * seg.b * rate_max;
    if (std::fabs(val - vmax) <= 1e-9 * std::max(1.0, std::fabs(vmax)))
      deriv = std::max(deriv, 2000.0 * seg.a * rate_max + n * seg.b);
  }
  double scale = e.aging_scale() *
                 (charge_side ? e.gamma * e.eta_c : (1.0 - e.gamma) / e.eta_d);
  return scale * deriv;
}

inline LyapunovParams compute_lyapunov(const MicrogridConfig& cfg) {
  LyapunovParams lp;
  lp.c_p_max = *std::max_element(cfg.market.buy_price.begin(), cfg.market.buy_price.end());
  lp.c_s_min =
      *std::min_element(cfg.market.sell_price.begin(), cfg.market.sell_price.end());

  lp.v_max = kInf;
  for (const auto& e : cfg.esses) {
    EssLyapunov el;
    el.c_c_max = marginal_aging_max(e, e.p_c_max, true);
    el.c_d_max = marginal_aging_max(e, e.p_d_max, false);
    double num = (e.s_max - e.s_min) - (e.eta_c * e.p_c_max + e.p_d_max / e.eta_d) / e.e_cap;
    double den =
        e.e_cap * ((el.c_c_max + lp.c_p_max) / e.eta_c + e.eta_d * (el.c_d_max - lp.c_s_min));
    if (!(den > 0.0))
      throw ConfigError(e.name + ": no positive stability bound (price/aging data)");
    lp.v_max = std::min(lp.v_max, num / den);
    lp.ess.push_back(el);
  }

  if (cfg.v_explicit >= 0.0) {
    lp.v = cfg.v_explicit;
  } else {
    if (!std::isfinite(lp.v_max))
      throw ConfigError("no storage units: set an explicit penalty weight");
    if (!(lp.v_max > 0.0))
      throw ConfigError("stability bound on the penalty weight is not positive");
    lp.v = cfg.v_scale * lp.v_max;
  }
  if (!(lp.v > 0.0)) throw ConfigError("penalty weight must be positive");

  for (std::size_t j = 0; j < cfg.esses.size(); ++j) {
    const EssSpec& e = cfg.esses[j];
    lp.ess[j].beta = e.s_min + e.p_d_max / (e.eta_d * e.e_cap) +
                     lp.v * e.e_cap * (lp.ess[j].c_c_max + lp.c_p_max) / e.eta_c;
  }
  return lp;
}

// Constant of the one-slot drift bound; reported as a diagnostic.
inline double drift_bound_constant(const MicrogridConfig& cfg, double delta_net_max) {
  double first = 0.5 * std::max(cfg.qos.alpha_max * cfg.qos.alpha_max,
                                delta_net_max * delta_net_max /
                                    (cfg.qos.d_e_min * cfg.qos.d_e_min));
  double second = 0.0;
  for (const auto& e : cfg.esses) {
    double c = e.eta_c * e.p_c_max;
    double d = e.p_d_max / e.eta_d;
    second += 0.5 * std::max(c * c, d * d) / (e.e_cap * e.e_cap);
  }
  return first + second;
}

struct QueueState {
  double q = 0.0;
  std::vector<double> s;  // realized SOC minus beta, per storage unit
};

inline QueueState init_queues(const LyapunovParams& lyap,
                              const std::vector<EssState>& ess0) {
  QueueState qs;
  qs.q = 0.0;
  qs.s.resize(ess0.size());
  for (std::size_t j = 0; j < ess0.size(); ++j) qs.s[j] = ess0[j].soc - lyap.ess[j].beta;
  return qs;
}

// Forecast-relative shortage ratio of one executed slot.
inline double shortage_ratio(const SlotObservation& obs, double p_disp, double d_e_min) {
  double den = std::max(obs.d_e_hat, d_e_min);
  return std::max(0.0, (obs.d_net_hat() - p_disp) / den);
}

inline void advance_queues(QueueState& qs, const MicrogridConfig& cfg,
                           double ratio, const std::vector<double>& soc_change) {
  qs.q = std::max(qs.q + ratio - cfg.qos.alpha_avg, 0.0);
  for (std::size_t j = 0; j < qs.s.size(); ++j) qs.s[j] += soc_change[j];
}

struct DispatchInputs {
  SlotObservation obs;  // hour-ahead view
  int slot_abs = 0;
  std::vector<int> u_star, v_star;  // commitment for this slot, per CG
  std::vector<int> tau;             // remaining scheduled-on slots, per CG
  std::vector<CgState> cg_now;      // realized state entering the slot
  std::vector<EssState> ess_now;    // realized SOC entering the slot
  QueueState queues;                // queue backlogs after the previous slot
};

// alpha < 0 uses the configured shedding allowance; the dispatcher passes 1.0
// when it re-solves an infeasible slot with the service band fully opened.
inline GridProblem build_p1(const MicrogridConfig& cfg, const Linearization& lin,
                            const LyapunovParams& lyap, const DispatchInputs& in,
                            const FormulationFlags& flags = {}, double alpha = -1.0) {
  const int ncg = static_cast<int>(cfg.cgs.size());
  const int ness = static_cast<int>(cfg.esses.size());
  if (static_cast<int>(in.u_star.size()) != ncg ||
      static_cast<int>(in.v_star.size()) != ncg ||
      static_cast<int>(in.tau.size()) != ncg)
    throw std::invalid_argument("dispatch: commitment size mismatch");
  if (static_cast<int>(in.queues.s.size()) != ness)
    throw std::invalid_argument("dispatch: queue size mismatch");

  CommitFixing fix;
  fix.u = in.u_star;
  fix.v = in.v_star;
  fix.p_cap.resize(ncg);
  for (int i = 0; i < ncg; ++i)
    fix.p_cap[i] =
        in.u_star[i] ? static_cast<double>(in.tau[i]) * cfg.cgs[i].ramp_kw() : 0.0;

  std::vector<SlotInputs> slots = {
      {in.obs, in.slot_abs, alpha >= 0.0 ? alpha : cfg.qos.alpha_max}};
  GridProblem gp = build_grid_milp(cfg, lin, slots, in.cg_now, in.ess_now, flags, -1.0,
                                   &fix, "dispatch_s" + std::to_string(in.slot_abs));

  MilpModel& m = gp.model;
  for (double& c : m.obj) c *= lyap.v;
  m.obj_offset *= lyap.v;
  const GridLayout& L = gp.lay;
  for (int j = 0; j < ness; ++j) {
    const EssSpec& e = cfg.esses[j];
    m.add_obj(L.pc(j, 0), in.queues.s[j] * e.eta_c / e.e_cap);
    m.add_obj(L.pd(j, 0), -in.queues.s[j] / (e.eta_d * e.e_cap));
  }
  m.add_obj(L.w(0), in.queues.q / std::max(in.obs.d_e_hat, cfg.qos.d_e_min));
  return gp;
}

struct DispatchDecision {
  std::vector<double> p, pc, pd, soc_next;
  std::vector<int> vc;
  double pp = 0.0, ps = 0.0, w = 0.0;
  double p_disp = 0.0;
  double cost_scheduled = 0.0;  // exact slot cost at the scheduled decisions
  double objective = 0.0;       // drift-plus-penalty objective from the solver
  SolveStatus status = SolveStatus::infeasible;
  bool band_relaxed = false;  // slot only solvable with the service band opened
  double gap = 0.0;
  long nodes = 0, pivots = 0;
  double wall_s = 0.0;
};

inline DispatchDecision dispatch_slot(const MicrogridConfig& cfg, const Linearization& lin,
                                      const LyapunovParams& lyap, const DispatchInputs& in,
                                      const FormulationFlags& flags = {}) {
  GridProblem gp = build_p1(cfg, lin, lyap, in, flags);
  MipOptions opt;
  opt.gap_target = 1e-9;
  opt.node_limit = 100000;
  opt.pivot_limit = cfg.budgets.p1_pivot_limit;
  opt.time_limit_s = cfg.budgets.p1_time_limit_s;
  opt.rounding_heuristic = true;
  MilpSolution sol = solve_mip(gp.model, opt);
  bool relaxed = false;
  if (sol.status == SolveStatus::infeasible) {
    // A commitment sized to day-ahead forecasts can leave an hour where the
    // run-out cap plus trade limits cannot reach hour-ahead net demand from
    // inside the service band. Shedding past the configured allowance is then
    // the only action left: re-solve with the band fully open. Every physical
    // and policy row stays in force, the extra shedding is priced in the
    // objective, and the realized shortfall lands in the shortage queue.
    relaxed = true;
    gp = build_p1(cfg, lin, lyap, in, flags, 1.0);
    sol = solve_mip(gp.model, opt);
  }
  if (!sol.has_solution())
    throw SolverError("dispatch failed at slot " + std::to_string(in.slot_abs) + ": " +
                      std::string(to_string(sol.status)) +
                      (relaxed ? " even with the service band open" : ""));

  const GridLayout& L = gp.lay;
  DispatchDecision d;
  d.status = sol.status;
  d.band_relaxed = relaxed;
  d.objective = sol.objective;
  d.gap = sol.gap;
  d.nodes = sol.node_count;
  d.pivots = sol.pivot_count;
  d.wall_s = sol.wall_time_s;
  auto snap = [](double v) { return std::fabs(v) < 1e-9 ? 0.0 : v; };
  const int ncg = L.ncg, ness = L.ness;
  d.p.resize(ncg);
  for (int i = 0; i < ncg; ++i) d.p[i] = snap(sol.x[L.p(i, 0)]);
  d.pc.resize(ness);
  d.pd.resize(ness);
  d.vc.resize(ness);
  d.soc_next.resize(ness);
  for (int j = 0; j < ness; ++j) {
    d.pc[j] = snap(sol.x[L.pc(j, 0)]);
    d.pd[j] = snap(sol.x[L.pd(j, 0)]);
    d.vc[j] = static_cast<int>(std::lround(sol.x[L.vc(j, 0)]));
    if (d.vc[j] == 1) d.pd[j] = 0.0;
    if (d.vc[j] == 0) d.pc[j] = 0.0;
    d.soc_next[j] = ess_soc_update(cfg.esses[j], in.ess_now[j].soc, d.pc[j], d.pd[j]);
  }
  d.pp = snap(sol.x[L.pp(0)]);
  d.ps = snap(sol.x[L.ps(0)]);
  d.w = snap(sol.x[L.w(0)]);
  d.p_disp = dispatchable_supply(d.p, d.pc, d.pd, d.pp, d.ps);

  std::vector<int> u_prev(ncg);
  for (int i = 0; i < ncg; ++i) u_prev[i] = in.cg_now[i].u_prev;
  d.cost_scheduled =
      slot_cost_J(cfg.cgs, u_prev, in.u_star, in.v_star, d.p, cfg.esses, d.pc, d.pd,
                  cfg.market, in.slot_abs, d.pp, d.ps, cfg.qos, in.obs.d_net_hat(),
                  std::max(d.w, std::max(0.0, in.obs.d_net_hat() - d.p_disp)));
  return d;
}

}  // namespace mgems
