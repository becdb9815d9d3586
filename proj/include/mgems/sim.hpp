#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "mgems/dispatch.hpp"
#include "mgems/forecast.hpp"
#include "mgems/uc.hpp"

// Rolling-horizon simulation. Each day: solve the day-ahead commitment from
// the realized boundary state, then walk the 24 slots, deciding each one
// according to the scenario mode, realizing the truth, accounting costs at the
// actual decisions, and advancing device states and virtual queues.
//
// Modes:
//   two_stage       day-ahead commitment + hour-ahead re-dispatch (the method)
//   one_stage_only  execute the day-ahead profile verbatim
//   benchmark       feed the day model the truth (no forecast error), execute
//                   its profile; approximates an error-free planner per day

namespace mgems {

enum class SimMode { two_stage, one_stage_only, benchmark };

inline const char* to_string(SimMode m) {
  switch (m) {
    case SimMode::two_stage: return "two-stage";
    case SimMode::one_stage_only: return "one-stage-only";
    case SimMode::benchmark: return "benchmark-error-free";
  }
  return "?";
}

struct ScenarioConfig {
  SimMode mode = SimMode::two_stage;
  bool omit_startstop_cost = false;
  bool omit_ess_aging_cost = false;
  double rho = 1.0;      // recorded; forecast regeneration happens upstream
  int horizon = 168;     // slots, multiple of 24
  std::uint64_t seed = 1;
};

struct SlotRecord {
  int slot = 0;
  std::vector<int> u, v;
  std::vector<double> p;
  std::vector<double> pc, pd, soc;  // soc after the slot
  double pp = 0, ps = 0, w_sched = 0, p_disp = 0;
  double d_ie = 0, d_e = 0, p_rg = 0;
  double d_ie_hat = 0, d_e_hat = 0, p_rg_hat = 0;  // view used at decision time
  double shortage_kw = 0, surplus_kw = 0;
  double ratio_forecast = 0;  // queue increment before the allowance
  double ratio_realized = 0;
  double cost_switch = 0, cost_fuel_maint = 0, cost_aging = 0, cost_market = 0;
  double cost_shortage = 0, cost_surplus = 0, cost_total = 0;
  double cost_scheduled = 0;  // exact slot cost against the decision-time view
  double emission_kg = 0;
  double q_after = 0;
  std::vector<double> s_after;
};

struct ViolationRecord {
  int slot = -1;
  std::string kind;  // soc | emission | reserve | ramp | runout_cap | qos_inelastic |
                     // qos_alpha_max | ess_clip
  double amount = 0.0;
  std::string detail;
};

struct SolveRecord {
  int slot = -1;  // first slot of the day for planning solves
  std::string stage;  // "plan" or "dispatch"
  std::string status;
  double objective = 0.0;
  double gap = 0.0;
  long nodes = 0, pivots = 0;
  double wall_s = 0.0;
};

struct SimReport {
  ScenarioConfig scenario;
  LyapunovParams lyap;
  std::vector<SlotRecord> slots;
  std::vector<ViolationRecord> violations;
  std::vector<SolveRecord> solves;
  std::vector<UcPlan> plans;

  double total_cost = 0, total_switch = 0, total_fuel_maint = 0, total_aging = 0;
  double total_market = 0, total_shortage = 0, total_surplus = 0;
  double total_scheduled = 0;
  double total_emission_kg = 0, buy_kwh = 0, sell_kwh = 0;
  double mean_ratio_forecast = 0, mean_ratio_realized = 0;
  double q_final = 0;
  double delta_net_max = 0, b_const = 0;
  int start_stop_events = 0;
  int ess_cycle_count = 0;
  int clip_events = 0;

  // Count of violations of the hard kinds only (soc/emission/reserve/ramp/runout_cap).
  int hard_violation_count() const {
    int n = 0;
    for (const auto& v : violations)
      if (v.kind == "soc" || v.kind == "emission" || v.kind == "reserve" ||
          v.kind == "ramp" || v.kind == "runout_cap")
        ++n;
    return n;
  }
};

namespace detail {

inline void advance_cg_state(CgState& st, int u, double p) {
  if (u == 1) {
    st.t_on = st.u_prev == 1 ? st.t_on + 1 : 1;
    st.t_off = 0;
  } else {
    st.t_off = st.u_prev == 0 ? st.t_off + 1 : 1;
    st.t_on = 0;
  }
  st.u_prev = u;
  st.p_prev = p;
}

}  // namespace detail

inline SimReport run_scenario(const MicrogridConfig& cfg, const TraceSet& traces,
                              const ScenarioConfig& sc) {
  if (sc.horizon < 24 || sc.horizon % 24 != 0)
    throw TraceError("scenario horizon must be a positive multiple of 24");
  if (sc.horizon > traces.horizon())
    throw TraceError("scenario horizon exceeds the trace length");
  traces.validate(cfg.qos.d_e_min);

  const int ncg = static_cast<int>(cfg.cgs.size());
  const int ness = static_cast<int>(cfg.esses.size());
  const double tol = 1e-6;

  Linearization lin = make_linearization(cfg);
  LyapunovParams lyap = compute_lyapunov(cfg);
  FormulationFlags flags{!sc.omit_startstop_cost, !sc.omit_ess_aging_cost};

  SimReport rep;
  rep.scenario = sc;
  rep.lyap = lyap;
  rep.slots.reserve(sc.horizon);

  std::vector<CgState> cg_st = cfg.cg_init;
  std::vector<EssState> ess_st = cfg.ess_init;
  QueueState qs = init_queues(lyap, ess_st);
  std::vector<int> last_cycle_sign(ness, 0);

  auto truth_view = [&](int t) {
    SlotObservation o = traces.observe(t, false);
    o.d_ie_hat = o.d_ie;
    o.d_e_hat = o.d_e;
    o.p_rg_hat = o.p_rg;
    o.delta_ie = o.delta_e = o.delta_rg = 0.0;
    return o;
  };

  for (int day = 0; day * 24 < sc.horizon; ++day) {
    const int day_start = day * 24;

    std::vector<SlotObservation> day_obs(24);
    for (int k = 0; k < 24; ++k)
      day_obs[k] = sc.mode == SimMode::benchmark ? truth_view(day_start + k)
                                                 : traces.observe(day_start + k, true);

    GridProblem day_problem =
        sc.mode == SimMode::benchmark
            ? build_p0(cfg, lin, day_obs, day_start, cg_st, ess_st, flags,
                       cfg.qos.alpha_max, 24.0 * cfg.qos.alpha_avg)
            : build_p0(cfg, lin, day_obs, day_start, cg_st, ess_st, flags);
    UcPlan plan = solve_uc(cfg, day_problem, cg_st);
    rep.solves.push_back({day_start, "plan", to_string(plan.status), plan.objective,
                          plan.gap, plan.nodes, plan.pivots, plan.wall_s});
    rep.plans.push_back(plan);

    for (int k = 0; k < 24; ++k) {
      const int t = day_start + k;
      SlotObservation obs_used = sc.mode == SimMode::benchmark
                                     ? truth_view(t)
                                     : traces.observe(t, false);

      SlotRecord r;
      r.slot = t;
      r.u.resize(ncg);
      r.v.resize(ncg);
      r.p.resize(ncg);
      r.pc.resize(ness);
      r.pd.resize(ness);
      r.soc.resize(ness);
      for (int i = 0; i < ncg; ++i) {
        r.u[i] = plan.u[plan.at(i, k)];
        r.v[i] = plan.v[plan.at(i, k)];
      }

      if (sc.mode == SimMode::two_stage) {
        DispatchInputs din;
        din.obs = obs_used;
        din.slot_abs = t;
        din.u_star.resize(ncg);
        din.v_star.resize(ncg);
        din.tau.resize(ncg);
        for (int i = 0; i < ncg; ++i) {
          din.u_star[i] = plan.u[plan.at(i, k)];
          din.v_star[i] = plan.v[plan.at(i, k)];
          din.tau[i] = plan.tau[plan.at(i, k)];
        }
        din.cg_now = cg_st;
        din.ess_now = ess_st;
        din.queues = qs;
        DispatchDecision dec = dispatch_slot(cfg, lin, lyap, din, flags);
        rep.solves.push_back({t, "dispatch",
                              std::string(to_string(dec.status)) +
                                  (dec.band_relaxed ? "+band-open" : ""),
                              dec.objective, dec.gap, dec.nodes, dec.pivots, dec.wall_s});
        r.p = dec.p;
        r.pc = dec.pc;
        r.pd = dec.pd;
        r.pp = dec.pp;
        r.ps = dec.ps;
        r.w_sched = dec.w;
        r.cost_scheduled = dec.cost_scheduled;
      } else {
        for (int i = 0; i < ncg; ++i) r.p[i] = plan.p[plan.at(i, k)];
        for (int j = 0; j < ness; ++j) {
          r.pc[j] = plan.pc[plan.ess_at(j, k)];
          r.pd[j] = plan.pd[plan.ess_at(j, k)];
        }
        r.pp = plan.pp[k];
        r.ps = plan.ps[k];
        r.w_sched = plan.w[k];
        // Defensive clip: keep the SOC window even if the planned rates would
        // leave it (cannot happen when the plan respects its own recursion,
        // but execution must never write an out-of-range SOC).
        for (int j = 0; j < ness; ++j) {
          const EssSpec& e = cfg.esses[j];
          double next = ess_soc_update(e, ess_st[j].soc, r.pc[j], r.pd[j]);
          if (next > e.s_max + 1e-12) {
            double allowed = (e.s_max - ess_st[j].soc) * e.e_cap / e.eta_c;
            rep.violations.push_back({t, "ess_clip", next - e.s_max,
                                      e.name + " charge clipped"});
            ++rep.clip_events;
            r.pc[j] = std::max(0.0, allowed);
          } else if (next < e.s_min - 1e-12) {
            double allowed = (ess_st[j].soc - e.s_min) * e.e_cap * e.eta_d;
            rep.violations.push_back({t, "ess_clip", e.s_min - next,
                                      e.name + " discharge clipped"});
            ++rep.clip_events;
            r.pd[j] = std::max(0.0, allowed);
          }
        }
        std::vector<int> u_prev(ncg);
        for (int i = 0; i < ncg; ++i) u_prev[i] = cg_st[i].u_prev;
        double p_disp_exec = dispatchable_supply(r.p, r.pc, r.pd, r.pp, r.ps);
        r.cost_scheduled = slot_cost_J(
            cfg.cgs, u_prev, r.u, r.v, r.p, cfg.esses, r.pc, r.pd, cfg.market, t, r.pp,
            r.ps, cfg.qos, obs_used.d_net_hat(),
            std::max(r.w_sched, std::max(0.0, obs_used.d_net_hat() - p_disp_exec)));
      }

      r.p_disp = dispatchable_supply(r.p, r.pc, r.pd, r.pp, r.ps);
      r.d_ie = obs_used.d_ie;
      r.d_e = obs_used.d_e;
      r.p_rg = obs_used.p_rg;
      r.d_ie_hat = obs_used.d_ie_hat;
      r.d_e_hat = obs_used.d_e_hat;
      r.p_rg_hat = obs_used.p_rg_hat;
      rep.delta_net_max = std::max(rep.delta_net_max, obs_used.delta_net());

      // ---- scheduled-decision constraint checks ----
      double emis = 0.0;
      for (int i = 0; i < ncg; ++i) emis += cg_emission(cfg.cgs[i], r.p[i]);
      r.emission_kg = emis;
      if (emis > cfg.qos.emission_cap + tol)
        rep.violations.push_back({t, "emission", emis - cfg.qos.emission_cap, ""});
      double headroom = 0.0;
      for (int i = 0; i < ncg; ++i) {
        double avail = cfg.qos.reserve_committed_only ? cfg.cgs[i].p_max * r.u[i]
                                                      : cfg.cgs[i].p_max;
        headroom += avail - r.p[i];
      }
      if (headroom < cfg.qos.reserve_req - tol)
        rep.violations.push_back({t, "reserve", cfg.qos.reserve_req - headroom, ""});
      for (int i = 0; i < ncg; ++i) {
        double dp = std::fabs(r.p[i] - cg_st[i].p_prev);
        if (dp > cfg.cgs[i].ramp_kw() + tol)
          rep.violations.push_back(
              {t, "ramp", dp - cfg.cgs[i].ramp_kw(), cfg.cgs[i].name});
        if (sc.mode == SimMode::two_stage && r.u[i] == 1) {
          double cap = plan.tau[plan.at(i, k)] * cfg.cgs[i].ramp_kw();
          if (r.p[i] > cap + tol)
            rep.violations.push_back({t, "runout_cap", r.p[i] - cap, cfg.cgs[i].name});
        }
      }

      // ---- realize storage and check SOC ----
      for (int j = 0; j < ness; ++j) {
        const EssSpec& e = cfg.esses[j];
        double next = ess_soc_update(e, ess_st[j].soc, r.pc[j], r.pd[j]);
        if (next < e.s_min - tol || next > e.s_max + tol)
          rep.violations.push_back(
              {t, "soc", std::max(e.s_min - next, next - e.s_max), e.name});
        r.soc[j] = next;
        int sign = r.pc[j] > tol ? 1 : r.pd[j] > tol ? -1 : 0;
        if (sign != 0) {
          if (last_cycle_sign[j] != 0 && sign != last_cycle_sign[j])
            ++rep.ess_cycle_count;
          last_cycle_sign[j] = sign;
        }
      }

      // ---- realized accounting ----
      double unmet = r.d_ie + r.d_e - r.p_disp - r.p_rg;
      r.shortage_kw = std::min(std::max(unmet, 0.0), r.d_e);
      r.surplus_kw = std::max(-unmet, 0.0);
      if (unmet > r.d_e + tol)
        rep.violations.push_back({t, "qos_inelastic", unmet - r.d_e, ""});
      r.ratio_realized = r.d_e > 0 ? r.shortage_kw / r.d_e : 0.0;
      if (r.ratio_realized > cfg.qos.alpha_max + 1e-9)
        rep.violations.push_back(
            {t, "qos_alpha_max", r.ratio_realized - cfg.qos.alpha_max, ""});
      r.ratio_forecast = shortage_ratio(obs_used, r.p_disp, cfg.qos.d_e_min);

      r.cost_switch = 0.0;
      r.cost_fuel_maint = 0.0;
      for (int i = 0; i < ncg; ++i) {
        const CgSpec& g = cfg.cgs[i];
        r.cost_switch += g.c_su * (r.u[i] - r.v[i]) + g.c_sd * (cg_st[i].u_prev - r.v[i]);
        r.cost_fuel_maint +=
            g.fuel_quad * r.p[i] * r.p[i] + (g.fuel_lin + g.maint_lin) * r.p[i];
        if (r.u[i] != cg_st[i].u_prev) ++rep.start_stop_events;
      }
      r.cost_aging = 0.0;
      for (int j = 0; j < ness; ++j)
        r.cost_aging += ess_aging_cost(cfg.esses[j], r.pc[j], r.pd[j]);
      r.cost_market = market_cost(cfg.market, t, r.pp, r.ps);
      r.cost_shortage = cfg.qos.shortage_price * r.shortage_kw;
      r.cost_surplus = cfg.qos.surplus_price * r.surplus_kw;
      r.cost_total = r.cost_switch + r.cost_fuel_maint + r.cost_aging + r.cost_market +
                     r.cost_shortage + r.cost_surplus;

      // ---- advance state ----
      std::vector<double> soc_delta(ness);
      for (int j = 0; j < ness; ++j) {
        soc_delta[j] = r.soc[j] - ess_st[j].soc;
        ess_st[j].soc = r.soc[j];
      }
      for (int i = 0; i < ncg; ++i) detail::advance_cg_state(cg_st[i], r.u[i], r.p[i]);
      advance_queues(qs, cfg, r.ratio_forecast, soc_delta);
      r.q_after = qs.q;
      r.s_after = qs.s;

      rep.total_cost += r.cost_total;
      rep.total_switch += r.cost_switch;
      rep.total_fuel_maint += r.cost_fuel_maint;
      rep.total_aging += r.cost_aging;
      rep.total_market += r.cost_market;
      rep.total_shortage += r.cost_shortage;
      rep.total_surplus += r.cost_surplus;
      rep.total_scheduled += r.cost_scheduled;
      rep.total_emission_kg += r.emission_kg;
      rep.buy_kwh += r.pp;
      rep.sell_kwh += r.ps;
      rep.mean_ratio_forecast += r.ratio_forecast;
      rep.mean_ratio_realized += r.ratio_realized;

      rep.slots.push_back(std::move(r));
    }
  }

  rep.mean_ratio_forecast /= sc.horizon;
  rep.mean_ratio_realized /= sc.horizon;
  rep.q_final = qs.q;
  rep.b_const = drift_bound_constant(cfg, rep.delta_net_max);
  return rep;
}

// ---- rho sweep ----

struct RhoSweepRow {
  double rho = 0.0;
  double cost_two_stage = 0.0;
  double cost_one_stage = 0.0;
};

struct RhoSweepResult {
  std::vector<RhoSweepRow> rows;
  // Per-slot cumulative cost difference vs the smallest rho, per mode.
  std::vector<double> rho_values;
  std::vector<std::vector<double>> cum_diff_two;  // [rho index][slot]
  std::vector<std::vector<double>> cum_diff_one;
};

inline RhoSweepResult rho_sweep(const MicrogridConfig& cfg, const TraceSet& base,
                                const std::vector<double>& rho_list,
                                const ScenarioConfig& proto) {
  if (rho_list.empty()) throw ConfigError("rho sweep needs at least one value");
  for (double r : rho_list)
    if (r < 0) throw ConfigError("rho must be nonnegative");

  RhoSweepResult out;
  out.rho_values = rho_list;
  std::vector<std::vector<double>> series_two, series_one;
  for (double rho : rho_list) {
    TraceSet ts = base;
    regenerate_forecasts(ts, cfg.errors, rho, base.meta.seed);
    ScenarioConfig sc = proto;
    sc.rho = rho;
    sc.mode = SimMode::two_stage;
    SimReport two = run_scenario(cfg, ts, sc);
    sc.mode = SimMode::one_stage_only;
    SimReport one = run_scenario(cfg, ts, sc);
    out.rows.push_back({rho, two.total_cost, one.total_cost});
    auto cum = [](const SimReport& r) {
      std::vector<double> c(r.slots.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < r.slots.size(); ++i) {
        acc += r.slots[i].cost_total;
        c[i] = acc;
      }
      return c;
    };
    series_two.push_back(cum(two));
    series_one.push_back(cum(one));
  }
  std::size_t base_idx = 0;
  for (std::size_t i = 1; i < rho_list.size(); ++i)
    if (rho_list[i] < rho_list[base_idx]) base_idx = i;
  for (std::size_t i = 0; i < rho_list.size(); ++i) {
    std::vector<double> dt(series_two[i].size()), dv(series_one[i].size());
    for (std::size_t k = 0; k < dt.size(); ++k) {
      dt[k] = series_two[i][k] - series_two[base_idx][k];
      dv[k] = series_one[i][k] - series_one[base_idx][k];
    }
    out.cum_diff_two.push_back(std::move(dt));
    out.cum_diff_one.push_back(std::move(dv));
  }
  return out;
}

// ---- report writers (all byte-deterministic except where noted) ----

inline void write_report_slots_csv(const SimReport& rep, std::ostream& os) {
  int ncg = rep.slots.empty() ? 0 : static_cast<int>(rep.slots[0].u.size());
  int ness = rep.slots.empty() ? 0 : static_cast<int>(rep.slots[0].pc.size());
  os << "slot,d_ie_kw,d_e_kw,p_rg_kw,d_ie_hat_kw,d_e_hat_kw,p_rg_hat_kw";
  for (int i = 1; i <= ncg; ++i) os << ",u" << i << ",v" << i << ",p" << i << "_kw";
  for (int j = 1; j <= ness; ++j)
    os << ",pc" << j << "_kw,pd" << j << "_kw,soc" << j;
  os << ",pp_kw,ps_kw,w_sched_kw,p_disp_kw,shortage_kw,surplus_kw,ratio_forecast,"
        "ratio_realized,q";
  for (int j = 1; j <= ness; ++j) os << ",s" << j;
  os << ",cost_switch,cost_fuel_maint,cost_aging,cost_market,cost_shortage,"
        "cost_surplus,cost_total,cost_scheduled,emission_kg\n";
  for (const auto& r : rep.slots) {
    os << r.slot << "," << fmt_double(r.d_ie) << "," << fmt_double(r.d_e) << ","
       << fmt_double(r.p_rg) << "," << fmt_double(r.d_ie_hat) << ","
       << fmt_double(r.d_e_hat) << "," << fmt_double(r.p_rg_hat);
    for (int i = 0; i < ncg; ++i)
      os << "," << r.u[i] << "," << r.v[i] << "," << fmt_double(r.p[i]);
    for (int j = 0; j < ness; ++j)
      os << "," << fmt_double(r.pc[j]) << "," << fmt_double(r.pd[j]) << ","
         << fmt_double(r.soc[j]);
    os << "," << fmt_double(r.pp) << "," << fmt_double(r.ps) << ","
       << fmt_double(r.w_sched) << "," << fmt_double(r.p_disp) << ","
       << fmt_double(r.shortage_kw) << "," << fmt_double(r.surplus_kw) << ","
       << fmt_double(r.ratio_forecast) << "," << fmt_double(r.ratio_realized) << ","
       << fmt_double(r.q_after);
    for (int j = 0; j < ness; ++j) os << "," << fmt_double(r.s_after[j]);
    os << "," << fmt_double(r.cost_switch) << "," << fmt_double(r.cost_fuel_maint)
       << "," << fmt_double(r.cost_aging) << "," << fmt_double(r.cost_market) << ","
       << fmt_double(r.cost_shortage) << "," << fmt_double(r.cost_surplus) << ","
       << fmt_double(r.cost_total) << "," << fmt_double(r.cost_scheduled) << ","
       << fmt_double(r.emission_kg) << "\n";
  }
}

inline void write_summary_txt(const SimReport& rep, std::ostream& os) {
  int T = static_cast<int>(rep.slots.size());
  os << "mode: " << to_string(rep.scenario.mode) << "\n";
  os << "seed: " << rep.scenario.seed << "\n";
  os << "rho: " << fmt_double(rep.scenario.rho) << "\n";
  os << "horizon_slots: " << T << "\n";
  os << "ablation_omit_startstop: " << (rep.scenario.omit_startstop_cost ? 1 : 0) << "\n";
  os << "ablation_omit_aging: " << (rep.scenario.omit_ess_aging_cost ? 1 : 0) << "\n";
  if (rep.scenario.mode == SimMode::benchmark)
    os << "note: benchmark chains per-day error-free plans with carried states; it is "
          "not a whole-horizon optimum\n";
  os << "total_cost: " << fmt_double(rep.total_cost) << "\n";
  os << "cost_switch: " << fmt_double(rep.total_switch) << "\n";
  os << "cost_fuel_maint: " << fmt_double(rep.total_fuel_maint) << "\n";
  os << "cost_aging: " << fmt_double(rep.total_aging) << "\n";
  os << "cost_market: " << fmt_double(rep.total_market) << "\n";
  os << "cost_shortage: " << fmt_double(rep.total_shortage) << "\n";
  os << "cost_surplus: " << fmt_double(rep.total_surplus) << "\n";
  os << "total_scheduled_cost: " << fmt_double(rep.total_scheduled) << "\n";
  os << "total_emission_kg: " << fmt_double(rep.total_emission_kg) << "\n";
  os << "buy_kwh: " << fmt_double(rep.buy_kwh) << "\n";
  os << "sell_kwh: " << fmt_double(rep.sell_kwh) << "\n";
  os << "mean_shortage_ratio_forecast: " << fmt_double(rep.mean_ratio_forecast) << "\n";
  os << "mean_shortage_ratio_realized: " << fmt_double(rep.mean_ratio_realized) << "\n";
  os << "q_final: " << fmt_double(rep.q_final) << "\n";
  os << "queue_bound_mean_ratio: "
     << fmt_double(rep.scenario.horizon > 0
                       ? rep.q_final / rep.scenario.horizon
                       : 0.0)
     << "\n";
  os << "v: " << fmt_double(rep.lyap.v) << "\n";
  os << "v_max: " << fmt_double(rep.lyap.v_max) << "\n";
  for (std::size_t j = 0; j < rep.lyap.ess.size(); ++j)
    os << "beta" << j + 1 << ": " << fmt_double(rep.lyap.ess[j].beta) << "\n";
  os << "drift_bound_b: " << fmt_double(rep.b_const) << "\n";
  os << "delta_net_max_kw: " << fmt_double(rep.delta_net_max) << "\n";
  os << "start_stop_events: " << rep.start_stop_events << "\n";
  os << "ess_cycle_count: " << rep.ess_cycle_count << "\n";
  os << "ess_clip_events: " << rep.clip_events << "\n";
  os << "hard_violations: " << rep.hard_violation_count() << "\n";
  os << "violations_logged: " << rep.violations.size() << "\n";
  long nodes = 0, pivots = 0;
  for (const auto& s : rep.solves) {
    nodes += s.nodes;
    pivots += s.pivots;
  }
  os << "solver_nodes: " << nodes << "\n";
  os << "solver_pivots: " << pivots << "\n";
}

// Wall time sits in the final column so byte comparisons can strip it.
inline void write_dispatch_log_csv(const SimReport& rep, std::ostream& os) {
  os << "slot,stage,status,objective,gap,nodes,pivots,wall_s\n";
  for (const auto& s : rep.solves)
    os << s.slot << "," << s.stage << "," << s.status << "," << fmt_double(s.objective)
       << "," << fmt_double(s.gap) << "," << s.nodes << "," << s.pivots << ","
       << fmt_double(s.wall_s) << "\n";
}

inline void write_series_generation_csv(const SimReport& rep, std::ostream& os) {
  int ncg = rep.slots.empty() ? 0 : static_cast<int>(rep.slots[0].u.size());
  os << "slot";
  for (int i = 1; i <= ncg; ++i) os << ",p" << i << "_kw";
  os << ",ess_net_kw,wind_kw,purchase_kw,sale_kw,demand_kw,inelastic_kw\n";
  for (const auto& r : rep.slots) {
    os << r.slot;
    for (std::size_t i = 0; i < r.p.size(); ++i) os << "," << fmt_double(r.p[i]);
    double ess_net = 0.0;
    for (std::size_t j = 0; j < r.pc.size(); ++j) ess_net += r.pd[j] - r.pc[j];
    os << "," << fmt_double(ess_net) << "," << fmt_double(r.p_rg) << ","
       << fmt_double(r.pp) << "," << fmt_double(r.ps) << ","
       << fmt_double(r.d_ie + r.d_e) << "," << fmt_double(r.d_ie) << "\n";
  }
}

inline void write_series_costs_csv(const SimReport& rep, std::ostream& os) {
  os << "slot,cost_total,cost_cumulative\n";
  double acc = 0.0;
  for (const auto& r : rep.slots) {
    acc += r.cost_total;
    os << r.slot << "," << fmt_double(r.cost_total) << "," << fmt_double(acc) << "\n";
  }
}

inline void write_violations_csv(const SimReport& rep, std::ostream& os) {
  os << "slot,kind,amount,detail\n";
  for (const auto& v : rep.violations)
    os << v.slot << "," << v.kind << "," << fmt_double(v.amount) << "," << v.detail
       << "\n";
}

inline void write_rho_sweep_csv(const RhoSweepResult& res, std::ostream& os) {
  os << "rho,cost_two_stage,cost_one_stage\n";
  for (const auto& row : res.rows)
    os << fmt_double(row.rho) << "," << fmt_double(row.cost_two_stage) << ","
       << fmt_double(row.cost_one_stage) << "\n";
}

inline void write_rho_cum_diff_csv(const RhoSweepResult& res, std::ostream& os) {
  os << "slot";
  for (double r : res.rho_values) os << ",two_rho_" << fmt_double(r);
  for (double r : res.rho_values) os << ",one_rho_" << fmt_double(r);
  os << "\n";
  std::size_t T = res.cum_diff_two.empty() ? 0 : res.cum_diff_two[0].size();
  for (std::size_t k = 0; k < T; ++k) {
    os << k;
    for (const auto& s : res.cum_diff_two) os << "," << fmt_double(s[k]);
    for (const auto& s : res.cum_diff_one) os << "," << fmt_double(s[k]);
    os << "\n";
  }
}

}  // namespace mgems
