#pragma once

#include <string>
#include <vector>

#include "mgems/config.hpp"
#include "mgems/milp.hpp"
#include "mgems/model.hpp"
#include "mgems/pwl.hpp"

// Shared MILP emission for the scheduling problems. Both the 24-slot
// day-ahead build and the single-slot dispatch build produce the same
// per-slot block structure; they differ only in horizon length, which forecast
// view fills the slot inputs, the dispatch-band width, and whether commitment
// variables arrive fixed.
//
// Per-slot variable block (slot-major):
//   per CG i:  u v p zf      (commitment, run-continuation, output, fuel cost)
//   per ESS j: pc pd vc s gc gd z
//              (rates, charge indicator, SOC, squared-rate carriers, aging cost)
//   shared:    pp ps w       (purchase, sale, scheduled elastic shortfall)

namespace mgems {

struct Linearization {
  std::vector<PwlCurve> fuel;  // per CG over [0, p_max]
  std::vector<PwlCurve> sq_c;  // x^2 over [0, p_c_max] per ESS
  std::vector<PwlCurve> sq_d;  // x^2 over [0, p_d_max] per ESS
};

inline Linearization make_linearization(const MicrogridConfig& cfg) {
  Linearization lin;
  for (const auto& g : cfg.cgs)
    lin.fuel.push_back(
        approximate_quadratic(g.fuel_quad, g.fuel_lin, 0.0, g.p_max, cfg.fuel_segments));
  for (const auto& e : cfg.esses) {
    lin.sq_c.push_back(approximate_quadratic(1.0, 0.0, 0.0, e.p_c_max, cfg.aging_segments));
    lin.sq_d.push_back(approximate_quadratic(1.0, 0.0, 0.0, e.p_d_max, cfg.aging_segments));
  }
  return lin;
}

struct GridLayout {
  int T = 0, ncg = 0, ness = 0, stride = 0;

  void init(int horizon, int n_cg, int n_ess) {
    T = horizon;
    ncg = n_cg;
    ness = n_ess;
    stride = 4 * ncg + 7 * ness + 3;
  }
  int u(int i, int t) const { return t * stride + i; }
  int v(int i, int t) const { return t * stride + ncg + i; }
  int p(int i, int t) const { return t * stride + 2 * ncg + i; }
  int zf(int i, int t) const { return t * stride + 3 * ncg + i; }
  int pc(int j, int t) const { return t * stride + 4 * ncg + 7 * j; }
  int pd(int j, int t) const { return t * stride + 4 * ncg + 7 * j + 1; }
  int vc(int j, int t) const { return t * stride + 4 * ncg + 7 * j + 2; }
  int s(int j, int t) const { return t * stride + 4 * ncg + 7 * j + 3; }
  int gc(int j, int t) const { return t * stride + 4 * ncg + 7 * j + 4; }
  int gd(int j, int t) const { return t * stride + 4 * ncg + 7 * j + 5; }
  int z(int j, int t) const { return t * stride + 4 * ncg + 7 * j + 6; }
  int pp(int t) const { return t * stride + 4 * ncg + 7 * ness; }
  int ps(int t) const { return t * stride + 4 * ncg + 7 * ness + 1; }
  int w(int t) const { return t * stride + 4 * ncg + 7 * ness + 2; }
  int n_vars() const { return T * stride; }
};

struct SlotInputs {
  SlotObservation obs;
  int slot_abs = 0;    // absolute slot index, selects market prices
  double alpha = 0.0;  // dispatch-band width factor for this slot
};

struct FormulationFlags {
  bool price_switching = true;  // charge start/stop costs in the objective
  bool price_aging = true;      // charge storage aging in the objective
};

// Fixed commitment for the dispatch-stage build; indexed t * ncg + i.
struct CommitFixing {
  std::vector<int> u;
  std::vector<int> v;
  std::vector<double> p_cap;  // extra upper bound on output (run-out ramp cap)
};

struct GridProblem {
  MilpModel model;
  GridLayout lay;
};

namespace detail {

inline std::string nm(const char* base, int unit, int t) {
  return std::string(base) + std::to_string(unit) + "_t" + std::to_string(t);
}
inline std::string nm(const char* base, int t) {
  return std::string(base) + "_t" + std::to_string(t);
}

}  // namespace detail

inline GridProblem build_grid_milp(const MicrogridConfig& cfg, const Linearization& lin,
                                   const std::vector<SlotInputs>& slots,
                                   const std::vector<CgState>& cg0,
                                   const std::vector<EssState>& ess0,
                                   const FormulationFlags& flags = {},
                                   double avg_ratio_cap = -1.0,
                                   const CommitFixing* fix = nullptr,
                                   const std::string& name = "grid") {
  using detail::nm;
  const int T = static_cast<int>(slots.size());
  const int ncg = static_cast<int>(cfg.cgs.size());
  const int ness = static_cast<int>(cfg.esses.size());
  if (T < 1) throw std::invalid_argument("formulation: empty horizon");
  if (static_cast<int>(cg0.size()) != ncg || static_cast<int>(ess0.size()) != ness)
    throw std::invalid_argument("formulation: boundary state count mismatch");
  if (static_cast<int>(lin.fuel.size()) != ncg ||
      static_cast<int>(lin.sq_c.size()) != ness)
    throw std::invalid_argument("formulation: linearization does not match fleet");
  if (fix && (static_cast<int>(fix->u.size()) != ncg * T ||
              static_cast<int>(fix->v.size()) != ncg * T ||
              static_cast<int>(fix->p_cap.size()) != ncg * T))
    throw std::invalid_argument("formulation: fixing size mismatch");
  for (int j = 0; j < ness; ++j) {
    const EssSpec& e = cfg.esses[j];
    if (ess0[j].soc < e.s_min - 1e-9 || ess0[j].soc > e.s_max + 1e-9)
      throw std::invalid_argument(e.name + ": boundary state of charge outside limits");
  }

  GridProblem gp;
  gp.lay.init(T, ncg, ness);
  const GridLayout& L = gp.lay;
  MilpModel& m = gp.model;
  m.name = name;

  // ---- variables ----
  auto u_bounds = [&](int i, int t, double& lo, double& up) {
    lo = 0.0;
    up = 1.0;
    if (fix) {
      lo = up = fix->u[t * ncg + i];
      return;
    }
    const CgSpec& g = cfg.cgs[i];
    const CgState& st = cg0[i];
    // Boundary run-length deficit pins the first few commitments.
    if (st.u_prev == 1 && st.t_on < g.t_on_min && t < g.t_on_min - st.t_on) lo = 1.0;
    if (st.u_prev == 0 && st.t_off < g.t_off_min && t < g.t_off_min - st.t_off) up = 0.0;
  };
  auto v_bounds = [&](int i, int t, double& lo, double& up) {
    lo = 0.0;
    up = 1.0;
    if (fix) {
      lo = up = fix->v[t * ncg + i];
      return;
    }
    if (t == 0 && cg0[i].u_prev == 0) up = 0.0;  // v <= u_{t-1}, previous slot constant
  };
  for (int t = 0; t < T; ++t) {
    const SlotInputs& in = slots[t];
    for (int i = 0; i < ncg; ++i) {
      double lo, up;
      u_bounds(i, t, lo, up);
      m.add_var(nm("u", i + 1, t), lo, up, true);
    }
    for (int i = 0; i < ncg; ++i) {
      double lo, up;
      v_bounds(i, t, lo, up);
      m.add_var(nm("v", i + 1, t), lo, up, true);
    }
    for (int i = 0; i < ncg; ++i) {
      double pup = cfg.cgs[i].p_max;
      if (fix) pup = std::min(pup, fix->p_cap[t * ncg + i]);
      m.add_var(nm("p", i + 1, t), 0.0, pup, false);
    }
    for (int i = 0; i < ncg; ++i)
      m.add_var(nm("zf", i + 1, t), 0.0, lin.fuel[i].pts.back().y, false);
    for (int j = 0; j < ness; ++j) {
      const EssSpec& e = cfg.esses[j];
      double n_mod = static_cast<double>(e.n_modules());
      double zmax = 0.0;
      for (const auto& seg : e.aging) {
        double c_part = e.gamma * e.eta_c *
                        (1000.0 * seg.a * e.p_c_max * e.p_c_max + n_mod * seg.b * e.p_c_max);
        double d_part = (1.0 - e.gamma) / e.eta_d *
                        (1000.0 * seg.a * e.p_d_max * e.p_d_max + n_mod * seg.b * e.p_d_max);
        zmax = std::max(zmax, c_part + d_part);
      }
      m.add_var(nm("pc", j + 1, t), 0.0, e.p_c_max, false);
      m.add_var(nm("pd", j + 1, t), 0.0, e.p_d_max, false);
      m.add_var(nm("vc", j + 1, t), 0.0, 1.0, true);
      m.add_var(nm("s", j + 1, t), e.s_min, e.s_max, false);
      m.add_var(nm("gc", j + 1, t), 0.0, lin.sq_c[j].pts.back().y, false);
      m.add_var(nm("gd", j + 1, t), 0.0, lin.sq_d[j].pts.back().y, false);
      m.add_var(nm("z", j + 1, t), 0.0, zmax + 1.0, false);
    }
    double w_up = std::max(0.0, in.alpha * (in.obs.d_e_hat + in.obs.delta_e));
    m.add_var(nm("pp", t), 0.0, cfg.market.p_p_max, false);
    m.add_var(nm("ps", t), 0.0, cfg.market.p_s_max, false);
    m.add_var(nm("w", t), 0.0, w_up, false);
  }

  // ---- objective ----
  const double sp = cfg.qos.surplus_price;
  for (int t = 0; t < T; ++t) {
    const SlotInputs& in = slots[t];
    for (int i = 0; i < ncg; ++i) {
      const CgSpec& g = cfg.cgs[i];
      if (flags.price_switching) {
        m.add_obj(L.u(i, t), g.c_su);
        if (t + 1 < T) m.add_obj(L.u(i, t), g.c_sd);  // appears in the next slot's cost
        m.add_obj(L.v(i, t), -(g.c_su + g.c_sd));
        if (t == 0) m.obj_offset += g.c_sd * cg0[i].u_prev;
      }
      m.add_obj(L.p(i, t), g.maint_lin + sp);
      m.add_obj(L.zf(i, t), 1.0);
    }
    for (int j = 0; j < ness; ++j) {
      const EssSpec& e = cfg.esses[j];
      if (flags.price_aging && !e.aging.empty()) m.add_obj(L.z(j, t), e.aging_scale());
      m.add_obj(L.pc(j, t), -sp);
      m.add_obj(L.pd(j, t), sp);
    }
    m.add_obj(L.pp(t), cfg.market.buy_at(in.slot_abs) + sp);
    m.add_obj(L.ps(t), -(cfg.market.sell_at(in.slot_abs) + sp));
    m.add_obj(L.w(t), cfg.qos.shortage_price + sp);
    m.obj_offset -= sp * in.obs.d_net_hat();
  }

  // ---- rows ----
  for (int t = 0; t < T; ++t) {
    const SlotInputs& in = slots[t];

    for (int i = 0; i < ncg; ++i) {
      const CgSpec& g = cfg.cgs[i];
      m.add_row(nm("pmax", i + 1, t), RowSense::le, 0.0,
                {{L.p(i, t), 1.0}, {L.u(i, t), -g.p_max}});
      m.add_row(nm("pmin", i + 1, t), RowSense::le, 0.0,
                {{L.u(i, t), g.p_min}, {L.p(i, t), -1.0}});
      double rk = g.ramp_kw();
      if (t == 0) {
        m.add_row(nm("rup", i + 1, t), RowSense::le, cg0[i].p_prev + rk,
                  {{L.p(i, t), 1.0}});
        m.add_row(nm("rdn", i + 1, t), RowSense::le, rk - cg0[i].p_prev,
                  {{L.p(i, t), -1.0}});
      } else {
        m.add_row(nm("rup", i + 1, t), RowSense::le, rk,
                  {{L.p(i, t), 1.0}, {L.p(i, t - 1), -1.0}});
        m.add_row(nm("rdn", i + 1, t), RowSense::le, rk,
                  {{L.p(i, t - 1), 1.0}, {L.p(i, t), -1.0}});
      }
      if (!fix) {
        // Run-continuation linking: v = u_t AND u_{t-1} once commitments are binary.
        m.add_row(nm("vlu", i + 1, t), RowSense::le, 0.0,
                  {{L.v(i, t), 1.0}, {L.u(i, t), -1.0}});
        if (t == 0) {
          m.add_row(nm("vge", i + 1, t), RowSense::le, 1.0 - cg0[i].u_prev,
                    {{L.u(i, t), 1.0}, {L.v(i, t), -1.0}});
        } else {
          m.add_row(nm("vlp", i + 1, t), RowSense::le, 0.0,
                    {{L.v(i, t), 1.0}, {L.u(i, t - 1), -1.0}});
          m.add_row(nm("vge", i + 1, t), RowSense::le, 1.0,
                    {{L.u(i, t), 1.0}, {L.u(i, t - 1), 1.0}, {L.v(i, t), -1.0}});
        }
        // Minimum run lengths, forward form.
        for (int tau = t + 1; tau < std::min(T, t + g.t_on_min); ++tau)
          m.add_row(nm("on", i + 1, t) + "_" + std::to_string(tau), RowSense::le, 0.0,
                    {{L.u(i, t), 1.0}, {L.v(i, t), -1.0}, {L.u(i, tau), -1.0}});
        for (int tau = t + 1; tau < std::min(T, t + g.t_off_min); ++tau) {
          if (t == 0) {
            m.add_row(nm("off", i + 1, t) + "_" + std::to_string(tau), RowSense::le,
                      1.0 - cg0[i].u_prev, {{L.u(i, tau), 1.0}, {L.v(i, t), -1.0}});
          } else {
            m.add_row(nm("off", i + 1, t) + "_" + std::to_string(tau), RowSense::le, 1.0,
                      {{L.u(i, tau), 1.0}, {L.u(i, t - 1), 1.0}, {L.v(i, t), -1.0}});
          }
        }
      }
      add_pwl_epigraph(m, lin.fuel[i], L.p(i, t), L.zf(i, t), nm("f", i + 1, t));
    }

    for (int j = 0; j < ness; ++j) {
      const EssSpec& e = cfg.esses[j];
      m.add_row(nm("cmax", j + 1, t), RowSense::le, 0.0,
                {{L.pc(j, t), 1.0}, {L.vc(j, t), -e.p_c_max}});
      m.add_row(nm("dmax", j + 1, t), RowSense::le, e.p_d_max,
                {{L.pd(j, t), 1.0}, {L.vc(j, t), e.p_d_max}});
      std::vector<std::pair<int, double>> soc = {{L.s(j, t), 1.0},
                                                 {L.pc(j, t), -e.eta_c / e.e_cap},
                                                 {L.pd(j, t), 1.0 / (e.eta_d * e.e_cap)}};
      double rhs = 0.0;
      if (t == 0)
        rhs = ess0[j].soc;
      else
        soc.push_back({L.s(j, t - 1), -1.0});
      m.add_row(nm("soc", j + 1, t), RowSense::eq, rhs, std::move(soc));
      add_pwl_epigraph(m, lin.sq_c[j], L.pc(j, t), L.gc(j, t), nm("qc", j + 1, t));
      add_pwl_epigraph(m, lin.sq_d[j], L.pd(j, t), L.gd(j, t), nm("qd", j + 1, t));
      double n_mod = static_cast<double>(e.n_modules());
      for (std::size_t k = 0; k < e.aging.size(); ++k) {
        const AgingSegment& seg = e.aging[k];
        double cc = e.gamma * e.eta_c;
        double cd = (1.0 - e.gamma) / e.eta_d;
        m.add_row(nm("age", j + 1, t) + "_" + std::to_string(k), RowSense::le, 0.0,
                  {{L.pc(j, t), cc * n_mod * seg.b},
                   {L.gc(j, t), cc * 1000.0 * seg.a},
                   {L.pd(j, t), cd * n_mod * seg.b},
                   {L.gd(j, t), cd * 1000.0 * seg.a},
                   {L.z(j, t), -1.0}});
      }
    }

    auto supply = [&](double extra_w) {
      std::vector<std::pair<int, double>> c;
      for (int i = 0; i < ncg; ++i) c.push_back({L.p(i, t), 1.0});
      for (int j = 0; j < ness; ++j) {
        c.push_back({L.pc(j, t), -1.0});
        c.push_back({L.pd(j, t), 1.0});
      }
      c.push_back({L.pp(t), 1.0});
      c.push_back({L.ps(t), -1.0});
      if (extra_w != 0.0) c.push_back({L.w(t), extra_w});
      return c;
    };
    DispBounds band = disp_bounds(in.obs, in.alpha);
    m.add_row(nm("bup", t), RowSense::le, band.upper, supply(0.0));
    m.add_row(nm("blo", t), RowSense::ge, band.lower, supply(0.0));
    m.add_row(nm("wlink", t), RowSense::ge, in.obs.d_net_hat(), supply(1.0));

    std::vector<std::pair<int, double>> emis;
    for (int i = 0; i < ncg; ++i)
      if (cfg.cgs[i].emis_lin != 0.0) emis.push_back({L.p(i, t), cfg.cgs[i].emis_lin});
    m.add_row(nm("emis", t), RowSense::le, cfg.qos.emission_cap, std::move(emis));

    std::vector<std::pair<int, double>> res;
    double res_rhs = -cfg.qos.reserve_req;
    for (int i = 0; i < ncg; ++i) {
      res.push_back({L.p(i, t), 1.0});
      if (cfg.qos.reserve_committed_only)
        res.push_back({L.u(i, t), -cfg.cgs[i].p_max});
      else
        res_rhs += cfg.cgs[i].p_max;
    }
    m.add_row(nm("res", t), RowSense::le, res_rhs, std::move(res));
  }

  if (avg_ratio_cap >= 0.0) {
    std::vector<std::pair<int, double>> avg;
    for (int t = 0; t < T; ++t) {
      double den = std::max(slots[t].obs.d_e_hat, cfg.qos.d_e_min);
      avg.push_back({L.w(t), 1.0 / den});
    }
    m.add_row("avgratio", RowSense::le, avg_ratio_cap, std::move(avg));
  }

  m.validate();
  return gp;
}

// Exact cost of one slot of a grid MILP solution, evaluated with the true
// quadratic costs rather than the PWL surrogates.
inline double grid_slot_cost_exact(const MicrogridConfig& cfg, const GridLayout& L,
                                   const std::vector<double>& x, int t,
                                   const SlotInputs& in, const std::vector<CgState>& cg0) {
  std::vector<int> u_prev(L.ncg), u(L.ncg), v(L.ncg);
  std::vector<double> p(L.ncg), pcv(L.ness), pdv(L.ness);
  for (int i = 0; i < L.ncg; ++i) {
    u_prev[i] = t == 0 ? cg0[i].u_prev
                       : static_cast<int>(std::lround(x[L.u(i, t - 1)]));
    u[i] = static_cast<int>(std::lround(x[L.u(i, t)]));
    v[i] = static_cast<int>(std::lround(x[L.v(i, t)]));
    p[i] = x[L.p(i, t)];
  }
  for (int j = 0; j < L.ness; ++j) {
    pcv[j] = x[L.pc(j, t)];
    pdv[j] = x[L.pd(j, t)];
  }
  return slot_cost_J(cfg.cgs, u_prev, u, v, p, cfg.esses, pcv, pdv, cfg.market,
                     in.slot_abs, x[L.pp(t)], x[L.ps(t)], cfg.qos,
                     in.obs.d_net_hat(), x[L.w(t)]);
}

}  // namespace mgems
