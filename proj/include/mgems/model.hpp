#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "mgems/common.hpp"

// Physical device models and exact per-slot cost evaluation. Everything here
// is closed-form; the MILP layer approximates the two quadratic cost families
// (generator fuel, storage aging) and this layer is the ground truth those
// approximations are checked against.

namespace mgems {

struct CgSpec {
  std::string name;
  double p_min = 0.0;          // kW, minimum stable output when committed
  double p_max = 0.0;          // kW
  double ramp = 1.0;           // per-slot ramp limit as a fraction of p_max
  int t_on_min = 1;            // slots
  int t_off_min = 1;           // slots
  double c_su = 0.0;           // $ per start
  double c_sd = 0.0;           // $ per stop
  double fuel_quad = 0.0;      // $/kW^2
  double fuel_lin = 0.0;       // $/kWh
  double maint_lin = 0.0;      // $/kWh
  double emis_lin = 0.0;       // kg/kWh

  double ramp_kw() const { return ramp * p_max; }
};

struct CgState {
  int u_prev = 0;       // commitment in the slot before the horizon
  double p_prev = 0.0;  // output in that slot, kW
  int t_on = 0;         // completed on-run length at the boundary, slots
  int t_off = 0;        // completed off-run length at the boundary, slots
};

struct AgingSegment {
  double a = 0.0;  // quadratic coefficient of the per-module life-loss fit
  double b = 0.0;  // linear coefficient
};

struct EssSpec {
  std::string name;
  double e_cap = 0.0;     // kWh
  double s_min = 0.0;     // SOC fraction
  double s_max = 1.0;
  double p_c_max = 0.0;   // kW
  double p_d_max = 0.0;   // kW
  double eta_c = 1.0;
  double eta_d = 1.0;
  double unit_cost = 0.0;   // $/Wh of cell capacity
  double gamma = 0.5;       // charge share of aging attribution
  double module_kwh = 0.0081;
  std::vector<AgingSegment> aging;

  long n_modules() const {
    return module_kwh > 0 ? std::lround(e_cap / module_kwh) : 0;
  }
  // Prefactor of the aging epigraph objective term.
  double aging_scale() const { return unit_cost / (0.8 * e_cap); }
};

struct EssState {
  double soc = 0.5;
};

struct MarketSpec {
  std::array<double, 24> buy_price{};   // $/kWh by hour of day
  std::array<double, 24> sell_price{};  // $/kWh by hour of day
  double p_p_max = 0.0;                 // kW purchase cap
  double p_s_max = 0.0;                 // kW sale cap

  double buy_at(int slot) const { return buy_price[((slot % 24) + 24) % 24]; }
  double sell_at(int slot) const { return sell_price[((slot % 24) + 24) % 24]; }
};

struct QosSpec {
  double alpha_avg = 0.0;       // long-run cap on mean elastic shortage ratio
  double alpha_max = 0.0;       // per-slot cap
  double shortage_price = 0.0;  // $/kWh unserved elastic demand
  double surplus_price = 0.0;   // $/kWh oversupply
  double emission_cap = kInf;   // kg per slot
  double reserve_req = 0.0;     // kW of spinning reserve per slot
  bool reserve_committed_only = false;  // count only committed units' headroom
  double d_e_min = 1e-9;        // kW, lower bound on elastic demand per slot
};

// One slot as seen by an optimizer: realized values plus the forecast and its
// certified error bound for whichever horizon (day-ahead or hour-ahead) the
// caller selected.
struct SlotObservation {
  double d_ie = 0.0;  // inelastic demand, kW (true)
  double d_e = 0.0;   // elastic demand, kW (true)
  double p_rg = 0.0;  // renewable output, kW (true)
  double d_ie_hat = 0.0;
  double d_e_hat = 0.0;
  double p_rg_hat = 0.0;
  double delta_ie = 0.0;
  double delta_e = 0.0;
  double delta_rg = 0.0;

  double d_net() const { return d_ie + d_e - p_rg; }
  double d_net_hat() const { return d_ie_hat + d_e_hat - p_rg_hat; }
  double delta_net() const { return delta_ie + delta_e + delta_rg; }
};

// ---- exact cost/physics evaluation ----

// Start/stop + fuel + maintenance of one generator for one slot.
inline double cg_cost(const CgSpec& cg, int u_prev, int u, int v, double p) {
  if (p < -1e-9) throw std::invalid_argument(cg.name + ": negative output");
  if (u == 0 && p > 1e-9)
    throw std::invalid_argument(cg.name + ": positive output while offline");
  if (v > u || v > u_prev)
    throw std::invalid_argument(cg.name + ": start/stop indicator exceeds commitment");
  double start = cg.c_su * (u - v);
  double stop = cg.c_sd * (u_prev - v);
  double fuel = cg.fuel_quad * p * p + cg.fuel_lin * p;
  double maint = cg.maint_lin * p;
  return start + stop + fuel + maint;
}

inline double cg_emission(const CgSpec& cg, double p) {
  if (p < -1e-9) throw std::invalid_argument(cg.name + ": negative output");
  return cg.emis_lin * p;
}

inline void check_ess_rates(const EssSpec& ess, double p_c, double p_d) {
  if (p_c < -1e-9 || p_d < -1e-9)
    throw std::invalid_argument(ess.name + ": negative rate");
  if (p_c > 1e-9 && p_d > 1e-9)
    throw std::invalid_argument(ess.name + ": simultaneous charge and discharge");
}

inline double ess_soc_update(const EssSpec& ess, double soc, double p_c, double p_d) {
  check_ess_rates(ess, p_c, p_d);
  return soc + (ess.eta_c * p_c - p_d / ess.eta_d) / ess.e_cap;
}

// Per-module life-loss envelope at meter-side rate x; the aging cost takes the
// max of this expression over the fitted segments.
inline double ess_aging_envelope(const EssSpec& ess, double x) {
  double n = static_cast<double>(ess.n_modules());
  double best = -kInf;
  for (const auto& seg : ess.aging)
    best = std::max(best, 1000.0 * seg.a * x * x + n * seg.b * x);
  return ess.aging.empty() ? 0.0 : best;
}

inline double ess_aging_cost(const EssSpec& ess, double p_c, double p_d) {
  check_ess_rates(ess, p_c, p_d);
  if (ess.aging.empty()) return 0.0;
  double n = static_cast<double>(ess.n_modules());
  double z = -kInf;
  for (const auto& seg : ess.aging) {
    double charge = 1000.0 * seg.a * p_c * p_c + n * seg.b * p_c;
    double discharge = 1000.0 * seg.a * p_d * p_d + n * seg.b * p_d;
    z = std::max(z, ess.gamma * ess.eta_c * charge +
                        (1.0 - ess.gamma) * discharge / ess.eta_d);
  }
  return ess.aging_scale() * z;
}

inline double market_cost(const MarketSpec& m, int slot, double p_p, double p_s) {
  if (p_p < -1e-9 || p_s < -1e-9) throw std::invalid_argument("market: negative trade");
  if (p_p > m.p_p_max + 1e-6 || p_s > m.p_s_max + 1e-6)
    throw std::invalid_argument("market: trade above cap");
  return m.buy_at(slot) * p_p - m.sell_at(slot) * p_s;
}

inline double dispatchable_supply(const std::vector<double>& p_cg,
                                  const std::vector<double>& p_c,
                                  const std::vector<double>& p_d, double p_p,
                                  double p_s) {
  double total = p_p - p_s;
  for (double p : p_cg) total += p;
  for (std::size_t i = 0; i < p_d.size(); ++i) total += p_d[i];
  for (std::size_t i = 0; i < p_c.size(); ++i) total -= p_c[i];
  return total;
}

struct DispBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Allowed band for dispatched supply: cover net demand up to the permitted
// elastic shedding fraction, never oversupply beyond forecast uncertainty.
inline DispBounds disp_bounds(const SlotObservation& obs, double alpha) {
  DispBounds b;
  b.upper = obs.d_net_hat() + obs.delta_net();
  b.lower = b.upper - alpha * (obs.d_e_hat + obs.delta_e);
  return b;
}

// w is the scheduled elastic shortfall; the surplus leg prices everything
// supplied beyond forecast net demand.
inline double shortage_surplus_cost(const QosSpec& qos, double d_net_hat,
                                    double p_disp, double w) {
  if (w < -1e-9) throw std::invalid_argument("shortage: negative w");
  double surplus = p_disp - d_net_hat + w;
  if (surplus < -1e-6)
    throw std::invalid_argument("shortage: w below unmet net demand");
  return qos.shortage_price * w + qos.surplus_price * std::max(surplus, 0.0);
}

// Full scheduled slot cost; additive over the components above.
inline double slot_cost_J(const std::vector<CgSpec>& cgs,
                          const std::vector<int>& u_prev, const std::vector<int>& u,
                          const std::vector<int>& v, const std::vector<double>& p,
                          const std::vector<EssSpec>& esses,
                          const std::vector<double>& p_c,
                          const std::vector<double>& p_d, const MarketSpec& market,
                          int slot, double p_p, double p_s, const QosSpec& qos,
                          double d_net_hat, double w) {
  double total = 0.0;
  for (std::size_t i = 0; i < cgs.size(); ++i)
    total += cg_cost(cgs[i], u_prev[i], u[i], v[i], p[i]);
  for (std::size_t j = 0; j < esses.size(); ++j)
    total += ess_aging_cost(esses[j], p_c[j], p_d[j]);
  total += market_cost(market, slot, p_p, p_s);
  double p_disp = dispatchable_supply(p, p_c, p_d, p_p, p_s);
  total += shortage_surplus_cost(qos, d_net_hat, p_disp, w);
  return total;
}

}  // namespace mgems
