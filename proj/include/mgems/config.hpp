#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mgems/common.hpp"
#include "mgems/forecast.hpp"
#include "mgems/model.hpp"

// Aggregate configuration: unit fleet, market, service levels, forecast error
// model, linearization resolution, and solver budgets. Defaults describe the
// reference microgrid used throughout the tests; an INI file can override any
// field (see README for the schema).

namespace mgems {

struct SolverBudgets {
  double uc_gap_target = 0.02;
  long uc_node_limit = 600;
  long uc_pivot_limit = 40000000;
  double uc_time_limit_s = 600.0;
  long p1_pivot_limit = 2000000;
  double p1_time_limit_s = 60.0;
};

struct MicrogridConfig {
  std::vector<CgSpec> cgs;
  std::vector<CgState> cg_init;
  std::vector<EssSpec> esses;
  std::vector<EssState> ess_init;
  MarketSpec market;
  QosSpec qos;
  ErrorModel errors;
  TraceProfile profile;
  int fuel_segments = 8;
  int aging_segments = 8;
  double v_scale = 1.0;      // fraction of the stability-preserving maximum weight
  double v_explicit = -1.0;  // >= 0 overrides v_scale with an absolute weight
  SolverBudgets budgets;

  void validate() const;
};

// ---- defaults ----

inline std::vector<AgingSegment> default_aging_segments() {
  return {{0.0020, 0.0086}, {0.0026, 0.0060}, {0.0134, -0.0884}};
}

inline MicrogridConfig default_config() {
  MicrogridConfig c;

  auto cg = [](const char* name, double pmin, double pmax, double ramp, int ton, int toff,
               double sw, double fq, double fl, double maint, double emis) {
    CgSpec g;
    g.name = name;
    g.p_min = pmin;
    g.p_max = pmax;
    g.ramp = ramp;
    g.t_on_min = ton;
    g.t_off_min = toff;
    g.c_su = sw;
    g.c_sd = sw;
    g.fuel_quad = fq;
    g.fuel_lin = fl;
    g.maint_lin = maint;
    g.emis_lin = emis;
    return g;
  };
  c.cgs = {
      cg("cg1", 90, 600, 0.60, 2, 2, 49.2, 1.72e-6, 0.055, 0.026, 0.475),
      cg("cg2", 200, 1000, 0.55, 3, 3, 79.7, 1.66e-6, 0.053, 0.025, 0.472),
      cg("cg3", 350, 1400, 0.50, 4, 4, 108.1, 1.59e-6, 0.051, 0.024, 0.465),
  };
  CgState cold;
  cold.t_off = 24;  // long past any minimum off time, free to start immediately
  c.cg_init.assign(3, cold);

  auto ess = [](const char* name, double ecap, double pc, double pd, double ec, double ed) {
    EssSpec e;
    e.name = name;
    e.e_cap = ecap;
    e.s_min = 0.2;
    e.s_max = 0.9;
    e.p_c_max = pc;
    e.p_d_max = pd;
    e.eta_c = ec;
    e.eta_d = ed;
    e.aging = default_aging_segments();
    e.module_kwh = 0.0081;
    e.unit_cost = 0.25;
    e.gamma = 0.5;
    return e;
  };
  c.esses = {ess("ess1", 480, 34, 25, 0.82, 0.88), ess("ess2", 720, 49, 37, 0.85, 0.90)};
  c.ess_init = {EssState{0.5}, EssState{0.6}};

  for (int h = 0; h < 24; ++h) {
    double buy;
    if (h >= 12 && h < 18)
      buy = 0.232;
    else if ((h >= 8 && h < 12) || (h >= 18 && h < 20))
      buy = 0.103;
    else
      buy = 0.056;
    c.market.buy_price[h] = buy;
    c.market.sell_price[h] = 0.6 * buy;
  }
  c.market.p_p_max = 1000.0;
  c.market.p_s_max = 1000.0;

  c.qos.alpha_avg = 0.3;
  c.qos.alpha_max = 0.4;
  c.qos.shortage_price = 0.06;
  c.qos.surplus_price = 0.07;
  c.qos.emission_cap = 1337.6;
  c.qos.reserve_req = 150.0;
  c.qos.d_e_min = 50.0;

  return c;
}

inline void MicrogridConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (cgs.size() != cg_init.size()) fail("cg state count does not match cg count");
  if (esses.size() != ess_init.size()) fail("ess state count does not match ess count");
  for (std::size_t i = 0; i < cgs.size(); ++i) {
    const CgSpec& g = cgs[i];
    std::string who = "cg." + std::to_string(i + 1) + ": ";
    if (!(g.p_min >= 0) || !(g.p_max >= g.p_min)) fail(who + "bad power range");
    if (!(g.ramp > 0) || g.ramp > 1) fail(who + "ramp fraction outside (0,1]");
    if (g.t_on_min < 1 || g.t_off_min < 1) fail(who + "min on/off times must be >= 1");
    if (g.c_su < 0 || g.c_sd < 0) fail(who + "negative switching cost");
    if (g.fuel_quad < 0 || g.fuel_lin < 0 || g.maint_lin < 0 || g.emis_lin < 0)
      fail(who + "negative cost coefficient");
    const CgState& st = cg_init[i];
    if (st.u_prev != 0 && st.u_prev != 1) fail(who + "initial commitment must be 0 or 1");
    if (st.u_prev == 1 && (st.p_prev < g.p_min - 1e-9 || st.p_prev > g.p_max + 1e-9))
      fail(who + "initial power outside range while on");
    if (st.u_prev == 0 && st.p_prev != 0.0) fail(who + "initial power nonzero while off");
    if (st.t_on < 0 || st.t_off < 0) fail(who + "negative run length");
    if (st.u_prev == 1 && (st.t_on < 1 || st.t_off != 0))
      fail(who + "an on unit needs t_on >= 1 and t_off = 0");
    if (st.u_prev == 0 && (st.t_off < 1 || st.t_on != 0))
      fail(who + "an off unit needs t_off >= 1 and t_on = 0");
  }
  for (std::size_t i = 0; i < esses.size(); ++i) {
    const EssSpec& e = esses[i];
    std::string who = "ess." + std::to_string(i + 1) + ": ";
    if (!(e.e_cap > 0)) fail(who + "capacity must be positive");
    if (!(e.s_min >= 0) || !(e.s_max <= 1) || !(e.s_min < e.s_max))
      fail(who + "bad state-of-charge window");
    if (!(e.p_c_max >= 0) || !(e.p_d_max >= 0)) fail(who + "negative rate limit");
    if (!(e.eta_c > 0) || e.eta_c > 1 || !(e.eta_d > 0) || e.eta_d > 1)
      fail(who + "efficiency outside (0,1]");
    if (!(e.gamma >= 0) || e.gamma > 1) fail(who + "gamma outside [0,1]");
    if (!e.aging.empty() && !(e.module_kwh > 0)) fail(who + "module size must be positive");
    if (e.unit_cost < 0) fail(who + "negative unit cost");
    const EssState& st = ess_init[i];
    if (st.soc < e.s_min - 1e-9 || st.soc > e.s_max + 1e-9)
      fail(who + "initial state of charge outside window");
  }
  for (int h = 0; h < 24; ++h) {
    if (market.buy_price[h] < 0 || market.sell_price[h] < 0)
      fail("market: negative price at hour " + std::to_string(h));
    if (market.sell_price[h] > market.buy_price[h] + 1e-12)
      fail("market: sell price above buy price at hour " + std::to_string(h));
  }
  if (market.p_p_max < 0 || market.p_s_max < 0) fail("market: negative trade cap");
  if (!(qos.alpha_avg >= 0) || !(qos.alpha_avg <= qos.alpha_max) || !(qos.alpha_max < 1))
    fail("service: need 0 <= alpha_avg <= alpha_max < 1");
  if (qos.shortage_price < 0 || qos.surplus_price < 0) fail("service: negative penalty price");
  if (!(qos.emission_cap > 0)) fail("service: emission cap must be positive");
  if (qos.reserve_req < 0) fail("service: negative reserve");
  if (!(qos.d_e_min > 0)) fail("service: elastic demand floor must be positive");
  if (errors.coeff_ie < 0 || errors.coeff_e < 0 || errors.coeff_rg < 0)
    fail("forecast: negative error coefficient");
  if (errors.lead_mult_at_24 < 1) fail("forecast: lead multiplier must be >= 1");
  if (!(errors.cap_lo <= 1.0) || !(errors.cap_hi >= 1.0))
    fail("forecast: cap band must contain 1.0");
  if (!(profile.load_peak_kw >= 0) || !(profile.wind_peak_kw >= 0))
    fail("trace profile: negative peak");
  if (!(profile.frac_ie_lo >= 0) || !(profile.frac_ie_hi <= 1) ||
      !(profile.frac_ie_lo <= profile.frac_ie_hi))
    fail("trace profile: bad inelastic fraction range");
  if (fuel_segments < 1 || aging_segments < 1) fail("linearization: need at least one segment");
  if (v_explicit < 0 && (!(v_scale > 0) || v_scale > 1))
    fail("lyapunov: v_scale outside (0,1]");
  if (budgets.uc_gap_target < 0 || budgets.uc_node_limit < 1 || budgets.uc_pivot_limit < 1 ||
      budgets.p1_pivot_limit < 1 || !(budgets.uc_time_limit_s > 0) ||
      !(budgets.p1_time_limit_s > 0))
    fail("solver: bad budget");
}

// ---- INI ----
//
// Sections: [units] [cg.N] [ess.N] [market] [service] [forecast] [trace]
// [linearization] [lyapunov] [solver]. Unknown sections or keys are errors.

namespace detail {

using IniMap = std::map<std::string, std::map<std::string, std::string>>;

inline std::string ini_trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline IniMap parse_ini(std::istream& in) {
  IniMap out;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = ini_trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
      section = ini_trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      out[section];
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
    std::string key = ini_trim(t.substr(0, eq));
    std::string val = ini_trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out[section][key] = val;
  }
  return out;
}

inline double ini_num(const std::string& sec, const std::string& key, const std::string& v) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("[" + sec + "] " + key + ": not a number: '" + v + "'");
  return x;
}

inline long ini_int(const std::string& sec, const std::string& key, const std::string& v) {
  double x = ini_num(sec, key, v);
  long l = static_cast<long>(x);
  if (static_cast<double>(l) != x)
    throw ConfigError("[" + sec + "] " + key + ": not an integer: '" + v + "'");
  return l;
}

inline bool ini_bool(const std::string& sec, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("[" + sec + "] " + key + ": expected true/false: '" + v + "'");
}

inline std::vector<double> ini_list(const std::string& sec, const std::string& key,
                                    const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(ini_num(sec, key, ini_trim(cell)));
  return out;
}

}  // namespace detail

inline MicrogridConfig config_from_ini(std::istream& in) {
  using detail::ini_bool;
  using detail::ini_int;
  using detail::ini_list;
  using detail::ini_num;

  MicrogridConfig c = default_config();
  auto ini = detail::parse_ini(in);

  // [units] first: it resizes the fleets before per-unit overrides apply.
  if (auto it = ini.find("units"); it != ini.end()) {
    for (const auto& [k, v] : it->second) {
      if (k == "cg_count") {
        long n = ini_int("units", k, v);
        if (n < 0 || n > 64) throw ConfigError("[units] cg_count out of range");
        c.cgs.resize(n, c.cgs.empty() ? CgSpec{} : c.cgs.back());
        CgState cold;
        cold.t_off = 24;
        c.cg_init.resize(n, cold);
        for (std::size_t i = 0; i < c.cgs.size(); ++i)
          c.cgs[i].name = "cg" + std::to_string(i + 1);
      } else if (k == "ess_count") {
        long n = ini_int("units", k, v);
        if (n < 0 || n > 64) throw ConfigError("[units] ess_count out of range");
        EssSpec proto = c.esses.empty() ? EssSpec{} : c.esses.back();
        c.esses.resize(n, proto);
        c.ess_init.resize(n, EssState{0.5 * (proto.s_min + proto.s_max)});
        for (std::size_t i = 0; i < c.esses.size(); ++i)
          c.esses[i].name = "ess" + std::to_string(i + 1);
      } else {
        throw ConfigError("[units] unknown key: " + k);
      }
    }
    ini.erase(it);
  }

  for (const auto& [sec, kv] : ini) {
    if (sec.rfind("cg.", 0) == 0) {
      long n = detail::ini_int(sec, "<section>", sec.substr(3));
      if (n < 1 || n > static_cast<long>(c.cgs.size()))
        throw ConfigError("[" + sec + "]: no such generator (set [units] cg_count first)");
      CgSpec& g = c.cgs[n - 1];
      CgState& st = c.cg_init[n - 1];
      for (const auto& [k, v] : kv) {
        if (k == "p_min") g.p_min = ini_num(sec, k, v);
        else if (k == "p_max") g.p_max = ini_num(sec, k, v);
        else if (k == "ramp") g.ramp = ini_num(sec, k, v);
        else if (k == "t_on_min") g.t_on_min = static_cast<int>(ini_int(sec, k, v));
        else if (k == "t_off_min") g.t_off_min = static_cast<int>(ini_int(sec, k, v));
        else if (k == "c_su") g.c_su = ini_num(sec, k, v);
        else if (k == "c_sd") g.c_sd = ini_num(sec, k, v);
        else if (k == "fuel_quad") g.fuel_quad = ini_num(sec, k, v);
        else if (k == "fuel_lin") g.fuel_lin = ini_num(sec, k, v);
        else if (k == "maint_lin") g.maint_lin = ini_num(sec, k, v);
        else if (k == "emis_lin") g.emis_lin = ini_num(sec, k, v);
        else if (k == "init_u") st.u_prev = static_cast<int>(ini_int(sec, k, v));
        else if (k == "init_p") st.p_prev = ini_num(sec, k, v);
        else if (k == "init_t_on") st.t_on = static_cast<int>(ini_int(sec, k, v));
        else if (k == "init_t_off") st.t_off = static_cast<int>(ini_int(sec, k, v));
        else throw ConfigError("[" + sec + "] unknown key: " + k);
      }
    } else if (sec.rfind("ess.", 0) == 0) {
      long n = detail::ini_int(sec, "<section>", sec.substr(4));
      if (n < 1 || n > static_cast<long>(c.esses.size()))
        throw ConfigError("[" + sec + "]: no such storage unit (set [units] ess_count first)");
      EssSpec& e = c.esses[n - 1];
      EssState& st = c.ess_init[n - 1];
      for (const auto& [k, v] : kv) {
        if (k == "e_cap") e.e_cap = ini_num(sec, k, v);
        else if (k == "s_min") e.s_min = ini_num(sec, k, v);
        else if (k == "s_max") e.s_max = ini_num(sec, k, v);
        else if (k == "p_c_max") e.p_c_max = ini_num(sec, k, v);
        else if (k == "p_d_max") e.p_d_max = ini_num(sec, k, v);
        else if (k == "eta_c") e.eta_c = ini_num(sec, k, v);
        else if (k == "eta_d") e.eta_d = ini_num(sec, k, v);
        else if (k == "module_kwh") e.module_kwh = ini_num(sec, k, v);
        else if (k == "unit_cost") e.unit_cost = ini_num(sec, k, v);
        else if (k == "gamma") e.gamma = ini_num(sec, k, v);
        else if (k == "aging_a") {
          auto a = ini_list(sec, k, v);
          e.aging.resize(a.size());
          for (std::size_t i = 0; i < a.size(); ++i) e.aging[i].a = a[i];
        } else if (k == "aging_b") {
          auto b = ini_list(sec, k, v);
          if (b.size() != e.aging.size())
            throw ConfigError("[" + sec + "] aging_b length differs from aging_a");
          for (std::size_t i = 0; i < b.size(); ++i) e.aging[i].b = b[i];
        } else if (k == "init_soc") st.soc = ini_num(sec, k, v);
        else throw ConfigError("[" + sec + "] unknown key: " + k);
      }
    } else if (sec == "market") {
      for (const auto& [k, v] : kv) {
        if (k == "buy_price") {
          auto p = ini_list(sec, k, v);
          if (p.size() != 24) throw ConfigError("[market] buy_price needs 24 values");
          for (int h = 0; h < 24; ++h) c.market.buy_price[h] = p[h];
        } else if (k == "sell_price") {
          auto p = ini_list(sec, k, v);
          if (p.size() != 24) throw ConfigError("[market] sell_price needs 24 values");
          for (int h = 0; h < 24; ++h) c.market.sell_price[h] = p[h];
        } else if (k == "sell_ratio") {
          double r = ini_num(sec, k, v);
          for (int h = 0; h < 24; ++h) c.market.sell_price[h] = r * c.market.buy_price[h];
        } else if (k == "p_p_max") c.market.p_p_max = ini_num(sec, k, v);
        else if (k == "p_s_max") c.market.p_s_max = ini_num(sec, k, v);
        else throw ConfigError("[market] unknown key: " + k);
      }
    } else if (sec == "service") {
      for (const auto& [k, v] : kv) {
        if (k == "alpha_avg") c.qos.alpha_avg = ini_num(sec, k, v);
        else if (k == "alpha_max") c.qos.alpha_max = ini_num(sec, k, v);
        else if (k == "shortage_price") c.qos.shortage_price = ini_num(sec, k, v);
        else if (k == "surplus_price") c.qos.surplus_price = ini_num(sec, k, v);
        else if (k == "emission_cap") c.qos.emission_cap = ini_num(sec, k, v);
        else if (k == "reserve_req") c.qos.reserve_req = ini_num(sec, k, v);
        else if (k == "reserve_committed_only")
          c.qos.reserve_committed_only = ini_bool(sec, k, v);
        else if (k == "d_e_min") c.qos.d_e_min = ini_num(sec, k, v);
        else throw ConfigError("[service] unknown key: " + k);
      }
    } else if (sec == "forecast") {
      for (const auto& [k, v] : kv) {
        if (k == "coeff_ie") c.errors.coeff_ie = ini_num(sec, k, v);
        else if (k == "coeff_e") c.errors.coeff_e = ini_num(sec, k, v);
        else if (k == "coeff_rg") c.errors.coeff_rg = ini_num(sec, k, v);
        else if (k == "lead_mult_at_24") c.errors.lead_mult_at_24 = ini_num(sec, k, v);
        else if (k == "cap_lo") c.errors.cap_lo = ini_num(sec, k, v);
        else if (k == "cap_hi") c.errors.cap_hi = ini_num(sec, k, v);
        else if (k == "cap_on_value") c.errors.cap_on_value = ini_bool(sec, k, v);
        else throw ConfigError("[forecast] unknown key: " + k);
      }
    } else if (sec == "trace") {
      for (const auto& [k, v] : kv) {
        if (k == "load_peak_kw") c.profile.load_peak_kw = ini_num(sec, k, v);
        else if (k == "wind_peak_kw") c.profile.wind_peak_kw = ini_num(sec, k, v);
        else if (k == "frac_ie_lo") c.profile.frac_ie_lo = ini_num(sec, k, v);
        else if (k == "frac_ie_hi") c.profile.frac_ie_hi = ini_num(sec, k, v);
        else throw ConfigError("[trace] unknown key: " + k);
      }
    } else if (sec == "linearization") {
      for (const auto& [k, v] : kv) {
        if (k == "fuel_segments") c.fuel_segments = static_cast<int>(ini_int(sec, k, v));
        else if (k == "aging_segments")
          c.aging_segments = static_cast<int>(ini_int(sec, k, v));
        else throw ConfigError("[linearization] unknown key: " + k);
      }
    } else if (sec == "lyapunov") {
      for (const auto& [k, v] : kv) {
        if (k == "v_scale") c.v_scale = ini_num(sec, k, v);
        else if (k == "v_explicit") c.v_explicit = ini_num(sec, k, v);
        else throw ConfigError("[lyapunov] unknown key: " + k);
      }
    } else if (sec == "solver") {
      for (const auto& [k, v] : kv) {
        if (k == "uc_gap_target") c.budgets.uc_gap_target = ini_num(sec, k, v);
        else if (k == "uc_node_limit") c.budgets.uc_node_limit = ini_int(sec, k, v);
        else if (k == "uc_pivot_limit") c.budgets.uc_pivot_limit = ini_int(sec, k, v);
        else if (k == "uc_time_limit_s") c.budgets.uc_time_limit_s = ini_num(sec, k, v);
        else if (k == "p1_pivot_limit") c.budgets.p1_pivot_limit = ini_int(sec, k, v);
        else if (k == "p1_time_limit_s") c.budgets.p1_time_limit_s = ini_num(sec, k, v);
        else throw ConfigError("[solver] unknown key: " + k);
      }
    } else {
      throw ConfigError("unknown section: [" + sec + "]");
    }
  }

  c.validate();
  return c;
}

inline MicrogridConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  return config_from_ini(f);
}

}  // namespace mgems
