#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mgems/common.hpp"
#include "mgems/model.hpp"
#include "mgems/rng.hpp"

// Synthetic demand/renewable traces and forecast-error injection.
//
// Truth comes from diurnal shape functions with keyed smoothed noise, scaled
// so the configured peaks are hit exactly. Forecasts are truth plus a
// zero-mean uniform error whose half-width is proportional to the slot-to-slot
// change of the quantity, grows with forecast lead, scales with the error
// multiplier rho, and is kept inside a band around the observed range of the
// trace. Every draw is keyed by (seed, slot, quantity, lead), so regenerating
// at a different rho reuses the identical underlying randomness.

namespace mgems {

enum class Quantity : std::uint64_t { d_ie = 1, d_e = 2, p_rg = 3 };

struct ErrorModel {
  double coeff_ie = 0.05;
  double coeff_e = 0.10;
  double coeff_rg = 0.15;
  double lead_mult_at_24 = 2.0;  // linear from 1.0 at lead 1 to this at lead 24
  double cap_lo = 0.8;           // forecasts clamped into [cap_lo*min, cap_hi*max]
  double cap_hi = 1.2;
  bool cap_on_value = true;      // false: shrink the error bound instead of clamping

  double multiplier(int lead) const {
    return 1.0 + (lead - 1) * (lead_mult_at_24 - 1.0) / 23.0;
  }
  double coeff(Quantity q) const {
    switch (q) {
      case Quantity::d_ie: return coeff_ie;
      case Quantity::d_e: return coeff_e;
      case Quantity::p_rg: return coeff_rg;
    }
    return 0.0;
  }
};

struct TraceProfile {
  double load_peak_kw = 3000.0;
  double wind_peak_kw = 1200.0;
  double frac_ie_lo = 0.70;  // inelastic share of total demand, drawn per slot
  double frac_ie_hi = 0.90;
};

struct SlotTruth {
  double d_ie = 0.0;
  double d_e = 0.0;
  double p_rg = 0.0;

  double at(Quantity q) const {
    switch (q) {
      case Quantity::d_ie: return d_ie;
      case Quantity::d_e: return d_e;
      case Quantity::p_rg: return p_rg;
    }
    return 0.0;
  }
};

struct ForecastView {
  double hat_ie = 0.0, hat_e = 0.0, hat_rg = 0.0;
  double del_ie = 0.0, del_e = 0.0, del_rg = 0.0;
};

struct TraceSlot {
  SlotTruth truth;
  ForecastView da;  // day-ahead (lead = offset within the day + 1)
  ForecastView ha;  // hour-ahead (lead 1)
};

struct QuantityRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct ForecastSample {
  double hat = 0.0;
  double delta = 0.0;  // certified: |hat - truth| <= delta
};

// One forecast draw. `prev` is the truth one slot earlier (equal to `truth`
// for the first slot of a trace, making that forecast exact).
inline ForecastSample make_forecast(double truth, double prev, QuantityRange range,
                                    const ErrorModel& em, Quantity q, int lead,
                                    double rho, std::uint64_t seed, int slot) {
  if (lead < 1) throw std::invalid_argument("forecast: lead must be >= 1");
  if (rho < 0.0) throw std::invalid_argument("forecast: negative error scale");
  double delta_raw = em.coeff(q) * em.multiplier(lead) * std::fabs(truth - prev) * rho;
  double u = keyed_sym(seed, static_cast<std::uint64_t>(slot),
                       static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(lead));
  double lo_cap = em.cap_lo * range.lo;
  double hi_cap = em.cap_hi * range.hi;
  ForecastSample out;
  if (em.cap_on_value) {
    out.hat = std::clamp(truth + u * delta_raw, lo_cap, hi_cap);
    double sup = std::max(std::fabs(out.hat - range.lo), std::fabs(out.hat - range.hi));
    out.delta = std::min(delta_raw, sup);
  } else {
    double room = std::max(0.0, std::min(truth - lo_cap, hi_cap - truth));
    double delta_used = std::min(delta_raw, room);
    out.hat = truth + u * delta_used;
    out.delta = delta_used;
  }
  return out;
}

struct TraceMeta {
  std::uint64_t seed = 0;
  double rho = 1.0;
  std::string source = "generated";
};

struct BiasDiagnostic {
  double mean_err = 0.0;
  double limit = 0.0;  // 3 sigma / sqrt(T) for the summed uniform errors
  bool ok() const { return std::fabs(mean_err) <= limit + 1e-12; }
};

struct TraceSet {
  std::vector<TraceSlot> slots;
  TraceMeta meta;
  QuantityRange range_ie, range_e, range_rg;

  int horizon() const { return static_cast<int>(slots.size()); }

  QuantityRange range(Quantity q) const {
    switch (q) {
      case Quantity::d_ie: return range_ie;
      case Quantity::d_e: return range_e;
      case Quantity::p_rg: return range_rg;
    }
    return {};
  }

  SlotObservation observe(int t, bool day_ahead) const {
    const TraceSlot& s = slots.at(t);
    const ForecastView& f = day_ahead ? s.da : s.ha;
    SlotObservation o;
    o.d_ie = s.truth.d_ie;
    o.d_e = s.truth.d_e;
    o.p_rg = s.truth.p_rg;
    o.d_ie_hat = f.hat_ie;
    o.d_e_hat = f.hat_e;
    o.p_rg_hat = f.hat_rg;
    o.delta_ie = f.del_ie;
    o.delta_e = f.del_e;
    o.delta_rg = f.del_rg;
    return o;
  }

  void compute_ranges() {
    auto scan = [&](Quantity q) {
      QuantityRange r{kInf, -kInf};
      for (const auto& s : slots) {
        r.lo = std::min(r.lo, s.truth.at(q));
        r.hi = std::max(r.hi, s.truth.at(q));
      }
      return r;
    };
    range_ie = scan(Quantity::d_ie);
    range_e = scan(Quantity::d_e);
    range_rg = scan(Quantity::p_rg);
  }

  void validate(double d_e_min) const {
    if (slots.empty()) throw TraceError("empty trace");
    if (horizon() % 24 != 0)
      throw TraceError("horizon " + std::to_string(horizon()) + " is not a whole number of days");
    for (int t = 0; t < horizon(); ++t) {
      const auto& s = slots[t];
      auto at = [&](const char* what, double v) {
        if (!(v >= -1e-9) || !std::isfinite(v))
          throw TraceError("slot " + std::to_string(t) + ": bad " + what);
      };
      at("d_ie", s.truth.d_ie);
      at("d_e", s.truth.d_e);
      at("p_rg", s.truth.p_rg);
      if (s.truth.d_e < d_e_min - 1e-12)
        throw TraceError("slot " + std::to_string(t) + ": elastic demand below floor");
      for (const ForecastView* f : {&s.da, &s.ha}) {
        auto chk = [&](double hat, double del, double truth, const char* what) {
          if (del < -1e-12) throw TraceError(std::string("negative delta for ") + what);
          if (std::fabs(hat - truth) > del + 1e-9 * (1.0 + std::fabs(truth)))
            throw TraceError("slot " + std::to_string(t) + ": forecast outside bound for " +
                             what);
        };
        chk(f->hat_ie, f->del_ie, s.truth.d_ie, "d_ie");
        chk(f->hat_e, f->del_e, s.truth.d_e, "d_e");
        chk(f->hat_rg, f->del_rg, s.truth.p_rg, "p_rg");
      }
    }
  }

  BiasDiagnostic bias(Quantity q, bool day_ahead) const {
    BiasDiagnostic d;
    double sum = 0.0, var = 0.0;
    for (const auto& s : slots) {
      const ForecastView& f = day_ahead ? s.da : s.ha;
      double hat = q == Quantity::d_ie ? f.hat_ie : q == Quantity::d_e ? f.hat_e : f.hat_rg;
      double del = q == Quantity::d_ie ? f.del_ie : q == Quantity::d_e ? f.del_e : f.del_rg;
      sum += hat - s.truth.at(q);
      var += del * del / 3.0;  // variance of U[-delta, delta]
    }
    double T = static_cast<double>(slots.size());
    d.mean_err = sum / T;
    d.limit = 3.0 * std::sqrt(var) / T;
    return d;
  }
};

// ---- truth generation ----

namespace detail {

inline double smooth_sym(std::uint64_t seed, int t, std::uint64_t tag) {
  auto u = [&](int s) {
    return keyed_sym(seed, static_cast<std::uint64_t>(s + 4), tag, 0);
  };
  return 0.25 * u(t - 1) + 0.5 * u(t) + 0.25 * u(t + 1);
}

}  // namespace detail

inline std::vector<SlotTruth> generate_truth(const TraceProfile& p, int horizon,
                                             std::uint64_t seed, double d_e_floor) {
  if (horizon <= 0 || horizon % 24 != 0)
    throw TraceError("horizon must be a positive multiple of 24");
  std::vector<double> wind(horizon), load(horizon);
  constexpr double tau = 6.283185307179586;
  for (int t = 0; t < horizon; ++t) {
    int h = t % 24;
    double nw = detail::smooth_sym(seed, t, 101);
    double nl = detail::smooth_sym(seed, t, 102);
    wind[t] = std::max(0.0, 0.55 + 0.30 * std::sin(tau * (h - 2) / 24.0) + 0.40 * nw);
    double morning = std::exp(-((h - 11.0) / 3.0) * ((h - 11.0) / 3.0));
    double evening = std::exp(-((h - 20.0) / 2.6) * ((h - 20.0) / 2.6));
    load[t] = 0.50 + 0.28 * morning + 0.34 * evening + 0.06 * nl;
  }
  auto scale_to_peak = [](std::vector<double>& v, double peak) {
    double mx = *std::max_element(v.begin(), v.end());
    if (mx <= 0.0 || peak <= 0.0) {
      std::fill(v.begin(), v.end(), 0.0);
      return;
    }
    int arg = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    for (double& x : v) x *= peak / mx;
    v[arg] = peak;  // land the peak exactly
  };
  scale_to_peak(wind, p.wind_peak_kw);
  scale_to_peak(load, p.load_peak_kw);

  std::vector<SlotTruth> out(horizon);
  for (int t = 0; t < horizon; ++t) {
    double frac = p.frac_ie_lo +
                  (p.frac_ie_hi - p.frac_ie_lo) *
                      keyed_u01(seed, static_cast<std::uint64_t>(t),
                                static_cast<std::uint64_t>(Quantity::d_ie), 103);
    double d_ie = frac * load[t];
    double d_e = load[t] - d_ie;
    if (d_e < d_e_floor) {
      d_e = d_e_floor;
      d_ie = std::max(0.0, load[t] - d_e);
    }
    out[t] = {d_ie, d_e, wind[t]};
  }
  return out;
}

// Fill day-ahead and hour-ahead forecasts for existing truth.
inline void regenerate_forecasts(TraceSet& ts, const ErrorModel& em, double rho,
                                 std::uint64_t seed) {
  ts.compute_ranges();
  int T = ts.horizon();
  for (int t = 0; t < T; ++t) {
    const SlotTruth& cur = ts.slots[t].truth;
    const SlotTruth& prev = ts.slots[t > 0 ? t - 1 : 0].truth;
    int lead_da = t % 24 + 1;
    auto fill = [&](ForecastView& v, int lead) {
      ForecastSample ie = make_forecast(cur.d_ie, prev.d_ie, ts.range_ie, em,
                                        Quantity::d_ie, lead, rho, seed, t);
      ForecastSample e = make_forecast(cur.d_e, prev.d_e, ts.range_e, em, Quantity::d_e,
                                       lead, rho, seed, t);
      ForecastSample rg = make_forecast(cur.p_rg, prev.p_rg, ts.range_rg, em,
                                        Quantity::p_rg, lead, rho, seed, t);
      v = {ie.hat, e.hat, rg.hat, ie.delta, e.delta, rg.delta};
    };
    fill(ts.slots[t].da, lead_da);
    fill(ts.slots[t].ha, 1);
  }
  ts.meta.rho = rho;
  ts.meta.seed = seed;
}

inline TraceSet generate_traces(const TraceProfile& profile, const ErrorModel& em,
                                int horizon, std::uint64_t seed, double rho = 1.0,
                                double d_e_floor = 0.0) {
  TraceSet ts;
  auto truth = generate_truth(profile, horizon, seed, d_e_floor);
  ts.slots.resize(horizon);
  for (int t = 0; t < horizon; ++t) ts.slots[t].truth = truth[t];
  ts.meta.source = "generated";
  regenerate_forecasts(ts, em, rho, seed);
  return ts;
}

// ---- CSV ----
//
// Header (truth-only files may stop after p_rg_kw; forecast columns are
// regenerated on load in that case):
//   slot_index,d_ie_kw,d_e_kw,p_rg_kw,
//   da_d_ie_hat_kw,da_d_ie_delta_kw,da_d_e_hat_kw,da_d_e_delta_kw,
//   da_p_rg_hat_kw,da_p_rg_delta_kw,
//   ha_d_ie_hat_kw,ha_d_ie_delta_kw,ha_d_e_hat_kw,ha_d_e_delta_kw,
//   ha_p_rg_hat_kw,ha_p_rg_delta_kw

inline const char* trace_csv_header_full() {
  return "slot_index,d_ie_kw,d_e_kw,p_rg_kw,da_d_ie_hat_kw,da_d_ie_delta_kw,"
         "da_d_e_hat_kw,da_d_e_delta_kw,da_p_rg_hat_kw,da_p_rg_delta_kw,"
         "ha_d_ie_hat_kw,ha_d_ie_delta_kw,ha_d_e_hat_kw,ha_d_e_delta_kw,"
         "ha_p_rg_hat_kw,ha_p_rg_delta_kw";
}

inline void export_traces_csv(const TraceSet& ts, std::ostream& f) {
  f << trace_csv_header_full() << "\n";
  for (int t = 0; t < ts.horizon(); ++t) {
    const auto& s = ts.slots[t];
    f << t << "," << fmt_double(s.truth.d_ie) << "," << fmt_double(s.truth.d_e) << ","
      << fmt_double(s.truth.p_rg);
    for (const ForecastView* v : {&s.da, &s.ha}) {
      f << "," << fmt_double(v->hat_ie) << "," << fmt_double(v->del_ie) << ","
        << fmt_double(v->hat_e) << "," << fmt_double(v->del_e) << ","
        << fmt_double(v->hat_rg) << "," << fmt_double(v->del_rg);
    }
    f << "\n";
  }
}

inline void export_traces_csv(const TraceSet& ts, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw TraceError("cannot open " + path + " for writing");
  export_traces_csv(ts, f);
}

inline TraceSet ingest_csv(const std::string& path, double d_e_min,
                           const ErrorModel& em, std::uint64_t seed, double rho) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw TraceError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw TraceError(path + ": empty file");
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  std::string truth_header = "slot_index,d_ie_kw,d_e_kw,p_rg_kw";
  bool full;
  if (line == trace_csv_header_full())
    full = true;
  else if (line == truth_header)
    full = false;
  else
    throw TraceError(path + ": unrecognized header");

  TraceSet ts;
  ts.meta.source = path;
  int expect = 0;
  while (std::getline(f, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw TraceError(path + ": bad number '" + cell + "'");
      vals.push_back(v);
    }
    std::size_t want = full ? 16 : 4;
    if (vals.size() != want)
      throw TraceError(path + ": expected " + std::to_string(want) + " columns, got " +
                       std::to_string(vals.size()));
    if (static_cast<int>(vals[0] + 0.5) != expect)
      throw TraceError(path + ": slot_index out of order at row " + std::to_string(expect));
    ++expect;
    TraceSlot s;
    s.truth = {vals[1], vals[2], vals[3]};
    if (full) {
      s.da = {vals[4], vals[6], vals[8], vals[5], vals[7], vals[9]};
      s.ha = {vals[10], vals[12], vals[14], vals[11], vals[13], vals[15]};
    }
    ts.slots.push_back(s);
  }
  ts.compute_ranges();
  if (!full) regenerate_forecasts(ts, em, rho, seed);
  ts.meta.seed = seed;
  ts.meta.rho = rho;
  ts.validate(d_e_min);
  return ts;
}

}  // namespace mgems
