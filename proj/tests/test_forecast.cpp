#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mgems/forecast.hpp"

using namespace mgems;
using Catch::Approx;

namespace {

std::string to_csv(const TraceSet& ts) {
  std::ostringstream os;
  export_traces_csv(ts, os);
  return os.str();
}

std::string write_temp(const std::string& content, const char* name) {
  std::string path = std::string("/tmp/") + name;
  std::ofstream f(path, std::ios::binary);
  f << content;
  return path;
}

}  // namespace

TEST_CASE("trace generation is deterministic per seed") {
  TraceProfile prof;
  ErrorModel em;
  TraceSet a = generate_traces(prof, em, 168, 7, 1.0, 50.0);
  TraceSet b = generate_traces(prof, em, 168, 7, 1.0, 50.0);
  CHECK(to_csv(a) == to_csv(b));
  TraceSet c = generate_traces(prof, em, 168, 8, 1.0, 50.0);
  CHECK(to_csv(a) != to_csv(c));
}

TEST_CASE("peaks land exactly on the configured targets") {
  TraceProfile prof;
  TraceSet ts = generate_traces(prof, ErrorModel{}, 168, 3, 1.0, 50.0);
  double wind_max = 0.0, load_max = 0.0;
  for (const auto& s : ts.slots) {
    wind_max = std::max(wind_max, s.truth.p_rg);
    load_max = std::max(load_max, s.truth.d_ie + s.truth.d_e);
  }
  CHECK(wind_max == 1200.0);
  CHECK(load_max == Approx(3000.0).margin(1e-9));
}

TEST_CASE("inelastic share stays inside the configured band") {
  TraceProfile prof;
  TraceSet ts = generate_traces(prof, ErrorModel{}, 168, 3, 1.0, 0.0);
  for (const auto& s : ts.slots) {
    double frac = s.truth.d_ie / (s.truth.d_ie + s.truth.d_e);
    CHECK(frac >= 0.70 - 1e-12);
    CHECK(frac <= 0.90 + 1e-12);
  }
}

TEST_CASE("forecasts stay inside their certified bounds") {
  TraceSet ts = generate_traces(TraceProfile{}, ErrorModel{}, 168, 11, 1.5, 50.0);
  CHECK_NOTHROW(ts.validate(50.0));
  for (const auto& s : ts.slots) {
    CHECK(std::fabs(s.da.hat_ie - s.truth.d_ie) <= s.da.del_ie + 1e-9);
    CHECK(std::fabs(s.da.hat_e - s.truth.d_e) <= s.da.del_e + 1e-9);
    CHECK(std::fabs(s.da.hat_rg - s.truth.p_rg) <= s.da.del_rg + 1e-9);
    CHECK(std::fabs(s.ha.hat_ie - s.truth.d_ie) <= s.ha.del_ie + 1e-9);
  }
}

TEST_CASE("single forecast draw semantics") {
  ErrorModel em;
  QuantityRange range{0.0, 1000.0};

  SECTION("no slot-to-slot change means an exact forecast") {
    ForecastSample s = make_forecast(500.0, 500.0, range, em, Quantity::d_ie, 1, 1.0, 5, 0);
    CHECK(s.hat == 500.0);
    CHECK(s.delta == 0.0);
  }
  SECTION("hour-ahead width is the coefficient times the change") {
    ForecastSample s = make_forecast(500.0, 400.0, range, em, Quantity::d_ie, 1, 1.0, 5, 0);
    CHECK(std::fabs(s.hat - 500.0) <= 5.0 + 1e-12);
    CHECK(s.delta <= 5.0 + 1e-12);
  }
  SECTION("width grows with lead and with the error scale") {
    double prev = -1.0;
    for (int lead = 1; lead <= 24; ++lead) {
      ForecastSample s =
          make_forecast(500.0, 400.0, range, em, Quantity::d_e, lead, 1.0, 5, 0);
      CHECK(s.delta >= prev - 1e-12);
      prev = s.delta;
    }
    ForecastSample r1 = make_forecast(500.0, 400.0, range, em, Quantity::d_e, 1, 1.0, 5, 0);
    ForecastSample r2 = make_forecast(500.0, 400.0, range, em, Quantity::d_e, 1, 2.0, 5, 0);
    CHECK(r2.delta == Approx(2.0 * r1.delta).epsilon(1e-12));
  }
  SECTION("value clamp keeps the forecast inside the cap band") {
    ErrorModel tight = em;
    tight.cap_lo = 1.0;
    tight.cap_hi = 1.0;
    QuantityRange point{700.0, 700.0};
    for (int slot = 0; slot < 50; ++slot) {
      ForecastSample s =
          make_forecast(700.0, 100.0, point, tight, Quantity::p_rg, 1, 3.0, 9, slot);
      CHECK(s.hat == 700.0);
    }
  }
  SECTION("bound-shrink mode keeps the certified width honest") {
    ErrorModel shrink = em;
    shrink.cap_on_value = false;
    shrink.cap_lo = 1.0;
    shrink.cap_hi = 1.0;
    QuantityRange point{700.0, 700.0};
    ForecastSample s =
        make_forecast(700.0, 100.0, point, shrink, Quantity::p_rg, 1, 3.0, 9, 0);
    CHECK(s.hat == 700.0);
    CHECK(s.delta == 0.0);
  }
  SECTION("invalid lead and scale are rejected") {
    CHECK_THROWS_AS(make_forecast(1.0, 1.0, range, em, Quantity::d_e, 0, 1.0, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_forecast(1.0, 1.0, range, em, Quantity::d_e, 1, -1.0, 1, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("error draws are empirically unbiased") {
  TraceSet ts = generate_traces(TraceProfile{}, ErrorModel{}, 336, 1, 1.0, 50.0);
  for (Quantity q : {Quantity::d_ie, Quantity::d_e, Quantity::p_rg}) {
    CHECK(ts.bias(q, true).ok());
    CHECK(ts.bias(q, false).ok());
  }
}

TEST_CASE("full CSV round-trips through the ingester") {
  TraceSet ts = generate_traces(TraceProfile{}, ErrorModel{}, 48, 21, 1.0, 50.0);
  std::string path = write_temp(to_csv(ts), "mgems_trace_rt.csv");
  TraceSet back = ingest_csv(path, 50.0, ErrorModel{}, 21, 1.0);
  CHECK(to_csv(back) == to_csv(ts));
  CHECK(back.horizon() == 48);
  std::remove(path.c_str());
}

TEST_CASE("truth-only CSV gets forecasts regenerated on load") {
  TraceSet ts = generate_traces(TraceProfile{}, ErrorModel{}, 24, 5, 1.0, 50.0);
  std::ostringstream os;
  os << "slot_index,d_ie_kw,d_e_kw,p_rg_kw\n";
  for (int t = 0; t < 24; ++t) {
    const auto& s = ts.slots[t].truth;
    os << t << "," << fmt_double(s.d_ie) << "," << fmt_double(s.d_e) << ","
       << fmt_double(s.p_rg) << "\n";
  }
  std::string path = write_temp(os.str(), "mgems_trace_truth.csv");
  TraceSet back = ingest_csv(path, 50.0, ErrorModel{}, 5, 1.0);
  // same truth, same seed, same error model: identical forecasts
  CHECK(to_csv(back) == to_csv(ts));
  std::remove(path.c_str());
}

TEST_CASE("ingestion rejects malformed input") {
  CHECK_THROWS_AS(ingest_csv("/nonexistent/trace.csv", 50.0, ErrorModel{}, 1, 1.0),
                  TraceError);

  std::string empty = write_temp("", "mgems_trace_empty.csv");
  CHECK_THROWS_AS(ingest_csv(empty, 50.0, ErrorModel{}, 1, 1.0), TraceError);

  std::string badhdr = write_temp("a,b,c\n", "mgems_trace_badhdr.csv");
  CHECK_THROWS_AS(ingest_csv(badhdr, 50.0, ErrorModel{}, 1, 1.0), TraceError);

  std::string badcols =
      write_temp("slot_index,d_ie_kw,d_e_kw,p_rg_kw\n0,1,2\n", "mgems_trace_cols.csv");
  CHECK_THROWS_AS(ingest_csv(badcols, 50.0, ErrorModel{}, 1, 1.0), TraceError);

  std::string outoforder = write_temp(
      "slot_index,d_ie_kw,d_e_kw,p_rg_kw\n1,100,60,0\n", "mgems_trace_order.csv");
  CHECK_THROWS_AS(ingest_csv(outoforder, 50.0, ErrorModel{}, 1, 1.0), TraceError);

  // 24 rows but one elastic value below the floor
  std::ostringstream low;
  low << "slot_index,d_ie_kw,d_e_kw,p_rg_kw\n";
  for (int t = 0; t < 24; ++t) low << t << ",100," << (t == 5 ? "10" : "60") << ",0\n";
  std::string lowpath = write_temp(low.str(), "mgems_trace_floor.csv");
  CHECK_THROWS_WITH(ingest_csv(lowpath, 50.0, ErrorModel{}, 1, 1.0),
                    Catch::Matchers::ContainsSubstring("below floor"));

  // 23 rows: not a whole day
  std::ostringstream part;
  part << "slot_index,d_ie_kw,d_e_kw,p_rg_kw\n";
  for (int t = 0; t < 23; ++t) part << t << ",100,60,0\n";
  std::string partpath = write_temp(part.str(), "mgems_trace_part.csv");
  CHECK_THROWS_WITH(ingest_csv(partpath, 50.0, ErrorModel{}, 1, 1.0),
                    Catch::Matchers::ContainsSubstring("whole number of days"));

  std::remove(empty.c_str());
  std::remove(badhdr.c_str());
  std::remove(badcols.c_str());
  std::remove(outoforder.c_str());
  std::remove(lowpath.c_str());
  std::remove(partpath.c_str());
}

TEST_CASE("truth generation rejects partial days") {
  CHECK_THROWS_AS(generate_truth(TraceProfile{}, 23, 1, 0.0), TraceError);
  CHECK_THROWS_AS(generate_truth(TraceProfile{}, 0, 1, 0.0), TraceError);
}

TEST_CASE("regeneration at a new error scale reuses the same randomness") {
  TraceSet base = generate_traces(TraceProfile{}, ErrorModel{}, 48, 9, 1.0, 50.0);
  TraceSet scaled = base;
  regenerate_forecasts(scaled, ErrorModel{}, 2.0, 9);
  // truth untouched, errors scale together: same sign of deviation per slot
  for (int t = 1; t < 48; ++t) {
    CHECK(scaled.slots[t].truth.d_ie == base.slots[t].truth.d_ie);
    double base_err = base.slots[t].ha.hat_e - base.slots[t].truth.d_e;
    double scaled_err = scaled.slots[t].ha.hat_e - scaled.slots[t].truth.d_e;
    if (std::fabs(base_err) > 1e-9) CHECK(base_err * scaled_err > 0.0);
  }
  CHECK(scaled.meta.rho == 2.0);
}
