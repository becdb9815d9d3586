// mgcli: command-line front end for the microgrid scheduling library.
//
// Subcommands: generate-traces, run, sweep-rho, export-model, validate-config.
// Exit codes: 0 success, 1 usage, 2 config error, 3 trace error, 4 solver
// failure, 5 invariant breach or internal fault.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgems/config.hpp"
#include "mgems/dispatch.hpp"
#include "mgems/forecast.hpp"
#include "mgems/milp.hpp"
#include "mgems/sim.hpp"
#include "mgems/uc.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string iso_utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json config_json(const mgems::MicrogridConfig& c) {
  ordered_json j;
  for (const auto& g : c.cgs)
    j["cgs"].push_back({{"name", g.name},
                        {"p_min", g.p_min},
                        {"p_max", g.p_max},
                        {"ramp", g.ramp},
                        {"t_on_min", g.t_on_min},
                        {"t_off_min", g.t_off_min},
                        {"c_su", g.c_su},
                        {"c_sd", g.c_sd},
                        {"fuel_quad", g.fuel_quad},
                        {"fuel_lin", g.fuel_lin},
                        {"maint_lin", g.maint_lin},
                        {"emis_lin", g.emis_lin}});
  for (const auto& s : c.cg_init)
    j["cg_init"].push_back({{"u_prev", s.u_prev},
                            {"p_prev", s.p_prev},
                            {"t_on", s.t_on},
                            {"t_off", s.t_off}});
  for (const auto& e : c.esses) {
    ordered_json a = ordered_json::array();
    for (const auto& seg : e.aging) a.push_back({{"a", seg.a}, {"b", seg.b}});
    j["esses"].push_back({{"name", e.name},
                          {"e_cap", e.e_cap},
                          {"s_min", e.s_min},
                          {"s_max", e.s_max},
                          {"p_c_max", e.p_c_max},
                          {"p_d_max", e.p_d_max},
                          {"eta_c", e.eta_c},
                          {"eta_d", e.eta_d},
                          {"unit_cost", e.unit_cost},
                          {"gamma", e.gamma},
                          {"module_kwh", e.module_kwh},
                          {"aging", a}});
  }
  for (const auto& s : c.ess_init) j["ess_init"].push_back({{"soc", s.soc}});
  j["market"] = {{"buy_price", c.market.buy_price},
                 {"sell_price", c.market.sell_price},
                 {"p_p_max", c.market.p_p_max},
                 {"p_s_max", c.market.p_s_max}};
  j["service"] = {{"alpha_avg", c.qos.alpha_avg},
                  {"alpha_max", c.qos.alpha_max},
                  {"shortage_price", c.qos.shortage_price},
                  {"surplus_price", c.qos.surplus_price},
                  {"emission_cap", c.qos.emission_cap},
                  {"reserve_req", c.qos.reserve_req},
                  {"reserve_committed_only", c.qos.reserve_committed_only},
                  {"d_e_min", c.qos.d_e_min}};
  j["forecast"] = {{"coeff_ie", c.errors.coeff_ie},
                   {"coeff_e", c.errors.coeff_e},
                   {"coeff_rg", c.errors.coeff_rg},
                   {"lead_mult_at_24", c.errors.lead_mult_at_24},
                   {"cap_lo", c.errors.cap_lo},
                   {"cap_hi", c.errors.cap_hi},
                   {"cap_on_value", c.errors.cap_on_value}};
  j["trace"] = {{"load_peak_kw", c.profile.load_peak_kw},
                {"wind_peak_kw", c.profile.wind_peak_kw},
                {"frac_ie_lo", c.profile.frac_ie_lo},
                {"frac_ie_hi", c.profile.frac_ie_hi}};
  j["linearization"] = {{"fuel_segments", c.fuel_segments},
                        {"aging_segments", c.aging_segments}};
  j["lyapunov"] = {{"v_scale", c.v_scale}, {"v_explicit", c.v_explicit}};
  j["solver"] = {{"uc_gap_target", c.budgets.uc_gap_target},
                 {"uc_node_limit", c.budgets.uc_node_limit},
                 {"uc_pivot_limit", c.budgets.uc_pivot_limit},
                 {"uc_time_limit_s", c.budgets.uc_time_limit_s},
                 {"p1_pivot_limit", c.budgets.p1_pivot_limit},
                 {"p1_time_limit_s", c.budgets.p1_time_limit_s}};
  return j;
}

struct CommonOpts {
  std::string config_path;
  std::string traces_path;
  int horizon = 168;
  std::uint64_t seed = 1;
  double rho = 1.0;
  // optional overrides, NaN = keep config value
  double alpha_avg = -1, alpha_max = -1, v_scale = -1, v_explicit = -2;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_traces) {
  cmd->add_option("--config", o.config_path, "INI config file (omit for built-in defaults)");
  if (with_traces)
    cmd->add_option("--traces", o.traces_path,
                    "trace CSV to ingest instead of generating");
  cmd->add_option("--horizon", o.horizon, "horizon in hourly slots (multiple of 24)");
  cmd->add_option("--seed", o.seed, "trace generator seed");
  cmd->add_option("--rho", o.rho, "forecast error scale");
  cmd->add_option("--alpha-avg", o.alpha_avg, "override average shortage allowance");
  cmd->add_option("--alpha-max", o.alpha_max, "override per-slot shortage cap");
  cmd->add_option("--v-scale", o.v_scale, "override V as a fraction of V_max");
  cmd->add_option("--v-explicit", o.v_explicit, "override V with an explicit value");
}

mgems::MicrogridConfig resolve_config(const CommonOpts& o) {
  mgems::MicrogridConfig cfg =
      o.config_path.empty() ? mgems::default_config() : mgems::load_config(o.config_path);
  if (o.alpha_avg >= 0) cfg.qos.alpha_avg = o.alpha_avg;
  if (o.alpha_max >= 0) cfg.qos.alpha_max = o.alpha_max;
  if (o.v_scale >= 0) cfg.v_scale = o.v_scale;
  if (o.v_explicit >= -1) cfg.v_explicit = o.v_explicit;
  cfg.validate();
  return cfg;
}

mgems::TraceSet resolve_traces(const mgems::MicrogridConfig& cfg, const CommonOpts& o) {
  if (!o.traces_path.empty())
    return mgems::ingest_csv(o.traces_path, cfg.qos.d_e_min, cfg.errors, o.seed, o.rho);
  return mgems::generate_traces(cfg.profile, cfg.errors, o.horizon, o.seed, o.rho,
                                cfg.qos.d_e_min);
}

mgems::SimMode parse_mode(const std::string& s) {
  if (s == "two-stage") return mgems::SimMode::two_stage;
  if (s == "one-stage" || s == "one-stage-only") return mgems::SimMode::one_stage_only;
  if (s == "benchmark" || s == "benchmark-error-free")
    return mgems::SimMode::benchmark;
  throw CLI::ValidationError("--mode", "unknown mode '" + s + "'");
}

void write_text_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw mgems::InvariantError("cannot write " + p.string());
  f << text;
}

template <typename Fn>
void write_with(const fs::path& p, Fn&& writer) {
  std::ostringstream os;
  writer(os);
  write_text_file(p, os.str());
}

ordered_json scenario_json(const mgems::ScenarioConfig& sc) {
  return {{"mode", mgems::to_string(sc.mode)},
          {"omit_startstop_cost", sc.omit_startstop_cost},
          {"omit_ess_aging_cost", sc.omit_ess_aging_cost},
          {"rho", sc.rho},
          {"horizon", sc.horizon},
          {"seed", sc.seed}};
}

ordered_json manifest_base(const std::string& command, const mgems::MicrogridConfig& cfg,
                           const CommonOpts& o) {
  ordered_json m;
  m["tool"] = "mgcli";
  m["version"] = kToolVersion;
  m["created_at"] = iso_utc_now();  // the only line excluded from reproducibility
  m["command"] = command;
  m["traces"] = {{"source", o.traces_path.empty() ? "generated" : o.traces_path},
                 {"seed", o.seed},
                 {"rho", o.rho},
                 {"horizon", o.horizon}};
  m["config_file"] = o.config_path.empty() ? "(defaults)" : o.config_path;
  m["config"] = config_json(cfg);
  return m;
}

void emit_report(const mgems::SimReport& rep, const fs::path& dir) {
  write_with(dir / "report_slots.csv",
             [&](std::ostream& os) { mgems::write_report_slots_csv(rep, os); });
  write_with(dir / "summary.txt",
             [&](std::ostream& os) { mgems::write_summary_txt(rep, os); });
  write_with(dir / "dispatch_log.csv",
             [&](std::ostream& os) { mgems::write_dispatch_log_csv(rep, os); });
  write_with(dir / "series_generation.csv",
             [&](std::ostream& os) { mgems::write_series_generation_csv(rep, os); });
  write_with(dir / "series_costs.csv",
             [&](std::ostream& os) { mgems::write_series_costs_csv(rep, os); });
  write_with(dir / "violations.csv",
             [&](std::ostream& os) { mgems::write_violations_csv(rep, os); });
  for (std::size_t d = 0; d < rep.plans.size(); ++d)
    write_with(dir / ("uc_plan_day" + std::to_string(d) + ".csv"),
               [&](std::ostream& os) { mgems::write_uc_plan_csv(rep.plans[d], os); });
}

// Rebuilds the realized device/queue state entering absolute slot k from a
// completed two-stage report.
void states_at(const mgems::MicrogridConfig& cfg, const mgems::SimReport& rep, int k,
               std::vector<mgems::CgState>& cg, std::vector<mgems::EssState>& ess,
               mgems::QueueState& qs) {
  cg = cfg.cg_init;
  ess = cfg.ess_init;
  mgems::LyapunovParams lyap = mgems::compute_lyapunov(cfg);
  qs = mgems::init_queues(lyap, ess);
  for (int t = 0; t < k; ++t) {
    const mgems::SlotRecord& r = rep.slots.at(t);
    for (std::size_t i = 0; i < cg.size(); ++i)
      mgems::detail::advance_cg_state(cg[i], r.u[i], r.p[i]);
    for (std::size_t j = 0; j < ess.size(); ++j) ess[j].soc = r.soc[j];
    qs.q = r.q_after;
    qs.s = r.s_after;
  }
}

int cmd_generate_traces(const CommonOpts& o, const std::string& out) {
  mgems::MicrogridConfig cfg = resolve_config(o);
  if (o.horizon < 24 || o.horizon % 24 != 0)
    throw mgems::TraceError("horizon must be a positive multiple of 24");
  mgems::TraceSet ts = mgems::generate_traces(cfg.profile, cfg.errors, o.horizon, o.seed,
                                              o.rho, cfg.qos.d_e_min);
  std::ostringstream os;
  mgems::export_traces_csv(ts, os);
  write_text_file(out, os.str());
  std::cout << "wrote " << out << " (" << ts.horizon() << " slots, seed " << o.seed
            << ", rho " << mgems::fmt_double(o.rho) << ")\n";
  return 0;
}

int cmd_run(const CommonOpts& o, const std::string& mode_str, bool omit_startstop,
            bool omit_aging, const std::string& outdir) {
  mgems::MicrogridConfig cfg = resolve_config(o);
  mgems::TraceSet ts = resolve_traces(cfg, o);

  mgems::ScenarioConfig sc;
  sc.mode = parse_mode(mode_str);
  sc.omit_startstop_cost = omit_startstop;
  sc.omit_ess_aging_cost = omit_aging;
  sc.rho = o.rho;
  sc.horizon = std::min(o.horizon, ts.horizon());
  sc.seed = o.seed;

  mgems::SimReport rep = mgems::run_scenario(cfg, ts, sc);

  fs::create_directories(outdir);
  fs::path dir(outdir);
  emit_report(rep, dir);
  write_with(dir / "traces.csv",
             [&](std::ostream& os) { mgems::export_traces_csv(ts, os); });

  ordered_json man = manifest_base("run", cfg, o);
  man["scenario"] = scenario_json(sc);
  man["files"] = {"report_slots.csv",    "summary.txt",       "dispatch_log.csv",
                  "series_generation.csv", "series_costs.csv", "violations.csv",
                  "traces.csv"};
  for (std::size_t d = 0; d < rep.plans.size(); ++d)
    man["files"].push_back("uc_plan_day" + std::to_string(d) + ".csv");
  write_text_file(dir / "manifest.json", man.dump(2) + "\n");

  std::cout << "mode: " << mgems::to_string(sc.mode) << "\n"
            << "total_cost: " << mgems::fmt_double(rep.total_cost) << "\n"
            << "mean_shortage_ratio_forecast: "
            << mgems::fmt_double(rep.mean_ratio_forecast) << "\n"
            << "q_final: " << mgems::fmt_double(rep.q_final) << "\n"
            << "hard_violations: " << rep.hard_violation_count() << "\n"
            << "reports: " << outdir << "\n";
  if (rep.hard_violation_count() > 0) {
    std::cerr << "invariant: " << rep.hard_violation_count()
              << " hard violation(s); see " << (dir / "violations.csv").string() << "\n";
    return 5;
  }
  return 0;
}

int cmd_sweep_rho(const CommonOpts& o, const std::string& rho_list_str,
                  const std::string& outdir) {
  mgems::MicrogridConfig cfg = resolve_config(o);
  std::vector<double> rhos;
  std::stringstream ss(rho_list_str);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0')
      throw CLI::ValidationError("--rho-list", "bad number '" + item + "'");
    rhos.push_back(v);
  }
  if (rhos.empty()) throw CLI::ValidationError("--rho-list", "no values given");

  mgems::TraceSet base = mgems::generate_traces(cfg.profile, cfg.errors, o.horizon,
                                                o.seed, 1.0, cfg.qos.d_e_min);
  mgems::ScenarioConfig proto;
  proto.horizon = o.horizon;
  proto.seed = o.seed;
  mgems::RhoSweepResult res = mgems::rho_sweep(cfg, base, rhos, proto);

  fs::create_directories(outdir);
  fs::path dir(outdir);
  write_with(dir / "rho_sweep.csv",
             [&](std::ostream& os) { mgems::write_rho_sweep_csv(res, os); });
  write_with(dir / "rho_cum_diff.csv",
             [&](std::ostream& os) { mgems::write_rho_cum_diff_csv(res, os); });

  ordered_json man = manifest_base("sweep-rho", cfg, o);
  man["scenarios"] = ordered_json::array();
  for (double r : rhos) {
    mgems::ScenarioConfig sc = proto;
    sc.rho = r;
    sc.mode = mgems::SimMode::two_stage;
    man["scenarios"].push_back(scenario_json(sc));
    sc.mode = mgems::SimMode::one_stage_only;
    man["scenarios"].push_back(scenario_json(sc));
  }
  man["files"] = {"rho_sweep.csv", "rho_cum_diff.csv"};
  write_text_file(dir / "manifest.json", man.dump(2) + "\n");

  for (const auto& row : res.rows)
    std::cout << "rho " << mgems::fmt_double(row.rho)
              << ": two-stage " << mgems::fmt_double(row.cost_two_stage)
              << ", one-stage " << mgems::fmt_double(row.cost_one_stage) << "\n";
  std::cout << "reports: " << outdir << "\n";
  return 0;
}

int cmd_export_model(const CommonOpts& o, const std::string& which, int day, int slot,
                     const std::string& out) {
  mgems::MicrogridConfig cfg = resolve_config(o);
  mgems::TraceSet ts = resolve_traces(cfg, o);
  mgems::Linearization lin = mgems::make_linearization(cfg);

  auto replay = [&](int horizon) {
    mgems::ScenarioConfig sc;
    sc.mode = mgems::SimMode::two_stage;
    sc.horizon = horizon;
    sc.seed = o.seed;
    sc.rho = o.rho;
    return mgems::run_scenario(cfg, ts, sc);
  };

  mgems::MilpModel model;
  if (which == "p0") {
    if (day < 0 || (day + 1) * 24 > ts.horizon())
      throw mgems::TraceError("--day outside the trace horizon");
    std::vector<mgems::CgState> cg = cfg.cg_init;
    std::vector<mgems::EssState> ess = cfg.ess_init;
    if (day > 0) {
      mgems::SimReport rep = replay(day * 24);
      mgems::QueueState qs;
      states_at(cfg, rep, day * 24, cg, ess, qs);
    }
    std::vector<mgems::SlotObservation> obs(24);
    for (int k = 0; k < 24; ++k) obs[k] = ts.observe(day * 24 + k, true);
    model = mgems::build_p0(cfg, lin, obs, day * 24, cg, ess).model;
  } else if (which == "p1") {
    if (slot < 0 || slot >= ts.horizon())
      throw mgems::TraceError("--slot outside the trace horizon");
    int days_needed = slot / 24 + 1;
    mgems::SimReport rep = replay(days_needed * 24);
    std::vector<mgems::CgState> cg;
    std::vector<mgems::EssState> ess;
    mgems::QueueState qs;
    states_at(cfg, rep, slot, cg, ess, qs);
    const mgems::UcPlan& plan = rep.plans.at(slot / 24);
    int k = slot % 24;
    mgems::DispatchInputs din;
    din.obs = ts.observe(slot, false);
    din.slot_abs = slot;
    din.cg_now = cg;
    din.ess_now = ess;
    din.queues = qs;
    int ncg = static_cast<int>(cfg.cgs.size());
    din.u_star.resize(ncg);
    din.v_star.resize(ncg);
    din.tau.resize(ncg);
    for (int i = 0; i < ncg; ++i) {
      din.u_star[i] = plan.u[plan.at(i, k)];
      din.v_star[i] = plan.v[plan.at(i, k)];
      din.tau[i] = plan.tau[plan.at(i, k)];
    }
    mgems::LyapunovParams lyap = mgems::compute_lyapunov(cfg);
    model = mgems::build_p1(cfg, lin, lyap, din).model;
  } else {
    throw CLI::ValidationError("--which", "expected p0 or p1, got '" + which + "'");
  }
  mgems::export_model_file(model, out);
  std::cout << "wrote " << out << " (" << model.n_vars() << " vars, " << model.n_rows()
            << " rows, " << model.n_binary() << " binary)\n";
  return 0;
}

int cmd_validate_config(const CommonOpts& o) {
  mgems::MicrogridConfig cfg = resolve_config(o);
  mgems::LyapunovParams lyap = mgems::compute_lyapunov(cfg);
  std::cout << "config ok: " << cfg.cgs.size() << " generators, " << cfg.esses.size()
            << " storage units\n";
  std::cout << "v_max: " << mgems::fmt_double(lyap.v_max)
            << ", v: " << mgems::fmt_double(lyap.v) << "\n";
  for (std::size_t j = 0; j < lyap.ess.size(); ++j)
    std::cout << "beta" << j + 1 << ": " << mgems::fmt_double(lyap.ess[j].beta) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"microgrid two-stage scheduling toolkit"};
  app.require_subcommand(1);

  CommonOpts gen_o, run_o, sweep_o, exp_o, val_o;
  std::string gen_out = "traces.csv";
  std::string run_mode = "two-stage", run_out = "out";
  bool run_omit_ss = false, run_omit_aging = false;
  std::string sweep_rhos = "0.5,1,1.5,2", sweep_out = "sweep";
  std::string exp_which = "p0", exp_out = "model.txt";
  int exp_day = 0, exp_slot = 0;

  CLI::App* gen = app.add_subcommand("generate-traces", "write a synthetic trace CSV");
  add_common(gen, gen_o, false);
  gen->add_option("--out", gen_out, "output CSV path");

  CLI::App* run = app.add_subcommand("run", "run one scenario and write reports");
  add_common(run, run_o, true);
  run->add_option("--mode", run_mode, "two-stage | one-stage | benchmark");
  run->add_flag("--omit-startstop-cost", run_omit_ss,
                "drop start/stop terms from the optimization objective");
  run->add_flag("--omit-ess-aging-cost", run_omit_aging,
                "drop storage aging terms from the optimization objective");
  run->add_option("--out", run_out, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep-rho",
                                       "paired two-stage/one-stage runs over rho values");
  add_common(sweep, sweep_o, false);
  sweep->add_option("--rho-list", sweep_rhos, "comma-separated rho values");
  sweep->add_option("--out", sweep_out, "output directory");

  CLI::App* exp = app.add_subcommand("export-model", "write one optimization model as text");
  add_common(exp, exp_o, true);
  exp->add_option("--which", exp_which, "p0 (day plan) or p1 (slot dispatch)");
  exp->add_option("--day", exp_day, "day index for p0");
  exp->add_option("--slot", exp_slot, "absolute slot index for p1");
  exp->add_option("--out", exp_out, "output model file");

  CLI::App* val = app.add_subcommand("validate-config", "check a config and print key constants");
  add_common(val, val_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_generate_traces(gen_o, gen_out);
    if (run->parsed())
      return cmd_run(run_o, run_mode, run_omit_ss, run_omit_aging, run_out);
    if (sweep->parsed()) return cmd_sweep_rho(sweep_o, sweep_rhos, sweep_out);
    if (exp->parsed())
      return cmd_export_model(exp_o, exp_which, exp_day, exp_slot, exp_out);
    if (val->parsed()) return cmd_validate_config(val_o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return 1;
  } catch (const mgems::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const mgems::TraceError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const mgems::SolverError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const mgems::InvariantError& e) {
    std::cerr << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "internal: " << e.what() << "\n";
    return 5;
  }
  return 1;
}
