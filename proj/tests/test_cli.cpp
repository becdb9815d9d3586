#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "mgems/milp.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_bin() {
  const char* b = std::getenv("MGCLI_BIN");
  if (!b || !*b) throw std::runtime_error("MGCLI_BIN is not set");
  return b;
}

fs::path tmp_dir() {
  const char* d = std::getenv("MGEMS_TMP");
  fs::path p = d && *d ? fs::path(d) : fs::temp_directory_path() / "mgems_cli";
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& capture) {
  std::string cmd =
      "\"" + cli_bin() + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
  int raw = std::system(cmd.c_str());
  if (raw == -1) return -1;
  if (WIFEXITED(raw)) return WEXITSTATUS(raw);
  return -2;
}

int run_cli(const std::string& args) { return run_cli(args, tmp_dir() / "last.log"); }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string drop_lines_containing(const std::string& text, const std::string& needle) {
  std::istringstream in(text);
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.find(needle) != std::string::npos) continue;
    out += line;
    out += '\n';
  }
  return out;
}

std::string drop_last_column(const std::string& text) {
  std::istringstream in(text);
  std::string out, line;
  while (std::getline(in, line)) {
    out += line.substr(0, line.rfind(','));
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("usage problems exit with code 1") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("export-model --which zz --horizon 24") == 1);
}

TEST_CASE("config problems exit with code 2") {
  fs::path out = tmp_dir() / "cfg_run";
  CHECK(run_cli("run --alpha-avg 0.5 --alpha-max 0.4 --horizon 24 --out \"" +
                out.string() + "\"") == 2);

  fs::path ini = tmp_dir() / "bad.ini";
  std::ofstream(ini) << "[service]\nnonsense = 1\n";
  CHECK(run_cli("validate-config --config \"" + ini.string() + "\"") == 2);
}

TEST_CASE("trace problems exit with code 3") {
  fs::path out = tmp_dir() / "trace_run";
  CHECK(run_cli("run --horizon 23 --out \"" + out.string() + "\"") == 3);
  CHECK(run_cli("generate-traces --horizon 23 --out \"" +
                (tmp_dir() / "t23.csv").string() + "\"") == 3);
}

TEST_CASE("trace generation is seed-deterministic") {
  fs::path a = tmp_dir() / "tr_a.csv";
  fs::path b = tmp_dir() / "tr_b.csv";
  fs::path c = tmp_dir() / "tr_c.csv";
  REQUIRE(run_cli("generate-traces --horizon 48 --seed 9 --out \"" + a.string() + "\"") == 0);
  REQUIRE(run_cli("generate-traces --horizon 48 --seed 9 --out \"" + b.string() + "\"") == 0);
  REQUIRE(run_cli("generate-traces --horizon 48 --seed 10 --out \"" + c.string() + "\"") == 0);
  std::string ta = slurp(a);
  CHECK(ta == slurp(b));
  CHECK(ta != slurp(c));
  CHECK(ta.rfind("slot_index,d_ie_kw,d_e_kw,p_rg_kw,", 0) == 0);
  CHECK(std::count(ta.begin(), ta.end(), '\n') == 49);
}

TEST_CASE("a run emits the full artifact set and is byte-reproducible") {
  fs::path d1 = tmp_dir() / "run_a";
  fs::path d2 = tmp_dir() / "run_b";
  std::string common = "run --horizon 24 --seed 4 --mode two-stage ";
  REQUIRE(run_cli(common + "--out \"" + d1.string() + "\"") == 0);
  REQUIRE(run_cli(common + "--out \"" + d2.string() + "\"") == 0);

  for (const char* f :
       {"report_slots.csv", "summary.txt", "dispatch_log.csv", "series_generation.csv",
        "series_costs.csv", "violations.csv", "traces.csv", "uc_plan_day0.csv",
        "manifest.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(d1 / f));
  }

  std::string summary = slurp(d1 / "summary.txt");
  CHECK(summary.find("mode: two-stage") != std::string::npos);
  CHECK(summary.find("total_cost: ") != std::string::npos);
  CHECK(summary.find("hard_violations: 0") != std::string::npos);

  std::string manifest = slurp(d1 / "manifest.json");
  CHECK(manifest.find("\"tool\": \"mgcli\"") != std::string::npos);
  CHECK(manifest.find("uc_plan_day0.csv") != std::string::npos);

  for (const char* f : {"report_slots.csv", "summary.txt", "series_generation.csv",
                        "series_costs.csv", "violations.csv", "traces.csv",
                        "uc_plan_day0.csv"}) {
    CAPTURE(f);
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  CHECK(drop_last_column(slurp(d1 / "dispatch_log.csv")) ==
        drop_last_column(slurp(d2 / "dispatch_log.csv")));
  CHECK(drop_lines_containing(slurp(d1 / "manifest.json"), "created_at") ==
        drop_lines_containing(slurp(d2 / "manifest.json"), "created_at"));
}

TEST_CASE("exported day model imports and round-trips") {
  fs::path out = tmp_dir() / "p0.txt";
  REQUIRE(run_cli("export-model --which p0 --day 0 --horizon 24 --seed 4 --out \"" +
                  out.string() + "\"") == 0);
  mgems::MilpModel m = mgems::import_model_file(out.string());
  CHECK(m.n_vars() == 696);
  CHECK(m.n_binary() == 192);
  CHECK(m.n_rows() > 0);
  CHECK(mgems::export_model_text(m) == slurp(out));
}

TEST_CASE("exported slot model imports and round-trips") {
  fs::path out = tmp_dir() / "p1.txt";
  REQUIRE(run_cli("export-model --which p1 --slot 2 --horizon 24 --seed 4 --out \"" +
                  out.string() + "\"") == 0);
  mgems::MilpModel m = mgems::import_model_file(out.string());
  CHECK(m.n_vars() == 29);
  CHECK(m.n_binary() == 8);
  CHECK(mgems::export_model_text(m) == slurp(out));
}

TEST_CASE("validate-config reports the stability constants") {
  fs::path cap = tmp_dir() / "val.txt";
  REQUIRE(run_cli("validate-config", cap) == 0);
  std::string text = slurp(cap);
  CHECK(text.find("config ok: 3 generators, 2 storage units") != std::string::npos);
  CHECK(text.find("v_max: 0.00125176") != std::string::npos);
  CHECK(text.find("beta1: 0.555458") != std::string::npos);
  CHECK(text.find("beta2: 0.690943") != std::string::npos);

  fs::path ini = tmp_dir() / "mini.ini";
  std::ofstream(ini) << "[solver]\nuc_gap_target = 0.01\n[service]\nreserve_req = 100\n";
  REQUIRE(run_cli("validate-config --config \"" + ini.string() + "\"", cap) == 0);
  CHECK(slurp(cap).find("config ok") != std::string::npos);
}
