#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "cwi/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path work_root() {
  static fs::path p = [] {
    fs::path q = fs::temp_directory_path() /
                 ("cwi_cli_" + std::to_string(::getpid()));
    fs::remove_all(q);
    fs::create_directories(q);
    return q;
  }();
  return p;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(CWI_CLI_BINARY) + " " + args + " >" +
                    (work_root() / "stdout.txt").string() + " 2>" +
                    (work_root() / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string stderr_text() {
  return cwi::read_text_file(work_root() / "stderr.txt");
}

fs::path write_config(const std::string& name, const json& j) {
  fs::path p = work_root() / name;
  cwi::write_text_file(p, j.dump(2));
  return p;
}

json base_config() {
  json cfg;
  cfg["s"] = 0.75;
  cfg["T"] = 0.5;
  cfg["grid"] = {{"n", 16}, {"L", 6.283185307179586}};
  cfg["dt"] = "auto";
  cfg["stride"] = 4;
  cfg["recipe"] = {{"name", "gaussian-bump"},
                   {"amplitude", 0.5},
                   {"width", 0.6}};
  cfg["seed"] = 3;
  cfg["N"] = 4.0;
  cfg["save_snapshots"] = true;
  return cfg;
}

// every regular file under dir, relative, excluding run.log and manifest
std::set<std::string> artifact_listing(const fs::path& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string rel = fs::relative(e.path(), dir).string();
    if (rel == "run.log" || rel == "manifest.json") continue;
    out.insert(rel);
  }
  return out;
}

}  // namespace

TEST_CASE("missing config and bad flags exit 2 with usage text") {
  CHECK(run_cli("simulate") == 2);
  CHECK(run_cli("bogus-subcommand") == 2);
  CHECK(run_cli("") == 2);
}

TEST_CASE("config validation: s range, unknown keys, bad n") {
  json cfg = base_config();
  cfg["s"] = 0.5;
  fs::path p = write_config("bad_s.json", cfg);
  CHECK(run_cli("simulate --config " + p.string() + " --out " +
                (work_root() / "o1").string()) == 2);
  CHECK(stderr_text().find("(1/2, 1)") != std::string::npos);

  json cfg2 = base_config();
  cfg2["unknown_knob"] = 1;
  fs::path p2 = write_config("bad_key.json", cfg2);
  CHECK(run_cli("simulate --config " + p2.string() + " --out " +
                (work_root() / "o2").string()) == 2);
  CHECK(stderr_text().find("unknown_knob") != std::string::npos);

  json cfg3 = base_config();
  cfg3["grid"]["n"] = 20;
  fs::path p3 = write_config("bad_n.json", cfg3);
  CHECK(run_cli("simulate --config " + p3.string() + " --out " +
                (work_root() / "o3").string()) == 2);

  json cfg4 = base_config();
  cfg4["dt"] = 100.0;
  fs::path p4 = write_config("bad_dt.json", cfg4);
  CHECK(run_cli("simulate --config " + p4.string() + " --out " +
                (work_root() / "o4").string()) == 2);
  CHECK(stderr_text().find("stability") != std::string::npos);
}

TEST_CASE("simulate writes the declared artifacts and a config echo") {
  fs::path out = work_root() / "sim";
  fs::path p = write_config("sim.json", base_config());
  CHECK(run_cli("simulate --config " + p.string() + " --out " + out.string() +
                " --set recipe.amplitude=0.4") == 0);

  json echo = json::parse(cwi::read_text_file(out / "config-echo.json"));
  CHECK(echo["recipe"]["amplitude"] == 0.4);  // override reflected
  CHECK(echo.contains("config_hash"));
  CHECK(echo["dt"] == "auto");

  json man = json::parse(cwi::read_text_file(out / "manifest.json"));
  std::set<std::string> declared;
  for (const auto& a : man["artifacts"]) {
    std::string name = a.get<std::string>();
    if (fs::is_directory(out / name)) {
      for (const auto& e : fs::recursive_directory_iterator(out / name))
        if (e.is_regular_file())
          declared.insert(fs::relative(e.path(), out).string());
    } else {
      declared.insert(name);
    }
  }
  CHECK(artifact_listing(out) == declared);

  // energy CSV exists with the header line
  std::string csv = cwi::read_text_file(out / "energy.csv");
  CHECK(csv.find("time,E_u,E_Iu,Hs_norm,Hs1_norm") != std::string::npos);

  // snapshots directory is loadable
  CHECK(fs::exists(out / "snapshots" / "manifest.json"));
  auto lt = cwi::load_trajectory(out / "snapshots");
  CHECK(lt.traj.states.size() >= 2);
}

TEST_CASE("zero datum simulate yields an all-zero energy column") {
  fs::path out = work_root() / "simzero";
  json cfg = base_config();
  cfg["recipe"]["amplitude"] = 0.0;
  cfg["save_snapshots"] = false;
  fs::path p = write_config("simzero.json", cfg);
  CHECK(run_cli("simulate --config " + p.string() + " --out " +
                out.string()) == 0);
  std::istringstream csv(cwi::read_text_file(out / "energy.csv"));
  std::string line;
  std::getline(csv, line);  // comment header
  std::getline(csv, line);  // column header
  int rows = 0;
  while (std::getline(csv, line)) {
    auto first_comma = line.find(',');
    auto second_comma = line.find(',', first_comma + 1);
    double e_u = std::stod(line.substr(first_comma + 1,
                                       second_comma - first_comma - 1));
    CHECK(e_u == 0.0);
    ++rows;
  }
  CHECK(rows >= 2);
}

TEST_CASE("runs are byte-reproducible from their config echo") {
  fs::path out1 = work_root() / "rep1";
  fs::path out2 = work_root() / "rep2";
  json cfg = base_config();
  cfg["recipe"] = {{"name", "random-sobolev"}, {"amplitude", 0.3}};
  cfg["save_snapshots"] = false;
  fs::path p = write_config("rep.json", cfg);
  REQUIRE(run_cli("simulate --config " + p.string() + " --out " +
                  out1.string()) == 0);
  REQUIRE(run_cli("simulate --config " + (out1 / "config-echo.json").string() +
                  " --out " + out2.string()) == 0);
  CHECK(cwi::read_text_file(out1 / "energy.csv") ==
        cwi::read_text_file(out2 / "energy.csv"));
  CHECK(cwi::read_text_file(out1 / "run_summary.json") ==
        cwi::read_text_file(out2 / "run_summary.json"));
  CHECK(cwi::read_text_file(out1 / "config-echo.json") ==
        cwi::read_text_file(out2 / "config-echo.json"));
}

TEST_CASE("verify-symbol runs twice to byte-identical reports") {
  fs::path out1 = work_root() / "vs1";
  fs::path out2 = work_root() / "vs2";
  std::string args = "verify-symbol --s 0.75 --N 8 --samples 5000 --seed 11";
  REQUIRE(run_cli(args + " --out " + out1.string()) == 0);
  REQUIRE(run_cli(args + " --out " + out2.string()) == 0);
  CHECK(cwi::read_text_file(out1 / "symbol_report.csv") ==
        cwi::read_text_file(out2 / "symbol_report.csv"));
  CHECK(cwi::read_text_file(out1 / "symbol_report.csv")
            .find("case,N1,N2,N3,N4,max_ratio") != std::string::npos);
}

TEST_CASE("diagnose and breakdown consume a saved trajectory") {
  fs::path out = work_root() / "sim_for_diag";
  json cfg = base_config();
  cfg["T"] = 1.0;
  cfg["N"] = 2.0;
  cfg["dt"] = 0.012;
  cfg["stride"] = 1;
  cfg["recipe"]["amplitude"] = 0.8;
  fs::path p = write_config("diag_base.json", cfg);
  REQUIRE(run_cli("simulate --config " + p.string() + " --out " +
                  out.string()) == 0);

  fs::path dout = work_root() / "diag";
  CHECK(run_cli("diagnose --traj " + (out / "snapshots").string() + " --out " +
                dout.string()) == 0);
  json diag = json::parse(cwi::read_text_file(dout / "diagnostics.json"));
  CHECK(diag["z_norm"]["value"].get<double>() > 0.0);
  CHECK(diag["increment_identity"]["mismatch_rel"].get<double>() < 0.1);
  CHECK(diag["decomposition_residual_H1_rel"].get<double>() < 1e-3);

  fs::path bout = work_root() / "bd";
  CHECK(run_cli("breakdown --traj " + (out / "snapshots").string() +
                " --interval 0,1 --out " + bout.string()) == 0);
  json bsum = json::parse(cwi::read_text_file(bout / "breakdown_summary.json"));
  CHECK(bsum["row_sum_mismatch_rel"].get<double>() < 1e-3);
  std::string bcsv = cwi::read_text_file(bout / "breakdown.csv");
  CHECK(bcsv.find("cumulative_fraction") != std::string::npos);
}

TEST_CASE("almost-conservation sweep writes one report per N") {
  fs::path out = work_root() / "ac";
  json cfg = base_config();
  cfg["T"] = 1.0;
  cfg["epsilon"] = 0.5;
  cfg["recipe"] = {{"name", "random-sobolev"}, {"amplitude", 0.01}};
  cfg["save_snapshots"] = false;
  fs::path p = write_config("ac.json", cfg);
  CHECK(run_cli("almost-conservation --config " + p.string() +
                " --sweep-N 2,4 --out " + out.string()) == 0);
  for (const char* sub : {"N_2", "N_4"}) {
    json rep = json::parse(cwi::read_text_file(out / sub / "report.json"));
    CHECK(rep["increment_identity"]["mismatch_rel"].get<double>() < 1e-2);
    CHECK(fs::exists(out / sub / "increments.csv"));
    CHECK(fs::exists(out / sub / "energy.csv"));
  }
}

TEST_CASE("gwp rejects s outside (13/18, 1) as a config error") {
  json cfg = base_config();
  cfg["s"] = 0.72;  // valid for simulate, invalid for the pipeline
  fs::path p = write_config("gwp_bad.json", cfg);
  CHECK(run_cli("gwp --config " + p.string() + " --out " +
                (work_root() / "gwpbad").string()) == 2);
  CHECK(stderr_text().find("13/18") != std::string::npos);
}

TEST_CASE("gwp produces exactly the files declared in its manifest") {
  fs::path out = work_root() / "gwp";
  json cfg = base_config();
  cfg["T"] = 1.0;
  cfg["N"] = "auto";
  cfg["C0"] = "auto";
  cfg["epsilon"] = "auto";
  cfg["recipe"]["amplitude"] = 0.5;
  cfg["save_snapshots"] = false;
  fs::path p = write_config("gwp.json", cfg);
  REQUIRE(run_cli("gwp --config " + p.string() + " --out " + out.string()) ==
          0);

  json man = json::parse(cwi::read_text_file(out / "manifest.json"));
  std::set<std::string> declared;
  for (const auto& a : man["artifacts"]) declared.insert(a.get<std::string>());
  CHECK(artifact_listing(out) == declared);

  json rep = json::parse(cwi::read_text_file(out / "report.json"));
  CHECK(rep["verdict"]["kind"] == "consistent");
  CHECK(rep["choice"]["lambda"].get<double>() >= 1.0);
}

TEST_CASE("compute failures exit 1 and leave only partial outputs") {
  fs::path out = work_root() / "hot";
  json cfg = base_config();
  cfg["recipe"]["amplitude"] = 1e200;  // overflow in the cubic term
  cfg["save_snapshots"] = false;
  fs::path p = write_config("hot.json", cfg);
  CHECK(run_cli("simulate --config " + p.string() + " --out " +
                out.string()) == 1);
  CHECK(!fs::exists(out / "manifest.json"));
  CHECK(!fs::exists(out / "energy.csv"));
  CHECK(fs::exists(out / "config-echo.json.partial"));
}
