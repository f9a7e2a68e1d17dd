#include "cwi/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cwi/imethod.hpp"
#include "cwi/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace cwi::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// output staging: artifacts are written under <name>.partial and renamed in
// one pass once the whole run has succeeded; a failed run leaves only
// .partial files behind. run.log (timestamps) stays outside the manifest.
class OutputSink {
 public:
  explicit OutputSink(const fs::path& dir) : dir_(dir) {
    fs::create_directories(dir_);
    log_.open(dir_ / "run.log", std::ios::app);
    log_line("run started");
  }

  const fs::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& content) {
    fs::path p = dir_ / (name + ".partial");
    fs::create_directories(p.parent_path());
    write_text_file(p, content);
    declare(name);
  }

  /// Directory artifact staged as <name>.partial by the caller.
  fs::path stage_dir(const std::string& name) {
    fs::path p = dir_ / (name + ".partial");
    fs::create_directories(p);
    declare(name);
    return p;
  }

  void declare(const std::string& name) {
    if (std::find(names_.begin(), names_.end(), name) == names_.end())
      names_.push_back(name);
  }

  void log_line(const std::string& msg) {
    auto now = std::chrono::system_clock::now();
    log_ << std::chrono::duration_cast<std::chrono::milliseconds>(
                now.time_since_epoch())
                .count()
         << " " << msg << "\n";
    log_.flush();
  }

  void finalize(const std::string& config_hash) {
    ordered_json man;
    man["config_hash"] = config_hash;
    std::sort(names_.begin(), names_.end());
    man["artifacts"] = names_;
    write_text_file(dir_ / "manifest.json.partial", man.dump(2) + "\n");
    names_.push_back("manifest.json");
    for (const std::string& name : names_) {
      fs::path partial = dir_ / (name + ".partial");
      fs::path final_p = dir_ / name;
      if (fs::exists(final_p)) fs::remove_all(final_p);
      fs::rename(partial, final_p);
    }
    log_line("run finished");
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
  std::ofstream log_;
};

// ---------------------------------------------------------------------------
// config schema
void validate_keys(const json& j, const std::set<std::string>& allowed,
                   const std::string& where) {
  if (!j.is_object()) throw UsageError("config: " + where + " must be an object");
  std::string bad;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad += (bad.empty() ? "" : ", ") + it.key();
  if (!bad.empty())
    throw UsageError("config: unknown key(s) in " + where + ": " + bad);
}

bool is_auto(const json& j, const std::string& key) {
  return !j.contains(key) || (j[key].is_string() && j[key] == "auto");
}

double num_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw UsageError("config: " + key + " must be a number");
  return j[key].get<double>();
}

struct ResolvedConfig {
  ordered_json echo;   // what config-echo.json carries (without the hash)
  std::string hash;

  Recipe recipe;
  double s = 0.75;
  double T = 1.0;
  int n = 32;
  double L = 2.0 * std::numbers::pi;
  double dt = 0.0;  // 0 = auto (quarter of the stability bound)
  int stride = 4;
  std::uint64_t seed = 1;
  std::optional<double> N, epsilon, C0;
  double C = 1.0;
  double envelope_C = 1.0;
  bool save_snapshots = false;
};

Recipe parse_recipe(const json& r, double box_length, double config_s) {
  if (!r.contains("name") || !r["name"].is_string())
    throw UsageError("config: recipe.name is required");
  Recipe out;
  out.kind = Recipe::kind_from_name(r["name"].get<std::string>());
  out.box_length = box_length;
  switch (out.kind) {
    case Recipe::Kind::gaussian_bump:
      validate_keys(r, {"name", "amplitude", "width", "center"}, "recipe");
      break;
    case Recipe::Kind::plane_wave_packet:
      validate_keys(r, {"name", "amplitude", "width", "center", "wavevector"},
                    "recipe");
      break;
    case Recipe::Kind::random_sobolev:
      validate_keys(r, {"name", "amplitude", "s", "roughness"}, "recipe");
      break;
  }
  out.amplitude = num_or(r, "amplitude", 1.0);
  if (out.kind == Recipe::Kind::random_sobolev) {
    out.sobolev_s = num_or(r, "s", config_s);
    out.roughness = num_or(r, "roughness", 0.05);
    if (!(out.roughness > 0.0))
      throw UsageError("config: recipe.roughness must be positive");
  } else {
    out.width = num_or(r, "width", box_length / 16.0);
    if (!(out.width > 0.0))
      throw UsageError("config: recipe.width must be positive");
    out.center = Eigen::Vector3d::Constant(box_length / 2.0);
    if (r.contains("center")) {
      auto c = r["center"].get<std::vector<double>>();
      if (c.size() != 3)
        throw UsageError("config: recipe.center must have 3 components");
      out.center = Eigen::Vector3d(c[0], c[1], c[2]);
    }
    if (r.contains("wavevector")) {
      auto w = r["wavevector"].get<std::vector<double>>();
      if (w.size() != 3)
        throw UsageError("config: recipe.wavevector must have 3 components");
      out.wavevector = Eigen::Vector3d(w[0], w[1], w[2]);
    }
  }
  return out;
}

json apply_overrides(json cfg, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw UsageError("--set expects key=value, got: " + kv);
    std::string path = kv.substr(0, eq), value = kv.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (...) {
      parsed = value;  // bare strings stay strings
    }
    json* node = &cfg;
    std::size_t pos = 0;
    while (true) {
      auto dot = path.find('.', pos);
      std::string key = path.substr(pos, dot - pos);
      if (dot == std::string::npos) {
        (*node)[key] = parsed;
        break;
      }
      node = &(*node)[key];
      pos = dot + 1;
    }
  }
  return cfg;
}

ResolvedConfig resolve_config(const fs::path& file,
                              const std::vector<std::string>& sets,
                              std::optional<std::uint64_t> seed_flag,
                              bool for_gwp) {
  json cfg;
  try {
    cfg = json::parse(read_text_file(file));
  } catch (const std::exception& e) {
    throw UsageError(std::string("config: cannot parse ") + file.string() +
                     ": " + e.what());
  }
  cfg = apply_overrides(cfg, sets);
  cfg.erase("config_hash");  // echoes are valid configs

  validate_keys(cfg,
                {"s", "T", "grid", "dt", "stride", "recipe", "seed", "N",
                 "epsilon", "C", "C0", "envelope_C", "save_snapshots"},
                "top level");
  if (!cfg.contains("grid") || !cfg.contains("recipe"))
    throw UsageError("config: grid and recipe sections are required");
  validate_keys(cfg["grid"], {"n", "L"}, "grid");

  ResolvedConfig rc;
  rc.s = num_or(cfg, "s", 0.75);
  if (!(rc.s > 0.5 && rc.s < 1.0))
    throw UsageError("config: s must lie in the open interval (1/2, 1)");
  if (for_gwp && !(rc.s > 13.0 / 18.0))
    throw UsageError(
        "config: the gwp pipeline requires s in the open interval (13/18, 1)");
  rc.T = num_or(cfg, "T", 1.0);
  if (!(rc.T > 0.0)) throw UsageError("config: T must be positive");

  if (!cfg["grid"].contains("n"))
    throw UsageError("config: grid.n is required");
  rc.n = cfg["grid"]["n"].get<int>();
  if (rc.n < 8 || (rc.n & (rc.n - 1)) != 0)
    throw UsageError("config: grid.n must be a power of two >= 8");

  // Dry recipe parse (box unknown yet) to learn the kind for L = auto.
  bool L_auto = is_auto(cfg["grid"], "L");
  if (L_auto) {
    Recipe probe = parse_recipe(cfg["recipe"], 1.0, rc.s);
    if (!probe.is_localized())
      throw UsageError(
          "config: grid.L = auto requires a localized recipe; random-sobolev "
          "needs an explicit box length");
    rc.L = 16.0 * probe.support_radius();
  } else {
    rc.L = cfg["grid"]["L"].get<double>();
    if (!(rc.L > 0.0)) throw UsageError("config: grid.L must be positive");
  }
  rc.recipe = parse_recipe(cfg["recipe"], rc.L, rc.s);

  Grid3 grid(rc.n, rc.L);
  if (!is_auto(cfg, "dt")) {
    rc.dt = cfg["dt"].get<double>();
    if (!(rc.dt > 0.0))
      throw UsageError("config: dt must be positive");
    if (!for_gwp && rc.dt > stability_bound(grid) * (1.0 + 1e-12))
      throw UsageError("config: dt exceeds the stability bound 0.5 L/n = " +
                       std::to_string(stability_bound(grid)));
  }
  rc.stride = static_cast<int>(num_or(cfg, "stride", 4));
  if (rc.stride < 1) throw UsageError("config: stride must be >= 1");
  rc.seed = seed_flag ? *seed_flag
                      : static_cast<std::uint64_t>(num_or(cfg, "seed", 1));
  if (!is_auto(cfg, "N")) {
    rc.N = cfg["N"].get<double>();
    if (!(*rc.N >= 1.0))
      throw UsageError("config: N must be a dyadic number >= 1");
  }
  if (!is_auto(cfg, "epsilon")) {
    rc.epsilon = cfg["epsilon"].get<double>();
    if (!(*rc.epsilon > 0.0))
      throw UsageError("config: epsilon must be positive");
  }
  if (!is_auto(cfg, "C0")) rc.C0 = cfg["C0"].get<double>();
  rc.C = num_or(cfg, "C", 1.0);
  rc.envelope_C = num_or(cfg, "envelope_C", 1.0);
  rc.save_snapshots = cfg.value("save_snapshots", false);

  // Echo with resolved values; auto markers stay for run-determined knobs.
  ordered_json echo;
  echo["s"] = rc.s;
  echo["T"] = rc.T;
  echo["grid"] = {{"n", rc.n}, {"L", rc.L}};
  if (rc.dt > 0.0)
    echo["dt"] = rc.dt;
  else
    echo["dt"] = "auto";
  echo["stride"] = rc.stride;
  ordered_json er;
  er["name"] = rc.recipe.name();
  er["amplitude"] = rc.recipe.amplitude;
  if (rc.recipe.kind == Recipe::Kind::random_sobolev) {
    er["s"] = rc.recipe.sobolev_s;
    er["roughness"] = rc.recipe.roughness;
  } else {
    er["width"] = rc.recipe.width;
    er["center"] = {rc.recipe.center[0], rc.recipe.center[1],
                    rc.recipe.center[2]};
    if (rc.recipe.kind == Recipe::Kind::plane_wave_packet)
      er["wavevector"] = {rc.recipe.wavevector[0], rc.recipe.wavevector[1],
                          rc.recipe.wavevector[2]};
  }
  echo["recipe"] = er;
  echo["seed"] = rc.seed;
  echo["N"] = rc.N ? json(*rc.N) : json("auto");
  echo["epsilon"] = rc.epsilon ? json(*rc.epsilon) : json("auto");
  echo["C"] = rc.C;
  echo["C0"] = rc.C0 ? json(*rc.C0) : json("auto");
  echo["envelope_C"] = rc.envelope_C;
  echo["save_snapshots"] = rc.save_snapshots;
  rc.echo = echo;
  rc.hash = fnv1a_hex(echo.dump());
  return rc;
}

void write_echo(OutputSink& sink, const ResolvedConfig& rc) {
  ordered_json echo = rc.echo;
  echo["config_hash"] = rc.hash;
  sink.write("config-echo.json", echo.dump(2) + "\n");
}

double default_N(const Grid3& grid) {
  return std::exp2(std::floor(std::log2(grid.xi_max() / 4.0)));
}

// ---------------------------------------------------------------------------
ordered_json report_to_json(const GwpReport& rep) {
  ordered_json j;
  j["choice"] = {{"s", rep.choice.s},
                 {"N", rep.choice.N},
                 {"lambda", rep.choice.lambda},
                 {"C0", rep.choice.C0},
                 {"epsilon", rep.choice.epsilon},
                 {"epsilon_clamped", rep.choice.epsilon_clamped}};
  j["T"] = rep.T;
  j["scaled_span"] = rep.scaled_span;
  j["grid"] = {{"n", rep.grid_n}, {"L", rep.grid_L}};
  j["dt"] = rep.dt;
  j["stride"] = rep.stride;
  j["seed"] = rep.seed;
  j["sup_EIu"] = rep.sup_EIu;
  j["initial_EIu"] = rep.initial_EIu;
  if (rep.gate_violation_t)
    j["gate_violation_t"] = *rep.gate_violation_t;
  else
    j["gate_violation_t"] = nullptr;
  j["accumulated_predicted"] = rep.accumulated_predicted;
  j["growth_exponent"] = rep.growth_exp;
  j["increment_identity"] = {
      {"commutator", rep.increment_identity.commutator},
      {"delta_E", rep.increment_identity.delta_E},
      {"mismatch_rel", rep.increment_identity.mismatch_rel}};
  j["datum_hs_sq"] = rep.datum_hs_sq;
  j["measured_final_sq"] = rep.measured_final_sq;
  j["envelope"] = rep.envelope;
  j["growth_envelope"] = rep.growth_envelope;
  if (rep.verdict) {
    const char* kind = rep.verdict->kind == GwpVerdict::Kind::consistent
                           ? "consistent"
                           : rep.verdict->kind == GwpVerdict::Kind::bound_violated
                                 ? "bound-violated"
                                 : "inconclusive";
    j["verdict"] = {{"kind", kind}, {"detail", rep.verdict->detail}};
  }
  j["aborted"] = rep.aborted;
  j["conventions"] = {
      {"asymptotic_exponent_adjustments", "0- and 0+ treated as 0"},
      {"comparability_factor", 4.0},
      {"vanishing_factor", 0.25}};
  return j;
}

// ---------------------------------------------------------------------------
int cmd_simulate(const fs::path& config, const fs::path& out,
                 std::optional<std::uint64_t> seed,
                 const std::vector<std::string>& sets) {
  ResolvedConfig rc = resolve_config(config, sets, seed, false);
  OutputSink sink(out);
  write_echo(sink, rc);

  Grid3 grid(rc.n, rc.L);
  double N = rc.N ? *rc.N : default_N(grid);
  MultiplierProfile prof(rc.s, N);
  double dt = rc.dt > 0.0 ? rc.dt : stability_bound(grid) / 4.0;

  auto [u0, u1] = synthesize_initial_data(grid, rc.recipe, rc.seed);
  WaveState state{0.0, std::move(u0), std::move(u1)};

  // Boundary monitor (localized data only): first snapshot time at which the
  // outermost shell of thickness L/16 holds at least 1e-6 of the energy.
  bool monitor = rc.recipe.is_localized();
  Eigen::ArrayXd boundary_mask;
  if (monitor) {
    boundary_mask.resize(grid.size());
    double h = rc.L / rc.n, margin = rc.L / 16.0;
    std::int64_t f = 0;
    for (int i1 = 0; i1 < rc.n; ++i1)
      for (int i2 = 0; i2 < rc.n; ++i2)
        for (int i3 = 0; i3 < rc.n; ++i3, ++f) {
          auto edge = [&](int i) {
            double x = i * h;
            return std::min(x, rc.L - x) < margin;
          };
          boundary_mask[f] = (edge(i1) || edge(i2) || edge(i3)) ? 1.0 : 0.0;
        }
  }
  std::optional<double> boundary_contact;
  Eigen::ArrayXd xi_sq = grid.xi_norm_table().square();

  std::vector<double> times, E_u, E_Iu, Hs, Hs1;
  Eigen::ArrayXd m_table = prof.table(grid);
  Eigen::ArrayXd ws = (1.0 + grid.xi_norm_table()).pow(2.0 * rc.s);
  Eigen::ArrayXd ws1 = (1.0 + grid.xi_norm_table()).pow(2.0 * (rc.s - 1.0));

  fs::path snap_dir;
  if (rc.save_snapshots) snap_dir = sink.stage_dir("snapshots");
  std::vector<double> snap_times;
  int snap_count = 0;

  EvolveOptions opts;
  opts.store = false;
  opts.observer = [&](const WaveState& st, int idx) {
    times.push_back(st.t);
    E_u.push_back(energy(st));
    WaveState sm{st.t, SpectralField(grid, st.u.coeff * m_table),
                 SpectralField(grid, st.ut.coeff * m_table)};
    E_Iu.push_back(energy(sm));
    Hs.push_back(std::sqrt(grid.volume() * (ws * st.u.coeff.abs2()).sum()));
    Hs1.push_back(std::sqrt(grid.volume() * (ws1 * st.ut.coeff.abs2()).sum()));
    if (monitor && !boundary_contact) {
      Eigen::ArrayXd ut_p = inverse_transform_unchecked(st.ut);
      Eigen::ArrayXd u_p = inverse_transform_unchecked(st.u);
      Eigen::ArrayXd dens = 0.5 * ut_p.square() + 0.25 * u_p.pow(4);
      for (int axis = 0; axis < 3; ++axis) {
        Eigen::ArrayXcd dkc(grid.size());
        for (std::int64_t f = 0; f < grid.size(); ++f)
          dkc[f] = std::complex<double>(0.0, grid.xi(f)[axis]) * st.u.coeff[f];
        Eigen::ArrayXd dp = inverse_transform_unchecked({grid, dkc});
        dens += 0.5 * dp.square();
      }
      double total = dens.sum();
      if (total > 0.0 && (dens * boundary_mask).sum() / total >= 1e-6)
        boundary_contact = st.t;
    }
    if (rc.save_snapshots) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%06d.cwi", idx);
      write_snapshot(snap_dir / name, st, rc.s, N);
      snap_times.push_back(st.t);
      ++snap_count;
    }
  };
  Trajectory traj = evolve(state, rc.T, dt, rc.stride, opts);

  if (rc.save_snapshots) {
    ordered_json man;
    man["dt"] = dt;
    man["stride"] = rc.stride;
    man["nonlinear"] = true;
    man["cubic_sign"] = -1.0;
    man["n"] = rc.n;
    man["L"] = rc.L;
    man["s"] = rc.s;
    man["N"] = N;
    man["config_hash"] = rc.hash;
    man["times"] = snap_times;
    write_text_file(snap_dir / "manifest.json", man.dump(2) + "\n");
  }

  EnergyTrajectory et{times, E_u, E_Iu, Hs, Hs1};
  sink.write("energy.csv",
             energy_trajectory_csv(et, rc.hash, rc.s, N, rc.L, rc.n, dt));
  ordered_json summary;
  summary["final_time"] = times.back();
  summary["snapshots"] = rc.save_snapshots ? snap_count : 0;
  summary["sup_E_u"] = *std::max_element(E_u.begin(), E_u.end());
  summary["aborted"] = traj.aborted;
  summary["boundary_contact_time"] =
      boundary_contact ? json(*boundary_contact) : json(nullptr);
  sink.write("run_summary.json", summary.dump(2) + "\n");
  if (traj.aborted)
    throw std::runtime_error(
        "simulate: field became non-finite after snapshot " +
        std::to_string(times.size() - 1) +
        "; partial outputs carry the .partial suffix");
  sink.finalize(rc.hash);
  return 0;
}

int cmd_almost_conservation(const fs::path& config, const fs::path& out,
                            const std::string& sweep,
                            std::optional<std::uint64_t> seed,
                            const std::vector<std::string>& sets) {
  ResolvedConfig rc = resolve_config(config, sets, seed, false);
  OutputSink sink(out);
  write_echo(sink, rc);

  Grid3 grid(rc.n, rc.L);
  std::vector<double> Ns;
  if (!sweep.empty()) {
    std::stringstream ss(sweep);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) Ns.push_back(std::stod(tok));
  } else {
    Ns.push_back(rc.N ? *rc.N : default_N(grid));
  }
  if (Ns.empty()) throw UsageError("almost-conservation: empty N sweep");

  AlmostConservationConfig acfg;
  acfg.recipe = rc.recipe;
  acfg.s = rc.s;
  acfg.epsilon = rc.epsilon ? *rc.epsilon : 0.0;  // 0: per-N sqrt(N)
  acfg.T_span = rc.T;
  acfg.grid_n = rc.n;
  acfg.dt = rc.dt;
  acfg.stride = rc.stride;
  acfg.seed = rc.seed;
  std::vector<GwpReport> reports = run_almost_conservation(acfg, Ns);

  for (const GwpReport& rep : reports) {
    char sub[64];
    std::snprintf(sub, sizeof sub, "N_%g", rep.choice.N);
    sink.write(std::string(sub) + "/report.json",
               report_to_json(rep).dump(2) + "\n");
    sink.write(std::string(sub) + "/energy.csv",
               energy_trajectory_csv(rep.series, rc.hash, rc.s, rep.choice.N,
                                     rc.L, rc.n, rep.dt));
    sink.write(std::string(sub) + "/increments.csv", rep.increments_csv());
  }
  sink.finalize(rc.hash);
  return 0;
}

int cmd_gwp(const fs::path& config, const fs::path& out,
            std::optional<std::uint64_t> seed,
            const std::vector<std::string>& sets) {
  ResolvedConfig rc = resolve_config(config, sets, seed, true);
  OutputSink sink(out);
  write_echo(sink, rc);

  GwpConfig gc;
  gc.recipe = rc.recipe;
  gc.s = rc.s;
  gc.T = rc.T;
  gc.grid_n = rc.n;
  gc.safety_C = rc.C;
  gc.envelope_C = rc.envelope_C;
  gc.dt = rc.dt;
  gc.stride = rc.stride;
  gc.seed = rc.seed;
  gc.fixed_N = rc.N;
  gc.fixed_C0 = rc.C0;
  gc.fixed_epsilon = rc.epsilon;
  GwpReport rep = run_gwp_experiment(gc);

  sink.write("report.json", report_to_json(rep).dump(2) + "\n");
  sink.write("energy.csv",
             energy_trajectory_csv(rep.series, rc.hash, rc.s, rep.choice.N,
                                   rep.grid_L, rc.n, rep.dt));
  sink.write("increments.csv", rep.increments_csv());
  if (rep.aborted)
    throw std::runtime_error(
        "gwp: run aborted on a non-finite field; partial outputs carry the "
        ".partial suffix");
  sink.finalize(rc.hash);
  return 0;
}

int cmd_verify_symbol(double s, double N, std::int64_t samples,
                      std::uint64_t seed, const fs::path& out) {
  MultiplierProfile prof(s, N);
  SymbolReport rep = verify_symbol_bounds(prof, samples, seed);

  ordered_json cfg_echo;
  cfg_echo["s"] = s;
  cfg_echo["N"] = N;
  cfg_echo["samples"] = samples;
  cfg_echo["seed"] = seed;
  std::string hash = fnv1a_hex(cfg_echo.dump());

  OutputSink sink(out);
  cfg_echo["config_hash"] = hash;
  sink.write("config-echo.json", cfg_echo.dump(2) + "\n");
  sink.write("symbol_report.csv", rep.csv());
  ordered_json summary;
  summary["pass"] = rep.pass;
  summary["vanishing_samples"] = rep.vanishing_samples;
  summary["vanishing_max_mu"] = rep.vanishing_max_mu;
  for (const CaseStats& cs : rep.cases)
    summary["max_ratio"][case_name(cs.label)] = cs.max_ratio;
  sink.write("symbol_summary.json", summary.dump(2) + "\n");
  sink.finalize(hash);
  if (!rep.pass) throw std::runtime_error(
      "verify-symbol: a case ratio exceeded the configured ceiling");
  return 0;
}

SubInterval parse_interval(const std::string& spec) {
  auto comma = spec.find(',');
  if (comma == std::string::npos)
    throw UsageError("--interval expects a,b");
  return {std::stod(spec.substr(0, comma)), std::stod(spec.substr(comma + 1))};
}

int cmd_breakdown(const fs::path& traj_dir, const std::string& interval,
                  const fs::path& out) {
  LoadedTrajectory lt = load_trajectory(traj_dir);
  MultiplierProfile prof(lt.s, lt.N);
  SubInterval J = parse_interval(interval);

  OutputSink sink(out);
  BreakdownTable table =
      increment_shell_breakdown(lt.traj, J, prof);
  CommutatorResult idn = energy_increment_commutator(lt.traj, J, prof);
  sink.write("breakdown.csv", table.csv());
  ordered_json summary;
  summary["row_total"] = table.total;
  summary["commutator"] = table.commutator;
  summary["row_sum_mismatch_rel"] =
      std::abs(table.total - table.commutator) /
      std::max(std::abs(table.commutator), 1e-12);
  summary["identity"] = {{"commutator", idn.commutator},
                         {"delta_E", idn.delta_E},
                         {"mismatch_rel", idn.mismatch_rel}};
  summary["rows"] = table.rows.size();
  sink.write("breakdown_summary.json", summary.dump(2) + "\n");
  sink.finalize(lt.config_hash);
  return 0;
}

int cmd_diagnose(const fs::path& traj_dir, const std::string& interval,
                 const fs::path& out) {
  LoadedTrajectory lt = load_trajectory(traj_dir);
  MultiplierProfile prof(lt.s, lt.N);
  const Trajectory& traj = lt.traj;
  SubInterval J = interval.empty()
                      ? SubInterval(traj.t_begin(), traj.t_end())
                      : parse_interval(interval);
  J = snap_interval(traj, J);

  OutputSink sink(out);
  EnergyTrajectory et = measure_energy_trajectory(traj, prof);
  sink.write("energy.csv",
             energy_trajectory_csv(et, lt.config_hash, lt.s, lt.N,
                                   traj.grid.box_length(), traj.grid.n(),
                                   traj.dt));

  ZNormResult zn = z_norm(traj, J, prof, default_pair_set());
  GainNormResult gn = nonlinear_gain_norm(traj, J, prof);
  CommutatorResult idn = energy_increment_commutator(traj, J, prof);

  // Decomposition residual at the right endpoint.
  WaveState lin = adapted_linear_part(traj, J, J.b);
  DuhamelResult nl = duhamel_nonlinear_part(traj, J, J.b);
  const WaveState& ref = traj.states[traj.index_of_time(J.b)];
  SpectralField resid(traj.grid,
                      ref.u.coeff - lin.u.coeff - nl.state.u.coeff);
  double res_h1 = sobolev_norm_field(resid, 1.0, false);
  double ref_h1 = sobolev_norm_field(ref.u, 1.0, false);

  ordered_json diag;
  diag["interval"] = {J.a, J.b};
  diag["z_norm"] = {{"value", zn.value}, {"argmax_pair", zn.argmax.label()}};
  diag["nonlinear_gain"] = {{"value", gn.value},
                            {"predicted_bound", gn.predicted_bound}};
  diag["increment_identity"] = {{"commutator", idn.commutator},
                                {"delta_E", idn.delta_E},
                                {"mismatch_rel", idn.mismatch_rel}};
  diag["decomposition_residual_H1_rel"] =
      res_h1 / std::max(ref_h1, 1e-300);
  diag["duhamel_reduced_order"] = nl.reduced_order;
  sink.write("diagnostics.json", diag.dump(2) + "\n");
  sink.finalize(lt.config_hash);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{
      "cwi: pseudo-spectral simulator and diagnostics for the defocusing "
      "cubic wave equation on a periodic 3-torus"};
  app.require_subcommand(1);

  std::string config, out = "out", sweep, interval, traj_dir;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed_flag;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", config, "config file (JSON)")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { seed_flag = v; }, "seed override");
    sub->add_option("--set", sets, "config override key=value (repeatable)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "evolve and record a run");
  add_common(sim, true);
  CLI::App* ac = app.add_subcommand("almost-conservation",
                                    "measure mollified-energy increments");
  add_common(ac, true);
  ac->add_option("--sweep-N", sweep, "comma-separated N list, e.g. 4,8,16,32");
  CLI::App* gwp =
      app.add_subcommand("gwp", "run the full parameter pipeline experiment");
  add_common(gwp, true);

  CLI::App* vs = app.add_subcommand("verify-symbol",
                                    "sample and bound the increment symbol");
  double vs_s = 0.75, vs_N = 16.0;
  std::int64_t vs_samples = 100000;
  vs->add_option("--s", vs_s, "regularity exponent")->required();
  vs->add_option("--N", vs_N, "smoothing cutoff")->required();
  vs->add_option("--samples", vs_samples, "samples to draw");
  vs->add_option("--seed", seed_value, "RNG seed")->required();
  vs->add_option("--out", out, "output directory");

  CLI::App* bd = app.add_subcommand("breakdown",
                                    "shell decomposition of the increment");
  bd->add_option("--traj", traj_dir, "trajectory directory")->required();
  bd->add_option("--interval", interval, "a,b")->required();
  bd->add_option("--out", out, "output directory");

  CLI::App* dg = app.add_subcommand("diagnose",
                                    "norms and decomposition diagnostics");
  dg->add_option("--traj", traj_dir, "trajectory directory")->required();
  dg->add_option("--interval", interval, "a,b (default: whole run)");
  dg->add_option("--out", out, "output directory");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }
    if (sim->parsed()) return cmd_simulate(config, out, seed_flag, sets);
    if (ac->parsed())
      return cmd_almost_conservation(config, out, sweep, seed_flag, sets);
    if (gwp->parsed()) return cmd_gwp(config, out, seed_flag, sets);
    if (vs->parsed())
      return cmd_verify_symbol(vs_s, vs_N, vs_samples, seed_value, out);
    if (bd->parsed()) return cmd_breakdown(traj_dir, interval, out);
    if (dg->parsed()) return cmd_diagnose(traj_dir, interval, out);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cwi::cli
