// Acceptance suite: one check per release criterion, each printing a
// PASS/FAIL line with its measured numbers and wall time. Exits nonzero if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cwi/imethod.hpp"
#include "cwi/io.hpp"

using namespace cwi;

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;
constexpr double kPi = std::numbers::pi;

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("%s  criterion %d (%s): %s  [%.1fs]\n", pass ? "PASS" : "FAIL",
              idx, name, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

Recipe gaussian(double amplitude, double width, double L) {
  Recipe r;
  r.kind = Recipe::Kind::gaussian_bump;
  r.amplitude = amplitude;
  r.width = width;
  r.box_length = L;
  r.center = Eigen::Vector3d::Constant(L / 2.0);
  return r;
}

Recipe rough_recipe(double amplitude, double L) {
  Recipe r;
  r.kind = Recipe::Kind::random_sobolev;
  r.amplitude = amplitude;
  r.sobolev_s = 0.75;
  r.roughness = 0.05;
  r.box_length = L;
  return r;
}

WaveState synth_state(const Grid3& g, const Recipe& r, std::uint64_t seed) {
  auto [u0, u1] = synthesize_initial_data(g, r, seed);
  return {0.0, std::move(u0), std::move(u1)};
}

/// Bisect the datum amplitude so E(Iu(0)) at cutoff N sits at `target`.
double calibrate_amplitude(const Grid3& g, Recipe r, double N, double target,
                           std::uint64_t seed) {
  MultiplierProfile prof(0.75, N);
  auto eiu = [&](double amp) {
    Recipe rr = r;
    rr.amplitude = amp;
    return mollified_energy(synth_state(g, rr, seed), prof);
  };
  double lo = 1e-5, hi = 8.0;
  while (eiu(hi) < target) hi *= 2.0;
  for (int i = 0; i < 50; ++i) {
    double mid = std::sqrt(lo * hi);
    (eiu(mid) < target ? lo : hi) = mid;
  }
  return lo;
}

// --------------------------------------------------------------------------
void criterion1_linear_propagator() {
  auto t0 = std::chrono::steady_clock::now();
  Grid3 g(64, kTau);
  WaveState s = synth_state(g, rough_recipe(0.5, kTau), 1);

  double e0 = quadratic_energy(s);
  PropagatorTable fwd(g, 0.02), bwd(g, -0.02);
  WaveState cur = s;
  double drift = 0.0;
  for (int i = 0; i < 1000; ++i) {
    linear_propagate_inplace(cur, fwd);
    drift = std::max(drift, std::abs(quadratic_energy(cur) - e0) / e0);
  }
  for (int i = 0; i < 1000; ++i) linear_propagate_inplace(cur, bwd);
  double scale =
      std::max(s.u.coeff.abs().maxCoeff(), s.ut.coeff.abs().maxCoeff());
  double round_trip =
      std::max((cur.u.coeff - s.u.coeff).abs().maxCoeff(),
               (cur.ut.coeff - s.ut.coeff).abs().maxCoeff()) /
      scale;

  bool pass = drift <= 1e-12 && round_trip <= 1e-12;
  report(1, "exact linear propagator", pass,
         fmt("energy drift %.3e (<= 1e-12), round trip %.3e (<= 1e-12), "
             "n=64, 1000 steps",
             drift, round_trip),
         elapsed(t0));
}

// --------------------------------------------------------------------------
void criterion2_energy_conservation() {
  auto t0 = std::chrono::steady_clock::now();
  Grid3 g(64, kTau);
  WaveState s = synth_state(g, gaussian(0.25, 0.5, kTau), 0);
  double quart = energy(s) - quadratic_energy(s);

  auto drift_of = [&](double dt) {
    double e0 = energy(s), worst = 0.0;
    EvolveOptions opts;
    opts.store = false;
    opts.observer = [&](const WaveState& st, int) {
      worst = std::max(worst, std::abs(energy(st) - e0) / e0);
    };
    evolve(s, 10.0, dt, 8, opts);
    return worst;
  };
  double dt = stability_bound(g) / 4.0;  // the default step
  double d_full = drift_of(dt);
  double d_half = drift_of(dt / 2.0);
  double factor = d_full / d_half;

  bool pass = d_full <= 1e-6 && factor >= 3.5 && quart > 0.0;
  report(2, "full energy conservation", pass,
         fmt("sup drift %.3e (<= 1e-6) over T=10 at n=64 default dt=%.4g; "
             "halving dt improves %.2fx (>= 3.5)",
             d_full, dt, factor),
         elapsed(t0));
}

// --------------------------------------------------------------------------
void criterion3_lp_partition() {
  auto t0 = std::chrono::steady_clock::now();
  Grid3 g(32, kTau);
  auto shells = lattice_shells(g);
  double worst = 0.0;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 100; ++trial) {
    SpectralField f(g);
    for (std::int64_t i = 0; i < g.size(); ++i) f.coeff[i] = {nd(rng), nd(rng)};
    enforce_hermitian(f);
    Eigen::ArrayXcd sum = Eigen::ArrayXcd::Zero(g.size());
    for (const ShellEntry& e : shells)
      sum += lp_project(f, e.shell, e.mode).coeff;
    worst = std::max(
        worst, std::sqrt((sum - f.coeff).abs2().sum() / f.coeff.abs2().sum()));
  }
  report(3, "Littlewood-Paley partition of unity", worst <= 1e-10,
         fmt("worst reconstruction error %.3e (<= 1e-10) on 100 random fields",
             worst),
         elapsed(t0));
}

// --------------------------------------------------------------------------
void criterion4_duhamel_identity() {
  auto t0 = std::chrono::steady_clock::now();
  Grid3 g(32, kTau);
  WaveState s = synth_state(g, rough_recipe(0.3, kTau), 7);
  double dt = stability_bound(g) / 8.0;  // ~81 snapshots per unit time
  Trajectory tr = evolve(s, 2.0, dt, 1);

  auto residual = [&](const Trajectory& t, const SubInterval& J) {
    SubInterval js = snap_interval(t, J);
    WaveState lin = adapted_linear_part(t, js, js.b);
    DuhamelResult nl = duhamel_nonlinear_part(t, js, js.b);
    const WaveState& ref = t.states[t.index_of_time(js.b)];
    SpectralField res(t.grid, ref.u.coeff - lin.u.coeff - nl.state.u.coeff);
    return sobolev_norm_field(res, 1.0, false) /
           sobolev_norm_field(ref.u, 1.0, false);
  };

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ua(0.0, 0.8), ul(0.4, 1.2);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    double a = ua(rng);
    double b = std::min(2.0, a + ul(rng));
    worst = std::max(worst, residual(tr, {a, b}));
  }

  // Simpson-order fall of the quadrature error under snapshot decimation
  auto decimate = [&](int factor) {
    Trajectory out = tr;
    out.stride = tr.stride * factor;
    out.states.clear();
    for (std::size_t i = 0; i < tr.states.size(); i += factor)
      out.states.push_back(tr.states[i]);
    return out;
  };
  SubInterval J(0.0, 1.9);
  double r8 = residual(decimate(8), J);
  double r16 = residual(decimate(16), J);
  double order_ratio = r16 / r8;  // ~16 for a 4th-order rule

  bool pass = worst <= 1e-4 && order_ratio >= 6.0 && order_ratio <= 40.0;
  report(4, "Duhamel decomposition identity", pass,
         fmt("worst H1 residual %.3e (<= 1e-4) over 10 subintervals; stride "
             "doubling error ratio %.1f (in [6, 40], 4th order ~ 16)",
             worst, order_ratio),
         elapsed(t0));
}

// --------------------------------------------------------------------------
// Criteria 5 and 7 share the production almost-conservation sweep.
struct SweepOutcome {
  std::vector<GwpReport> reports;
  double amp = 0.0;
};

SweepOutcome run_sweep_n128() {
  const double L = kPi;  // xi_max = 128 at n = 128, so N = 32 = xi_max/4
  Grid3 g(128, L);
  Recipe r = rough_recipe(1.0, L);
  r.amplitude = calibrate_amplitude(g, r, 32.0, 0.45, 2);

  AlmostConservationConfig cfg;
  cfg.recipe = r;
  cfg.s = 0.75;
  cfg.epsilon = 1.0;  // unit subintervals
  cfg.T_span = 4.0;
  cfg.grid_n = 128;
  cfg.dt = stability_bound(g) / 32.0;
  cfg.stride = 4;
  cfg.seed = 2;
  SweepOutcome out;
  out.amp = r.amplitude;
  out.reports = run_almost_conservation(cfg, {4.0, 8.0, 16.0, 32.0});
  return out;
}

void criterion5_increment_identity(const SweepOutcome& sweep) {
  auto t0 = std::chrono::steady_clock::now();
  double worst_identity = 0.0;
  for (const GwpReport& rep : sweep.reports)
    worst_identity =
        std::max(worst_identity, rep.increment_identity.mismatch_rel);

  // Shell breakdown row-sum check on a dedicated rough run.
  Grid3 g(64, kPi);
  Recipe r = rough_recipe(1.0, kPi);
  r.amplitude = calibrate_amplitude(g, r, 16.0, 0.45, 2);
  WaveState s = synth_state(g, r, 2);
  Trajectory tr = evolve(s, 1.0, stability_bound(g) / 16.0, 8);
  MultiplierProfile prof(0.75, 8.0);
  BreakdownTable table = increment_shell_breakdown(tr, {0.0, 1.0}, prof);
  double row_mismatch = std::abs(table.total - table.commutator) /
                        std::max(std::abs(table.commutator), 1e-12);

  bool pass = worst_identity <= 1e-3 && row_mismatch <= 1e-3;
  report(5, "increment identity and shell breakdown", pass,
         fmt("worst |commutator - dE(Iu)| mismatch %.3e over N in {4,8,16,32} "
             "(<= 1e-3); breakdown row-sum mismatch %.3e (<= 1e-3, %zu rows)",
             worst_identity, row_mismatch, table.rows.size()),
         elapsed(t0));
}

// --------------------------------------------------------------------------
void criterion6_symbol_bounds() {
  auto t0 = std::chrono::steady_clock::now();
  MultiplierProfile prof(0.75, 16.0);

  // enough draws that every populated case holds >= 1e5 samples
  auto counts_ok = [](const SymbolReport& rep) {
    for (const CaseStats& cs : rep.cases)
      if (cs.samples < 100000) return false;
    return !rep.cases.empty();
  };
  std::int64_t samples = 2000000;
  SymbolReport a = verify_symbol_bounds(prof, samples, 1);
  while (!counts_ok(a) && samples < 64000000) {
    samples *= 2;
    a = verify_symbol_bounds(prof, samples, 1);
  }
  SymbolReport b = verify_symbol_bounds(prof, samples, 2);

  bool stable = true;
  double worst_ratio_gap = 1.0;
  for (const CaseStats& ca : a.cases)
    for (const CaseStats& cb : b.cases) {
      if (ca.label != cb.label) continue;
      double lo = std::min(ca.max_ratio, cb.max_ratio);
      double hi = std::max(ca.max_ratio, cb.max_ratio);
      worst_ratio_gap = std::max(worst_ratio_gap, hi / lo);
      if (hi / lo > 1.2) stable = false;
    }

  // exact vanishing on the all-below-N/3 ball
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ur(0.0, 16.0 / 3.0);
  std::uniform_real_distribution<double> uz(-1.0, 1.0);
  std::uniform_real_distribution<double> uphi(0.0, kTau);
  auto ball = [&]() {
    double z = uz(rng), phi = uphi(rng), rad = ur(rng);
    double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Eigen::Vector3d(rad * rho * std::cos(phi), rad * rho * std::sin(phi),
                           rad * z);
  };
  double worst_mu = 0.0;
  for (int i = 0; i < 100000; ++i) {
    FrequencyTriple t{ball(), ball(), ball()};
    worst_mu = std::max(worst_mu, std::abs(mu(t, prof)));
  }

  double max_case_ratio = 0.0;
  std::int64_t min_case = a.cases.empty() ? 0 : a.cases.front().samples;
  for (const CaseStats& cs : a.cases) {
    max_case_ratio = std::max(max_case_ratio, cs.max_ratio);
    min_case = std::min(min_case, cs.samples);
  }

  bool pass =
      a.pass && b.pass && stable && worst_mu == 0.0 && min_case >= 100000;
  report(6, "symbol bounds", pass,
         fmt("max |mu|/B %.3f finite, K stable across seeds within %.2fx "
             "(<= 1.2), min per-case samples %lld (>= 1e5 at %lld draws), "
             "mu == %g exactly on 1e5 sub-N/3 triples",
             max_case_ratio, worst_ratio_gap, static_cast<long long>(min_case),
             static_cast<long long>(samples), worst_mu),
         elapsed(t0));
}

// --------------------------------------------------------------------------
void criterion7_almost_conservation(const SweepOutcome& sweep,
                                    double sweep_seconds) {
  std::vector<double> Ns, incs;
  bool monotone = true;
  for (const GwpReport& rep : sweep.reports) {
    double mx = 0.0;
    for (const IntervalLedger& l : rep.intervals)
      mx = std::max(mx, l.increment);
    if (!incs.empty() && mx > incs.back() * (1.0 + 1e-9)) monotone = false;
    Ns.push_back(rep.choice.N);
    incs.push_back(mx);
  }
  // least-squares slope of log2(increment) against log2(N)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(Ns.size());
  for (int i = 0; i < n; ++i) {
    double x = std::log2(Ns[i]), y = std::log2(std::max(incs[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  bool gate_ok = true;
  for (const GwpReport& rep : sweep.reports)
    if (rep.gate_violation_t || rep.initial_EIu > 0.5) gate_ok = false;

  bool pass = monotone && slope <= -0.5 && gate_ok;
  report(7, "almost-conservation scaling", pass,
         fmt("per-interval max increments {%.2e, %.2e, %.2e, %.2e} for N in "
             "{4,8,16,32}, nonincreasing=%d, log-log slope %.2f (<= -0.5), "
             "E(Iu(0)) <= 1/2 and gate held=%d (amp %.4g, n=128)",
             incs[0], incs[1], incs[2], incs[3], monotone ? 1 : 0, slope,
             gate_ok ? 1 : 0, sweep.amp),
         sweep_seconds);
}

// --------------------------------------------------------------------------
void criterion8_pipeline_arithmetic() {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = true;

  // lambda closed form, exact
  pass = pass && lambda_of(1.0, 16.0, 0.75) == 16.0;
  pass = pass && lambda_of(2.5, 8.0, 0.75) == 20.0;

  // eps = sqrt(N) equalizes the increment branches exactly
  for (double N : {4.0, 16.0, 64.0}) {
    double eps = std::sqrt(N);
    pass = pass && std::pow(eps, 0.5) / N == std::pow(eps, 2.5) / (N * N);
    pass = pass && predicted_increment(eps, N) == std::pow(eps, 0.5) / N;
  }

  // growth exponents by exact arithmetic
  pass = pass && growth_exponent(0.75) == 6.0;
  pass = pass && growth_exponent(1.0) == 2.0;

  // choose_N worked example against an independent closed-form scan
  Recipe r = gaussian(1.0, 0.5, kTau);
  ParameterChoice pc = choose_N(r, 0.75, 1.0, 1.0, 16, 1, 1.0);
  double expected_N = 0.0;
  for (double N = 2.0; N <= 1024.0; N *= 2.0)
    if (std::max({1.0 / N, N * 1.0 / std::pow(N, 1.25),
                  1.0 / std::pow(N, 0.75)}) <= 0.5) {
      expected_N = N;
      break;
    }
  pass = pass && expected_N == 16.0 && pc.N == 16.0 && pc.epsilon == 4.0;

  report(8, "parameter pipeline arithmetic", pass,
         fmt("lambda(N) exact, branches equal at eps=sqrt(N), "
             "growth_exponent(3/4)=6 and (1)=2 exact, choose_N example -> "
             "N=%.0f (expected 16)",
             pc.N),
         elapsed(t0));
}

// --------------------------------------------------------------------------
void criterion9_gwp_end_to_end() {
  auto t0 = std::chrono::steady_clock::now();
  GwpConfig cfg;
  cfg.recipe = gaussian(0.35, 0.6, kTau);
  cfg.s = 0.75;
  cfg.T = 4.0;
  cfg.grid_n = 64;
  cfg.stride = 2;
  cfg.seed = 9;
  GwpReport a = run_gwp_experiment(cfg);
  GwpReport b = run_gwp_experiment(cfg);

  bool deterministic = a.measured_final_sq == b.measured_final_sq &&
                       a.sup_EIu == b.sup_EIu && a.choice.N == b.choice.N &&
                       a.choice.lambda == b.choice.lambda &&
                       a.increments_csv() == b.increments_csv();
  bool consistent = a.verdict &&
                    a.verdict->kind == GwpVerdict::Kind::consistent &&
                    a.measured_final_sq <= a.envelope;

  // The increment identity on this run: the scaled problem is nearly linear
  // below N, so |dE| can sit at splitting-flutter scale where the relative
  // measure degenerates; agreement to 1e-6 of the energy scale counts.
  double idn_abs = std::abs(a.increment_identity.commutator -
                            a.increment_identity.delta_E);
  bool identity_ok = a.increment_identity.mismatch_rel <= 1e-3 ||
                     idn_abs <= 1e-6 * std::max(a.sup_EIu, 1e-12);

  report(9, "end-to-end gwp experiment", deterministic && consistent &&
                                             identity_ok,
         fmt("verdict %s, measured^2 %.4g <= envelope %.4g (N=%.0f, "
             "lambda=%.3g, span=%.3g), bit-deterministic repeat=%d, "
             "increment identity residual %.2e (<= 1e-6 of sup E(Iu) %.3g)",
             a.verdict ? (a.verdict->kind == GwpVerdict::Kind::consistent
                              ? "consistent"
                              : "other")
                       : "none",
             a.measured_final_sq, a.envelope, a.choice.N, a.choice.lambda,
             a.scaled_span, deterministic ? 1 : 0, idn_abs, a.sup_EIu),
         elapsed(t0));
}

}  // namespace

int main() {
  std::printf("acceptance suite: defocusing cubic wave / smoothing-multiplier "
              "diagnostics\n");
  criterion1_linear_propagator();
  criterion2_energy_conservation();
  criterion3_lp_partition();
  criterion4_duhamel_identity();

  std::printf("... running the n=128 almost-conservation sweep (feeds "
              "criteria 5 and 7)\n");
  std::fflush(stdout);
  auto ts = std::chrono::steady_clock::now();
  SweepOutcome sweep = run_sweep_n128();
  double sweep_seconds = elapsed(ts);

  criterion5_increment_identity(sweep);
  criterion6_symbol_bounds();
  criterion7_almost_conservation(sweep, sweep_seconds);
  criterion8_pipeline_arithmetic();
  criterion9_gwp_end_to_end();

  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures > 0 ? 1 : 0;
}
