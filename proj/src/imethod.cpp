#include "cwi/imethod.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace cwi {

double lambda_of(double C0, double N, double s) {
  return C0 * std::pow(N, 2.0 * (1.0 - s) / (2.0 * s - 1.0));
}

double growth_exponent(double s) {
  if (!(s > 13.0 / 18.0))
    throw std::invalid_argument(
        "growth_exponent: requires s > 13/18 (the exponent's denominator "
        "18s-13 vanishes at s = 13/18 and the bound degenerates)");
  return (28.0 * s - 18.0) / (18.0 * s - 13.0);
}

double predicted_increment(double eps, double N) {
  if (!(eps > 0.0) || !(N >= 1.0))
    throw std::invalid_argument("predicted_increment: need eps > 0, N >= 1");
  double e = std::max(1.0, eps);
  return std::max(std::pow(e, 0.5) / N, std::pow(e, 2.5) / (N * N));
}

std::vector<SubInterval> partition(double T_span, double eps,
                                   double snap_dt) {
  if (!(T_span > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("partition: need positive span and epsilon");
  if (eps < snap_dt * (1.0 - 1e-9))
    throw std::invalid_argument(
        "partition: epsilon is below one snapshot spacing");
  double snapped = snap_dt > 0.0
                       ? std::max(1.0, std::round(eps / snap_dt)) * snap_dt
                       : eps;
  std::vector<SubInterval> out;
  double a = 0.0;
  while (a < T_span - 1e-9 * std::max(1.0, T_span)) {
    double b = std::min(a + snapped, T_span);
    out.emplace_back(a, b);
    a = b;
  }
  return out;
}

CalibrationResult calibrate_C0(const Recipe& recipe, double s, double N,
                               int grid_n, std::uint64_t seed) {
  MultiplierProfile prof(s, N);
  auto eval = [&](double lambda) {
    Recipe scaled = scale_profile(recipe, lambda);
    Grid3 grid(grid_n, scaled.box_length);
    auto [u0, u1] = synthesize_initial_data(grid, scaled, seed);
    WaveState st{0.0, std::move(u0), std::move(u1)};
    return mollified_energy(st, prof);
  };
  double expo = 2.0 * (1.0 - s) / (2.0 * s - 1.0);

  double e1 = eval(1.0);
  if (e1 <= 0.5)
    return {1.0 / std::pow(N, expo), 1.0, e1};

  double lo = 1.0, hi = 2.0, ehi = eval(hi);
  while (ehi > 0.5) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1.8446744073709552e19)  // 2^64
      throw std::runtime_error(
          "calibrate_C0: no admissible lambda below 2^64; the datum is too "
          "rough for the grid");
    ehi = eval(hi);
  }
  while (hi / lo > 1.01) {
    double mid = std::sqrt(lo * hi);
    if (eval(mid) <= 0.5)
      hi = mid;
    else
      lo = mid;
  }
  return {hi / std::pow(N, expo), hi, eval(hi)};
}

ParameterChoice choose_N(const Recipe& recipe, double s, double T,
                         double safety_C, int grid_n, std::uint64_t seed,
                         std::optional<double> fixed_C0) {
  if (!(s > 13.0 / 18.0 && s < 1.0))
    throw std::invalid_argument(
        "choose_N: requires 13/18 < s < 1; for s <= 13/18 the term "
        "lambda T / N^{5/4} scales like N^{2(1-s)/(2s-1) - 5/4}, whose "
        "exponent is nonnegative, so no cutoff can satisfy the condition");
  for (double N = 2.0; N <= 1.8446744073709552e19; N *= 2.0) {
    double C0 = fixed_C0 ? *fixed_C0
                         : calibrate_C0(recipe, s, N, grid_n, seed).C0;
    double lambda = lambda_of(C0, N, s);
    double cond = safety_C * std::max({1.0 / N, lambda * T / std::pow(N, 1.25),
                                       1.0 / std::pow(N, 0.75)});
    if (cond <= 0.5) {
      ParameterChoice pc;
      pc.s = s;
      pc.N = N;
      pc.C0 = C0;
      pc.lambda = lambda;
      pc.epsilon = std::sqrt(N);
      if (pc.epsilon < 1.0) {
        pc.epsilon = 1.0;
        pc.epsilon_clamped = true;
      }
      return pc;
    }
  }
  throw std::runtime_error("choose_N: no dyadic N below 2^64 satisfies the "
                           "selection condition");
}

namespace {

// Streaming per-snapshot measurement shared by the experiment drivers: one
// evolution, any number of smoothing cutoffs measured against it.
class MeasurementStream {
 public:
  MeasurementStream(const Grid3& grid, double s,
                    const std::vector<double>& N_values, bool nonlinear,
                    double cubic_sign)
      : grid_(grid),
        nonlinear_(nonlinear),
        cubic_sign_(cubic_sign),
        mask_(dealias_mask(grid)),
        xi_(grid.xi_norm_table()) {
    ws_ = (1.0 + xi_).pow(2.0 * s);
    ws1_ = (1.0 + xi_).pow(2.0 * (s - 1.0));
    xi2_ = xi_.square();
    for (double N : N_values) {
      PerN p;
      p.N = N;
      p.m_table = MultiplierProfile(s, N).table(grid);
      per_n_.push_back(std::move(p));
    }
  }

  void observe(const WaveState& st) {
    const double L3 = grid_.volume();
    const double vc = grid_.cell_volume();

    times_.push_back(st.t);
    Eigen::ArrayXd u_phys = inverse_transform_unchecked(st.u);
    E_u_.push_back(0.5 * L3 *
                       (st.ut.coeff.abs2().sum() +
                        (st.u.coeff.abs2() * xi2_).sum()) +
                   0.25 * vc * u_phys.pow(4).sum());
    Hs_.push_back(std::sqrt(L3 * (ws_ * st.u.coeff.abs2()).sum()));
    Hs1_.push_back(std::sqrt(L3 * (ws1_ * st.ut.coeff.abs2()).sum()));

    Eigen::ArrayXcd S;
    if (nonlinear_) S = dealiased_cube(st.u, &mask_).coeff;

    for (PerN& p : per_n_) {
      SpectralField Iu(grid_, st.u.coeff * p.m_table);
      SpectralField Iut(grid_, st.ut.coeff * p.m_table);
      Eigen::ArrayXd iu = inverse_transform_unchecked(Iu);
      Eigen::ArrayXd iut = inverse_transform_unchecked(Iut);
      double e_iu = 0.5 * L3 *
                        (Iut.coeff.abs2().sum() +
                         (Iu.coeff.abs2() * xi2_).sum()) +
                    0.25 * vc * iu.pow(4).sum();
      double f = vc * (iut * iu.cube()).sum();
      if (nonlinear_)
        f += cubic_sign_ * L3 *
             (p.m_table.square() * (st.ut.coeff.conjugate() * S).real())
                 .sum();
      p.f_samples.push_back(f);
      p.E_Iu.push_back(e_iu);
    }
  }

  struct PerN {
    double N;
    Eigen::ArrayXd m_table;
    std::vector<double> E_Iu;
    std::vector<double> f_samples;  // increment-identity integrand
  };

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& E_u() const { return E_u_; }
  const std::vector<double>& Hs() const { return Hs_; }
  const std::vector<double>& Hs1() const { return Hs1_; }
  const std::vector<PerN>& per_n() const { return per_n_; }

 private:
  Grid3 grid_;
  bool nonlinear_;
  double cubic_sign_;
  Eigen::ArrayXd mask_, xi_, xi2_, ws_, ws1_;
  std::vector<double> times_, E_u_, Hs_, Hs1_;
  std::vector<PerN> per_n_;
};

GwpReport build_report(const MeasurementStream& ms,
                       const MeasurementStream::PerN& pn,
                       const ParameterChoice& choice, double snap_dt,
                       double span) {
  GwpReport rep;
  rep.choice = choice;
  rep.scaled_span = span;
  rep.growth_exp = choice.s > 13.0 / 18.0 ? growth_exponent(choice.s) : 0.0;

  rep.series.times = ms.times();
  rep.series.E_u = ms.E_u();
  rep.series.E_Iu = pn.E_Iu;
  rep.series.Hs_norm = ms.Hs();
  rep.series.Hs1_norm = ms.Hs1();

  const auto& times = ms.times();
  for (const SubInterval& J : partition(span, choice.epsilon, snap_dt)) {
    IntervalLedger led{J, 0.0, predicted_increment(J.length(), choice.N)};
    // sup_{t in J} |E(Iu(t)) - E(Iu(a))|: the deviation the quadrilinear
    // integral controls for every endpoint tau in J.
    double e_a = 0.0;
    bool have_a = false;
    double dev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < J.a - 1e-9 || times[i] > J.b + 1e-9) continue;
      if (!have_a && std::abs(times[i] - J.a) <= snap_dt / 2) {
        e_a = pn.E_Iu[i];
        have_a = true;
      }
      if (have_a) dev = std::max(dev, std::abs(pn.E_Iu[i] - e_a));
    }
    led.increment = dev;
    rep.accumulated_predicted += led.predicted;
    rep.intervals.push_back(led);
  }

  rep.sup_EIu = -1e300;
  for (std::size_t i = 0; i < pn.E_Iu.size(); ++i) {
    rep.sup_EIu = std::max(rep.sup_EIu, pn.E_Iu[i]);
    if (!rep.gate_violation_t && pn.E_Iu[i] > 1.0)
      rep.gate_violation_t = times[i];
  }
  rep.initial_EIu = pn.E_Iu.front();

  std::vector<double> wq = composite_quadrature_weights(
      static_cast<int>(pn.f_samples.size()) - 1, snap_dt);
  double commutator = 0.0;
  for (std::size_t i = 0; i < pn.f_samples.size(); ++i)
    commutator += wq[i] * pn.f_samples[i];
  rep.increment_identity.commutator = commutator;
  rep.increment_identity.delta_E = pn.E_Iu.back() - pn.E_Iu.front();
  rep.increment_identity.mismatch_rel =
      std::abs(commutator - rep.increment_identity.delta_E) /
      std::max(std::abs(rep.increment_identity.delta_E), 1e-12);
  return rep;
}

}  // namespace

std::vector<GwpReport> run_almost_conservation(
    const AlmostConservationConfig& cfg, const std::vector<double>& N_values) {
  if (N_values.empty())
    throw std::invalid_argument("run_almost_conservation: empty N list");
  Grid3 grid(cfg.grid_n, cfg.recipe.box_length);
  auto [u0, u1] = synthesize_initial_data(grid, cfg.recipe, cfg.seed);
  WaveState state{0.0, std::move(u0), std::move(u1)};

  for (double N : N_values) {
    double e0 = mollified_energy(state, MultiplierProfile(cfg.s, N));
    if (e0 > 0.5 + 1e-12) {
      std::ostringstream os;
      os << "run_almost_conservation: E(Iu(0)) = " << e0 << " exceeds 1/2 at N = "
         << N << "; rescale the datum first";
      throw std::invalid_argument(os.str());
    }
  }

  double dt = cfg.dt > 0.0 ? cfg.dt : stability_bound(grid) / 16.0;
  MeasurementStream ms(grid, cfg.s, N_values, true, -1.0);
  EvolveOptions opts;
  opts.store = false;
  opts.observer = [&ms](const WaveState& st, int) { ms.observe(st); };
  Trajectory traj = evolve(state, cfg.T_span, dt, cfg.stride, opts);

  double span = ms.times().back() - ms.times().front();
  std::vector<GwpReport> reports;
  for (const auto& pn : ms.per_n()) {
    ParameterChoice choice;
    choice.s = cfg.s;
    choice.N = pn.N;
    choice.C0 = 0.0;
    choice.lambda = 1.0;
    if (cfg.epsilon > 0.0) {
      choice.epsilon = cfg.epsilon;
    } else {
      choice.epsilon = std::sqrt(pn.N);  // the optimal-rate rule
      if (choice.epsilon < 1.0) {
        choice.epsilon = 1.0;
        choice.epsilon_clamped = true;
      }
    }
    GwpReport rep = build_report(ms, pn, choice, traj.snap_dt(), span);
    rep.T = cfg.T_span;
    rep.grid_n = cfg.grid_n;
    rep.grid_L = grid.box_length();
    rep.dt = dt;
    rep.stride = cfg.stride;
    rep.seed = cfg.seed;
    rep.aborted = traj.aborted;
    reports.push_back(std::move(rep));
  }
  return reports;
}

GwpReport run_gwp_experiment(const GwpConfig& cfg) {
  // Unscaled datum norms feed the final envelope.
  Grid3 grid0(cfg.grid_n, cfg.recipe.box_length);
  double datum_hs_sq;
  {
    auto [u0, u1] = synthesize_initial_data(grid0, cfg.recipe, cfg.seed);
    double hs = sobolev_norm_field(u0, cfg.s, false);
    datum_hs_sq = hs * hs;
  }

  ParameterChoice choice;
  if (cfg.fixed_N) {
    choice.s = cfg.s;
    choice.N = *cfg.fixed_N;
    choice.C0 = cfg.fixed_C0
                    ? *cfg.fixed_C0
                    : calibrate_C0(cfg.recipe, cfg.s, choice.N, cfg.grid_n,
                                   cfg.seed)
                          .C0;
    choice.lambda = lambda_of(choice.C0, choice.N, cfg.s);
    choice.epsilon = std::sqrt(choice.N);
    if (choice.epsilon < 1.0) {
      choice.epsilon = 1.0;
      choice.epsilon_clamped = true;
    }
  } else {
    choice = choose_N(cfg.recipe, cfg.s, cfg.T, cfg.safety_C, cfg.grid_n,
                      cfg.seed, cfg.fixed_C0);
  }
  if (cfg.fixed_epsilon) {
    choice.epsilon = *cfg.fixed_epsilon;
    choice.epsilon_clamped = false;
  }

  Recipe scaled = scale_profile(cfg.recipe, choice.lambda);
  Grid3 grid(cfg.grid_n, scaled.box_length);
  auto [u0, u1] = synthesize_initial_data(grid, scaled, cfg.seed);
  WaveState state{0.0, std::move(u0), std::move(u1)};

  MultiplierProfile prof(cfg.s, choice.N);
  double e0 = mollified_energy(state, prof);
  if (e0 > 0.5 + 1e-9)
    throw std::runtime_error(
        "run_gwp_experiment: E(I u_lambda(0)) exceeds 1/2 after scaling; "
        "calibration or the supplied C0 is inconsistent with the datum");

  double dt = cfg.dt > 0.0 ? cfg.dt : stability_bound(grid) / 8.0;
  MeasurementStream ms(grid, cfg.s, {choice.N}, true, -1.0);
  WaveState final_state{0.0, SpectralField(grid), SpectralField(grid)};
  EvolveOptions opts;
  opts.store = false;
  opts.observer = [&](const WaveState& st, int) {
    ms.observe(st);
    final_state = st;
  };
  double scaled_span = choice.lambda * cfg.T;
  Trajectory traj = evolve(state, scaled_span, dt, cfg.stride, opts);

  GwpReport rep = build_report(ms, ms.per_n().front(), choice, traj.snap_dt(),
                               ms.times().back() - ms.times().front());
  rep.T = cfg.T;
  rep.grid_n = cfg.grid_n;
  rep.grid_L = grid.box_length();
  rep.dt = dt;
  rep.stride = cfg.stride;
  rep.seed = cfg.seed;
  rep.aborted = traj.aborted;
  rep.datum_hs_sq = datum_hs_sq;

  // Undo the scaling on the final state: on the integer lattice the map is
  // coefficientwise (u, ut) -> (lambda u, lambda^2 ut) with the box back at
  // its unscaled length.
  SpectralField fu(grid0, final_state.u.coeff * choice.lambda);
  SpectralField fut(grid0,
                    final_state.ut.coeff * (choice.lambda * choice.lambda));
  SobolevNorm sn = sobolev_norm(WaveState{cfg.T, fu, fut}, cfg.s);
  rep.measured_final_sq = sn.combined * sn.combined;
  rep.envelope = cfg.envelope_C *
                 (datum_hs_sq + (cfg.T * cfg.T + 1.0) * choice.lambda);
  rep.growth_envelope =
      cfg.envelope_C * std::pow(std::max(cfg.T, 1.0), rep.growth_exp);

  GwpVerdict verdict;
  if (rep.aborted) {
    verdict.kind = GwpVerdict::Kind::inconclusive;
    verdict.detail = "run aborted on a non-finite field";
  } else if (rep.gate_violation_t) {
    verdict.kind = GwpVerdict::Kind::inconclusive;
    verdict.detail = "mollified-energy gate sup E(Iu) <= 1 failed at t = " +
                     std::to_string(*rep.gate_violation_t);
  } else if (rep.measured_final_sq <= rep.envelope) {
    verdict.kind = GwpVerdict::Kind::consistent;
    verdict.detail = "measured final Sobolev norm lies below the envelope";
  } else {
    verdict.kind = GwpVerdict::Kind::bound_violated;
    verdict.detail = "measured final Sobolev norm exceeds the envelope";
  }
  rep.verdict = verdict;
  return rep;
}

std::string GwpReport::increments_csv() const {
  std::ostringstream os;
  os << "interval,a,b,increment,predicted\n";
  char buf[256];
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const IntervalLedger& l = intervals[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i,
                  l.interval.a, l.interval.b, l.increment, l.predicted);
    os << buf;
  }
  return os.str();
}

}  // namespace cwi
