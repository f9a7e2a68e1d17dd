#include "cwi/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cwi {

double mu(const FrequencyTriple& t, const MultiplierProfile& prof) {
  double num = prof.m((t.xi2 + t.xi3 + t.xi4).norm());
  double den =
      prof.m(t.xi2.norm()) * prof.m(t.xi3.norm()) * prof.m(t.xi4.norm());
  return 1.0 - num / den;
}

std::string case_name(CaseLabel c) {
  switch (c) {
    case CaseLabel::vanishing: return "vanishing";
    case CaseLabel::case1a: return "case1a";
    case CaseLabel::case1b: return "case1b";
    case CaseLabel::case2: return "case2";
    case CaseLabel::case3: return "case3";
  }
  return "?";
}

CaseLabel classify_case(const ShellQuadruple& sh, const MultiplierProfile& prof,
                        const CaseConfig& cfg) {
  if (!(sh.N2 >= sh.N3 && sh.N3 >= sh.N4))
    throw std::invalid_argument(
        "classify_case: shells must satisfy N2 >= N3 >= N4");
  std::array<double, 4> v{sh.N1, sh.N2, sh.N3, sh.N4};
  std::sort(v.begin(), v.end(), std::greater<>());
  double top = v[0], second = v[1];
  if (top < cfg.low_factor * prof.cutoff) return CaseLabel::vanishing;
  if (second <= 0.0 || top / second > cfg.comparability)
    return CaseLabel::vanishing;
  if (sh.N2 >= sh.N1) {
    if (sh.N1 >= sh.N3)
      return sh.N3 >= cfg.low_factor * prof.cutoff ? CaseLabel::case1a
                                                   : CaseLabel::case1b;
    return CaseLabel::case3;
  }
  return CaseLabel::case2;
}

double case_bound(const ShellQuadruple& sh, CaseLabel label,
                  const MultiplierProfile& prof, const CaseConfig& cfg) {
  switch (label) {
    case CaseLabel::vanishing:
      throw std::invalid_argument(
          "case_bound: the vanishing case has bound 0 by definition; "
          "evaluate mu directly");
    case CaseLabel::case1a:
      return 1.0 / (prof.m(sh.N3) * prof.m(sh.N4));
    case CaseLabel::case1b:
      return sh.N3 / sh.N2;
    case CaseLabel::case2:
      // comparable top pair; same mean-value / ratio bounds as case 1
      return sh.N3 >= cfg.low_factor * prof.cutoff
                 ? 1.0 / (prof.m(sh.N3) * prof.m(sh.N4))
                 : sh.N3 / sh.N2;
    case CaseLabel::case3:
      return prof.m(sh.N1) / (prof.m(sh.N2) * prof.m(sh.N3) * prof.m(sh.N4));
  }
  throw std::logic_error("case_bound: unreachable");
}

namespace {

double dyadic_floor(double r) {
  if (r <= 0.0) return 0.0;
  return std::exp2(std::floor(std::log2(r)));
}

Eigen::Vector3d random_in_annulus(double Mlo, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ur(Mlo, 2.0 * Mlo);
  std::uniform_real_distribution<double> uz(-1.0, 1.0);
  std::uniform_real_distribution<double> uphi(0.0, 2.0 * std::numbers::pi);
  double radius = ur(rng);
  double z = uz(rng);
  double phi = uphi(rng);
  double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return radius * Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z);
}

}  // namespace

SymbolReport verify_symbol_bounds(const MultiplierProfile& prof,
                                  std::int64_t samples, std::uint64_t seed,
                                  const SymbolVerifyConfig& cfg) {
  if (samples < 1000)
    throw std::invalid_argument("verify_symbol_bounds: samples must be >= 1000");
  std::mt19937_64 rng(seed);
  int base = static_cast<int>(std::lround(std::log2(prof.cutoff)));
  std::uniform_int_distribution<int> j2d(base - cfg.shell_span_below,
                                         base + cfg.shell_span_above);
  std::uniform_int_distribution<int> down3(0, 10), down4(0, 6);

  std::map<CaseLabel, CaseStats> stats;
  SymbolReport rep;
  for (std::int64_t it = 0; it < samples; ++it) {
    int j2 = j2d(rng);
    int j3 = j2 - down3(rng);
    int j4 = j3 - down4(rng);
    FrequencyTriple t;
    t.xi2 = random_in_annulus(std::exp2(j2), rng);
    t.xi3 = random_in_annulus(std::exp2(j3), rng);
    t.xi4 = random_in_annulus(std::exp2(j4), rng);
    ShellQuadruple sh{dyadic_floor(t.xi1().norm()), std::exp2(j2),
                      std::exp2(j3), std::exp2(j4)};
    CaseLabel label = classify_case(sh, prof, cfg.cases);
    double mv = mu(t, prof);
    if (label == CaseLabel::vanishing) {
      ++rep.vanishing_samples;
      rep.vanishing_max_mu = std::max(rep.vanishing_max_mu, std::abs(mv));
      continue;
    }
    double ratio = std::abs(mv) / case_bound(sh, label, prof, cfg.cases);
    CaseStats& cs = stats[label];
    cs.label = label;
    ++cs.samples;
    if (ratio > cs.max_ratio) {
      cs.max_ratio = ratio;
      cs.argmax = t;
      cs.argmax_shells = sh;
    }
  }
  for (auto& [label, cs] : stats) {
    rep.cases.push_back(cs);
    if (cs.max_ratio > cfg.ratio_ceiling) rep.pass = false;
  }
  return rep;
}

std::string SymbolReport::csv() const {
  std::ostringstream os;
  os << "case,N1,N2,N3,N4,max_ratio,argmax_xi2,argmax_xi3,argmax_xi4,"
        "samples\n";
  char buf[512];
  for (const CaseStats& cs : cases) {
    auto fmt3 = [](const Eigen::Vector3d& v) {
      char b[128];
      std::snprintf(b, sizeof b, "%.6g %.6g %.6g", v[0], v[1], v[2]);
      return std::string(b);
    };
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,",
                  case_name(cs.label).c_str(), cs.argmax_shells.N1,
                  cs.argmax_shells.N2, cs.argmax_shells.N3,
                  cs.argmax_shells.N4, cs.max_ratio);
    os << buf << fmt3(cs.argmax.xi2) << ',' << fmt3(cs.argmax.xi3) << ','
       << fmt3(cs.argmax.xi4) << ',' << cs.samples << '\n';
  }
  std::snprintf(buf, sizeof buf, "vanishing,,,,,%.17g,,,,%lld\n",
                vanishing_max_mu,
                static_cast<long long>(vanishing_samples));
  os << buf;
  return os.str();
}

namespace {

// Integrand of the increment identity at one snapshot:
//   f = Vc sum (I ut) (I u)^3  +  sign * <I ut, I S>
// with S the integrator's dealiased cubic source (absent on linear runs).
double commutator_integrand(const WaveState& s, const Eigen::ArrayXd& m_table,
                            const Eigen::ArrayXd& mask, bool nonlinear,
                            double cubic_sign) {
  const Grid3& g = s.u.grid;
  SpectralField Iu(g, s.u.coeff * m_table);
  SpectralField Iut(g, s.ut.coeff * m_table);
  Eigen::ArrayXd iu = inverse_transform_unchecked(Iu);
  Eigen::ArrayXd iut = inverse_transform_unchecked(Iut);
  double piece1 = g.cell_volume() * (iut * iu * iu * iu).sum();
  if (!nonlinear) return piece1;
  SpectralField S = dealiased_cube(s.u, &mask);
  double piece2 =
      g.volume() *
      (m_table.square() * (s.ut.coeff.conjugate() * S.coeff).real()).sum();
  return piece1 + cubic_sign * piece2;
}

}  // namespace

CommutatorResult energy_increment_commutator(const Trajectory& traj,
                                             const SubInterval& J,
                                             const MultiplierProfile& prof) {
  SubInterval js = snap_interval(traj, J);
  int ia = traj.index_of_time(js.a), ib = traj.index_of_time(js.b);
  CommutatorResult res;

  if (!traj.nonlinear) {
    // No cubic force: the quartic term drops from the evolved equation, so
    // it drops from both routes. The quadratic part of E(Iu) is conserved
    // exactly by the free flow and the commutator is identically zero.
    res.commutator = 0.0;
    res.delta_E = quadratic_mollified_energy(traj.states[ib], prof) -
                  quadratic_mollified_energy(traj.states[ia], prof);
    res.mismatch_rel = std::abs(res.commutator - res.delta_E) /
                       std::max(std::abs(res.delta_E), 1e-12);
    return res;
  }

  Eigen::ArrayXd m_table = prof.table(traj.grid);
  Eigen::ArrayXd mask = dealias_mask(traj.grid);

  std::vector<double> w =
      composite_quadrature_weights(ib - ia, traj.snap_dt());
  double acc = 0.0;
  for (int i = ia; i <= ib; ++i)
    acc += w[i - ia] * commutator_integrand(traj.states[i], m_table, mask,
                                            traj.nonlinear, traj.cubic_sign);
  double e_a = mollified_energy(traj.states[ia], prof);
  double e_b = mollified_energy(traj.states[ib], prof);
  res.commutator = acc;
  res.delta_E = e_b - e_a;
  res.mismatch_rel = std::abs(res.commutator - res.delta_E) /
                     std::max(std::abs(res.delta_E), 1e-12);
  return res;
}

BreakdownTable increment_shell_breakdown(const Trajectory& traj,
                                         const SubInterval& J,
                                         const MultiplierProfile& prof,
                                         std::int64_t max_rows,
                                         const CaseConfig& cfg) {
  SubInterval js = snap_interval(traj, J);
  int ia = traj.index_of_time(js.a), ib = traj.index_of_time(js.b);
  const Grid3& g = traj.grid;

  std::vector<ShellEntry> shells = lattice_shells(g);
  const int S = static_cast<int>(shells.size());

  // canonical multisets {N2 >= N3 >= N4} of shell indices
  struct Multiset {
    int i2, i3, i4;
    double mult;
  };
  std::vector<Multiset> msets;
  for (int i2 = 0; i2 < S; ++i2)
    for (int i3 = 0; i3 <= i2; ++i3)
      for (int i4 = 0; i4 <= i3; ++i4) {
        double mult;
        if (i2 == i3 && i3 == i4)
          mult = 1.0;
        else if (i2 == i3 || i3 == i4)
          mult = 3.0;
        else
          mult = 6.0;
        msets.push_back({i2, i3, i4, mult});
      }
  std::int64_t nrows = static_cast<std::int64_t>(msets.size()) * S;
  if (nrows > max_rows) {
    std::ostringstream os;
    os << "increment_shell_breakdown: " << nrows
       << " shell quadruples exceed the limit " << max_rows
       << "; use a larger dyadic base";
    throw std::invalid_argument(os.str());
  }

  Eigen::ArrayXd m_table = prof.table(g);
  Eigen::ArrayXd mask = dealias_mask(g);
  std::vector<Eigen::ArrayXd> shell_tables(S);
  for (int i = 0; i < S; ++i) {
    double M = shells[i].shell.M;
    LpMode mode = shells[i].mode;
    Eigen::ArrayXd xi = g.xi_norm_table();
    Eigen::ArrayXd t(xi.size());
    for (std::int64_t f = 0; f < xi.size(); ++f)
      t[f] = mode == LpMode::below ? lp_phi(xi[f] / M) : lp_psi(xi[f] / M);
    shell_tables[i] = std::move(t);
  }

  const double vc = g.cell_volume();
  std::vector<double> wq = composite_quadrature_weights(ib - ia,
                                                        traj.snap_dt());
  std::vector<double> acc(nrows, 0.0);

  std::vector<Eigen::ArrayXd> a1(S), a2(S), b(S), c(S);
  for (int i = ia; i <= ib; ++i) {
    const WaveState& st = traj.states[i];
    Eigen::ArrayXcd Iu = st.u.coeff * m_table;
    Eigen::ArrayXcd Iut = st.ut.coeff * m_table;
    Eigen::ArrayXcd uda = st.u.coeff * mask;
    Eigen::ArrayXcd i2utda = st.ut.coeff * m_table.square() * mask;
    for (int sidx = 0; sidx < S; ++sidx) {
      const Eigen::ArrayXd& pt = shell_tables[sidx];
      b[sidx] = inverse_transform_unchecked({g, Iu * pt});
      a1[sidx] = inverse_transform_unchecked({g, Iut * pt});
      if (traj.nonlinear) {
        c[sidx] = inverse_transform_unchecked({g, uda * pt});
        a2[sidx] = inverse_transform_unchecked({g, i2utda * pt});
      }
    }
    std::int64_t row = 0;
    for (const Multiset& ms : msets) {
      Eigen::ArrayXd prodB = b[ms.i2] * b[ms.i3] * b[ms.i4];
      Eigen::ArrayXd prodC;
      if (traj.nonlinear) prodC = c[ms.i2] * c[ms.i3] * c[ms.i4];
      for (int i1 = 0; i1 < S; ++i1, ++row) {
        double f = vc * ms.mult * (a1[i1] * prodB).sum();
        if (traj.nonlinear)
          f += traj.cubic_sign * vc * ms.mult * (a2[i1] * prodC).sum();
        acc[row] += wq[i - ia] * f;
      }
    }
  }

  BreakdownTable table;
  std::int64_t row = 0;
  for (const Multiset& ms : msets) {
    for (int i1 = 0; i1 < S; ++i1, ++row) {
      BreakdownRow r;
      r.shells = {shells[i1].shell.M, shells[ms.i2].shell.M,
                  shells[ms.i3].shell.M, shells[ms.i4].shell.M};
      r.label = classify_case(r.shells, prof, cfg);
      r.contribution = acc[row];
      table.rows.push_back(r);
    }
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const BreakdownRow& x, const BreakdownRow& y) {
              return std::abs(x.contribution) > std::abs(y.contribution);
            });
  table.total = 0.0;
  for (const BreakdownRow& r : table.rows) table.total += r.contribution;
  table.commutator = energy_increment_commutator(traj, js, prof).commutator;
  return table;
}

std::string BreakdownTable::csv() const {
  std::ostringstream os;
  os << "N1,N2,N3,N4,case,contribution,cumulative_fraction\n";
  double denom = std::abs(total) > 1e-300 ? total : 1.0;
  double cum = 0.0;
  char buf[256];
  for (const BreakdownRow& r : rows) {
    cum += r.contribution;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%s,%.17g,%.17g\n",
                  r.shells.N1, r.shells.N2, r.shells.N3, r.shells.N4,
                  case_name(r.label).c_str(), r.contribution, cum / denom);
    os << buf;
  }
  return os.str();
}

}  // namespace cwi
