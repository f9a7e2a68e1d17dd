#include "cwi/functionals.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cwi {

namespace {

double quartic_term(const SpectralField& f) {
  Eigen::ArrayXd phys = inverse_transform_unchecked(f);
  return 0.25 * f.grid.cell_volume() * (phys * phys * phys * phys).sum();
}

double quadratic_term(const SpectralField& u, const SpectralField& ut) {
  const Grid3& g = u.grid;
  Eigen::ArrayXd xi = g.xi_norm_table();
  double kinetic = ut.coeff.abs2().sum();
  double elastic = (u.coeff.abs2() * xi.square()).sum();
  return 0.5 * g.volume() * (kinetic + elastic);
}

}  // namespace

double quadratic_energy(const WaveState& s) {
  return quadratic_term(s.u, s.ut);
}

double energy(const WaveState& s) {
  return quadratic_energy(s) + quartic_term(s.u);
}

double mollified_energy(const WaveState& s, const MultiplierProfile& prof) {
  Eigen::ArrayXd table = prof.table(s.u.grid);
  WaveState smoothed{s.t, apply_symbol_table(s.u, table),
                     apply_symbol_table(s.ut, table)};
  return energy(smoothed);
}

double quadratic_mollified_energy(const WaveState& s,
                                  const MultiplierProfile& prof) {
  Eigen::ArrayXd table = prof.table(s.u.grid);
  WaveState smoothed{s.t, apply_symbol_table(s.u, table),
                     apply_symbol_table(s.ut, table)};
  return quadratic_energy(smoothed);
}

Eigen::Vector3d momentum(const WaveState& s) {
  const Grid3& g = s.u.grid;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  for (std::int64_t f = 0; f < g.size(); ++f) {
    Eigen::Vector3d xi = g.xi(f);
    // ∫ ut d_i u dx = L^3 sum Re( conj(ut_k) (i xi_i) u_k )
    std::complex<double> cross = std::conj(s.ut.coeff[f]) * s.u.coeff[f];
    p += xi * (-cross.imag());
  }
  return g.volume() * p;
}

double sobolev_norm_field(const SpectralField& f, double s, bool homogeneous) {
  const Grid3& g = f.grid;
  if (homogeneous && s < 0.0) {
    double mean_mag = std::abs(f.coeff[0]);
    double scale = std::max(f.coeff.abs().maxCoeff(), 1e-300);
    if (mean_mag > 1e-13 * scale)
      throw std::invalid_argument(
          "sobolev_norm: homogeneous norm of negative order requires a "
          "mean-zero field");
  }
  Eigen::ArrayXd xi = g.xi_norm_table();
  double acc = 0.0;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double w;
    if (homogeneous) {
      if (xi[i] == 0.0) {
        if (s != 0.0) continue;  // weight 0 for s > 0; mean-zero for s < 0
        w = 1.0;                 // Hdot^0 is plain L^2, zero mode included
      } else {
        w = std::pow(xi[i], 2.0 * s);
      }
    } else {
      w = std::pow(1.0 + xi[i], 2.0 * s);
    }
    acc += w * std::norm(f.coeff[i]);
  }
  return std::sqrt(g.volume() * acc);
}

SobolevNorm sobolev_norm(const WaveState& s, double order, bool homogeneous) {
  SobolevNorm out;
  out.u_part = sobolev_norm_field(s.u, order, homogeneous);
  out.ut_part = sobolev_norm_field(s.ut, order - 1.0, homogeneous);
  out.combined = out.u_part + out.ut_part;
  return out;
}

std::variant<double, std::string> admissible_check(double q, double r) {
  if (!(q > 2.0))
    return std::string("q must exceed 2 (q in (2, inf])");
  if (!(r >= 2.0) || std::isinf(r))
    return std::string("r must lie in [2, inf)");
  double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  if (inv_q + 1.0 / r > 0.5 + 1e-12)
    return std::string("wave admissibility 1/q + 1/r <= 1/2 violated");
  double m = 1.5 - inv_q - 3.0 / r;
  if (m < -1e-12 || m > 1.0 + 1e-12)
    return std::string("derivative index m = 3/2 - 1/q - 3/r outside [0, 1]");
  return std::min(std::max(m, 0.0), 1.0);
}

AdmissiblePair::AdmissiblePair(double q_, double r_) : q(q_), r(r_) {
  auto res = admissible_check(q_, r_);
  if (std::holds_alternative<std::string>(res))
    throw std::invalid_argument("AdmissiblePair(" + std::to_string(q_) + ", " +
                                std::to_string(r_) + "): " +
                                std::get<std::string>(res));
  m = std::get<double>(res);
}

std::string AdmissiblePair::label() const {
  std::ostringstream os;
  os << "(q=";
  if (std::isinf(q))
    os << "inf";
  else
    os << q;
  os << ", r=" << r << ", m=" << m << ")";
  return os.str();
}

std::vector<AdmissiblePair> default_pair_set() {
  return {AdmissiblePair(std::numeric_limits<double>::infinity(), 2.0),
          AdmissiblePair(8.0, 8.0 / 3.0), AdmissiblePair(6.0, 6.0),
          AdmissiblePair(4.0, 4.0), AdmissiblePair(12.0 / 5.0, 12.0)};
}

namespace {

double spatial_lr_norm(const SpectralField& f, double r) {
  Eigen::ArrayXd phys = inverse_transform_unchecked(f);
  double vc = f.grid.cell_volume();
  return std::pow((phys.abs().pow(r)).sum() * vc, 1.0 / r);
}

SpectralField weighted_component(const WaveState& s, const NormWeight& w,
                                 const Eigen::ArrayXd& xi,
                                 const Eigen::ArrayXd* m_table) {
  const SpectralField& base = w.on_time_derivative ? s.ut : s.u;
  SpectralField out = base;
  if (w.sigma != 0.0) {
    for (std::int64_t i = 0; i < xi.size(); ++i) {
      if (xi[i] == 0.0)
        out.coeff[i] = 0.0;  // zero mode dropped for either sign of sigma
      else
        out.coeff[i] *= std::pow(xi[i], w.sigma);
    }
  }
  if (m_table) out.coeff *= *m_table;
  return out;
}

}  // namespace

double mixed_spacetime_norm(const Trajectory& traj, const SubInterval& J,
                            double q, double r, const NormWeight& weight) {
  if (std::isinf(r))
    throw std::invalid_argument(
        "mixed_spacetime_norm: r = inf is excluded (r in [2, inf))");
  if (traj.states.empty())
    throw std::invalid_argument("mixed_spacetime_norm: empty trajectory");
  SubInterval js = snap_interval(traj, J);
  int ia = traj.index_of_time(js.a), ib = traj.index_of_time(js.b);

  Eigen::ArrayXd xi = traj.grid.xi_norm_table();
  Eigen::ArrayXd m_table;
  if (weight.smoothing) m_table = weight.smoothing->table(traj.grid);

  std::vector<double> g(ib - ia + 1);
  for (int i = ia; i <= ib; ++i) {
    SpectralField f = weighted_component(
        traj.states[i], weight, xi, weight.smoothing ? &m_table : nullptr);
    g[i - ia] = spatial_lr_norm(f, r);
  }
  if (std::isinf(q)) {
    double mx = 0.0;
    for (double v : g) mx = std::max(mx, v);
    return mx;
  }
  double h = traj.snap_dt();
  double acc = 0.0;
  for (int i = 0; i + 1 < static_cast<int>(g.size()); ++i)
    acc += 0.5 * h * (std::pow(g[i], q) + std::pow(g[i + 1], q));
  return std::pow(acc, 1.0 / q);
}

ZNormResult z_norm(const Trajectory& traj, const SubInterval& J,
                   const MultiplierProfile& prof,
                   const std::vector<AdmissiblePair>& pairs) {
  if (pairs.empty())
    throw std::invalid_argument("z_norm: the pair set must be nonempty");
  ZNormResult best{-1.0, pairs.front()};
  for (const AdmissiblePair& p : pairs) {
    NormWeight wu{1.0 - p.m, &prof, false};
    NormWeight wt{-p.m, &prof, true};
    double v = mixed_spacetime_norm(traj, J, p.q, p.r, wu) +
               mixed_spacetime_norm(traj, J, p.q, p.r, wt);
    if (v > best.value) best = {v, p};
  }
  return best;
}

GainNormResult nonlinear_gain_norm(const Trajectory& traj,
                                   const SubInterval& J,
                                   const MultiplierProfile& prof) {
  SubInterval js = snap_interval(traj, J);
  int ia = traj.index_of_time(js.a), ib = traj.index_of_time(js.b);
  Eigen::ArrayXd m_table = prof.table(traj.grid);
  Eigen::ArrayXd xi = traj.grid.xi_norm_table();

  DuhamelAccumulator acc(traj);
  std::vector<double> g_dt, g_du;  // L^3_x norms at even offsets
  for (int i = ia; i <= ib; ++i) {
    acc.push(traj.states[i]);
    if (!acc.has_value()) continue;
    const WaveState& nl = acc.value();
    SpectralField du(traj.grid, nl.u.coeff * m_table * xi);
    SpectralField dt_part(traj.grid, nl.ut.coeff * m_table);
    g_du.push_back(spatial_lr_norm(du, 3.0));
    g_dt.push_back(spatial_lr_norm(dt_part, 3.0));
  }

  double h = 2.0 * traj.snap_dt();
  auto l6 = [h](const std::vector<double>& g) {
    double acc6 = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i)
      acc6 += 0.5 * h * (std::pow(g[i], 6.0) + std::pow(g[i + 1], 6.0));
    return std::pow(acc6, 1.0 / 6.0);
  };
  GainNormResult out;
  out.value = l6(g_dt) + l6(g_du);
  out.predicted_bound = std::pow(std::max(1.0, js.length()), 2.0 / 3.0);
  return out;
}

EnergyTrajectory measure_energy_trajectory(const Trajectory& traj,
                                           const MultiplierProfile& prof) {
  EnergyTrajectory et;
  for (const WaveState& s : traj.states) {
    et.times.push_back(s.t);
    et.E_u.push_back(energy(s));
    et.E_Iu.push_back(mollified_energy(s, prof));
    SobolevNorm sn = sobolev_norm(s, prof.s);
    et.Hs_norm.push_back(sn.u_part);
    et.Hs1_norm.push_back(sn.ut_part);
  }
  return et;
}

std::string energy_trajectory_csv(const EnergyTrajectory& et,
                                  const std::string& config_hash, double s,
                                  double N, double L, int n, double dt) {
  std::ostringstream os;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "# config=%s s=%.17g N=%.17g L=%.17g n=%d dt=%.17g\n",
                config_hash.c_str(), s, N, L, n, dt);
  os << buf << "time,E_u,E_Iu,Hs_norm,Hs1_norm\n";
  for (std::size_t i = 0; i < et.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  et.times[i], et.E_u[i], et.E_Iu[i], et.Hs_norm[i],
                  et.Hs1_norm[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace cwi
