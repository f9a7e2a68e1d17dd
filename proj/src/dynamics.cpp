#include "cwi/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cwi/fft.hpp"

namespace cwi {

double stability_bound(const Grid3& grid) {
  return 0.5 * grid.box_length() / grid.n();
}

PropagatorTable::PropagatorTable(const Grid3& grid, double dt_) : dt(dt_) {
  Eigen::ArrayXd xi = grid.xi_norm_table();
  cos_t.resize(xi.size());
  sinc_t.resize(xi.size());
  dsin_t.resize(xi.size());
  for (std::int64_t i = 0; i < xi.size(); ++i) {
    double w = xi[i];
    if (w == 0.0) {
      cos_t[i] = 1.0;
      sinc_t[i] = dt;  // lim sin(w dt)/w
      dsin_t[i] = 0.0;
    } else {
      double sn = std::sin(w * dt);
      cos_t[i] = std::cos(w * dt);
      sinc_t[i] = sn / w;
      dsin_t[i] = -w * sn;
    }
  }
}

void linear_propagate_inplace(WaveState& s, const PropagatorTable& tab) {
  Eigen::ArrayXcd u_new =
      s.u.coeff * tab.cos_t + s.ut.coeff * tab.sinc_t;
  s.ut.coeff = s.u.coeff * tab.dsin_t + s.ut.coeff * tab.cos_t;
  s.u.coeff = std::move(u_new);
  s.t += tab.dt;
}

WaveState linear_propagate(const WaveState& s, double dt) {
  if (!std::isfinite(dt))
    throw std::invalid_argument("linear_propagate: dt must be finite");
  WaveState out = s;
  PropagatorTable tab(s.u.grid, dt);
  linear_propagate_inplace(out, tab);
  return out;
}

Eigen::ArrayXd dealias_mask(const Grid3& grid) {
  const int n = grid.n();
  const int kc = n / 4;
  Eigen::ArrayXd mask(grid.size());
  std::int64_t f = 0;
  for (int i1 = 0; i1 < n; ++i1) {
    bool ok1 = std::abs(grid.k_of_index(i1)) <= kc;
    for (int i2 = 0; i2 < n; ++i2) {
      bool ok2 = ok1 && std::abs(grid.k_of_index(i2)) <= kc;
      for (int i3 = 0; i3 < n; ++i3, ++f)
        mask[f] = (ok2 && std::abs(grid.k_of_index(i3)) <= kc) ? 1.0 : 0.0;
    }
  }
  return mask;
}

SpectralField dealiased_cube(const SpectralField& u,
                             const Eigen::ArrayXd* mask) {
  Eigen::ArrayXd own;
  if (!mask) {
    own = dealias_mask(u.grid);
    mask = &own;
  }
  SpectralField trunc(u.grid, u.coeff * (*mask));
  Eigen::ArrayXd phys = inverse_transform_unchecked(trunc);
  double mx = phys.abs().maxCoeff();
  if (!(mx < 1e100)) {
    std::ostringstream os;
    os << "dealiased_cube: physical-space cube overflow, max |u| = " << mx;
    throw std::runtime_error(os.str());
  }
  Eigen::ArrayXd cubed = phys * phys * phys;
  SpectralField out = forward_transform(cubed, u.grid);
  out.coeff *= *mask;
  return out;
}

WaveState nonlinear_kick(const WaveState& s, double dt,
                         const StepperOptions& opts) {
  WaveState out = s;
  if (!opts.nonlinear) return out;
  SpectralField S = dealiased_cube(s.u);
  out.ut.coeff += (dt * opts.cubic_sign) * S.coeff;
  return out;
}

WaveState step_strang(const WaveState& s, double dt,
                      const StepperOptions& opts) {
  double bound = stability_bound(s.u.grid);
  if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "step_strang: dt = " << dt
       << " outside (0, stability bound]; bound = " << bound;
    throw std::invalid_argument(os.str());
  }
  WaveState mid = linear_propagate(s, dt / 2);
  mid = nonlinear_kick(mid, dt, opts);
  return linear_propagate(mid, dt / 2);
}

int Trajectory::index_of_time(double t) const {
  if (states.empty()) throw std::logic_error("Trajectory: no snapshots");
  double rel = (t - t_begin()) / snap_dt();
  int idx = static_cast<int>(std::llround(rel));
  if (idx < 0 || idx >= static_cast<int>(states.size()) ||
      std::abs(rel - idx) > 0.5) {
    std::ostringstream os;
    os << "Trajectory: no snapshot at time " << t;
    throw std::invalid_argument(os.str());
  }
  return idx;
}

Trajectory evolve(const WaveState& s, double T, double dt, int stride,
                  const EvolveOptions& opts) {
  if (!(T > 0.0)) throw std::invalid_argument("evolve: T must be positive");
  if (stride < 1) throw std::invalid_argument("evolve: stride must be >= 1");
  const Grid3& grid = s.u.grid;
  double bound = stability_bound(grid);
  if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "evolve: dt = " << dt << " outside (0, stability bound]; bound = "
       << bound;
    throw std::invalid_argument(os.str());
  }

  std::int64_t nsteps =
      static_cast<std::int64_t>(std::ceil(T / dt - 1e-9));
  if (nsteps % stride != 0) nsteps += stride - nsteps % stride;

  Trajectory traj;
  traj.grid = grid;
  traj.dt = dt;
  traj.stride = stride;
  traj.nonlinear = opts.stepper.nonlinear;
  traj.cubic_sign = opts.stepper.cubic_sign;

  PropagatorTable half(grid, dt / 2);
  Eigen::ArrayXd mask = dealias_mask(grid);

  WaveState cur = s;
  int snap_index = 0;
  auto record = [&](const WaveState& st) -> bool {
    if (!st.u.coeff.allFinite() || !st.ut.coeff.allFinite()) {
      traj.aborted = true;
      return false;
    }
    if (opts.store) traj.states.push_back(st);
    if (opts.observer) opts.observer(st, snap_index);
    ++snap_index;
    return true;
  };
  record(cur);

  for (std::int64_t step = 0; step < nsteps && !traj.aborted; ++step) {
    linear_propagate_inplace(cur, half);
    if (opts.stepper.nonlinear) {
      SpectralField S = dealiased_cube(cur.u, &mask);
      cur.ut.coeff += (dt * opts.stepper.cubic_sign) * S.coeff;
    }
    linear_propagate_inplace(cur, half);
    cur.t = s.t + (step + 1) * dt;  // avoid accumulation drift in t
    if ((step + 1) % stride == 0)
      if (!record(cur)) break;
  }
  return traj;
}

SubInterval snap_interval(const Trajectory& traj, const SubInterval& J) {
  double d = traj.snap_dt();
  double t0 = traj.t_begin();
  auto snap = [&](double t) {
    double idx = std::llround((t - t0) / d);
    idx = std::min(std::max(idx, 0.0),
                   static_cast<double>(traj.states.size() - 1));
    return t0 + idx * d;
  };
  double a = snap(J.a), b = snap(J.b);
  if (!(a < b))
    throw std::invalid_argument(
        "snap_interval: interval collapses under snapshot snapping");
  return {a, b};
}

WaveState adapted_linear_part(const Trajectory& traj, const SubInterval& J,
                              double t) {
  SubInterval js = snap_interval(traj, J);
  if (t < js.a - 1e-9 || t > js.b + 1e-9)
    throw std::invalid_argument("adapted_linear_part: t outside J");
  const WaveState& anchor = traj.states[traj.index_of_time(js.a)];
  return linear_propagate(anchor, t - anchor.t);
}

std::vector<double> composite_quadrature_weights(int m, double h) {
  std::vector<double> w(m + 1, 0.0);
  if (m == 1) {
    w[0] = w[1] = h / 2;
    return w;
  }
  int simpson_end = (m % 2 == 0) ? m : m - 3;
  for (int i = 0; i + 2 <= simpson_end; i += 2) {
    w[i] += h / 3;
    w[i + 1] += 4 * h / 3;
    w[i + 2] += h / 3;
  }
  if (m % 2 != 0) {
    int j = m - 3;
    w[j] += 3 * h / 8;
    w[j + 1] += 9 * h / 8;
    w[j + 2] += 9 * h / 8;
    w[j + 3] += 3 * h / 8;
  }
  return w;
}

DuhamelResult duhamel_nonlinear_part(const Trajectory& traj,
                                     const SubInterval& J, double t) {
  SubInterval js = snap_interval(traj, J);
  if (t < js.a - 1e-9 || t > js.b + 1e-9)
    throw std::invalid_argument("duhamel_nonlinear_part: t outside J");
  const Grid3& grid = traj.grid;
  int ia = traj.index_of_time(js.a);
  int it = traj.index_of_time(t);
  double t_eval = traj.states[it].t;

  WaveState out{t_eval, SpectralField(grid), SpectralField(grid)};
  int m = it - ia;
  if (m == 0 || !traj.nonlinear) return {std::move(out), false};

  Eigen::ArrayXd mask = dealias_mask(grid);
  Eigen::ArrayXd xi = grid.xi_norm_table();
  std::vector<double> w = composite_quadrature_weights(m, traj.snap_dt());

  for (int j = 0; j <= m; ++j) {
    const WaveState& node = traj.states[ia + j];
    SpectralField S = dealiased_cube(node.u, &mask);
    double tau = t_eval - node.t;
    double cw = w[j] * traj.cubic_sign;
    for (std::int64_t f = 0; f < grid.size(); ++f) {
      double omega = xi[f];
      double sinc = omega == 0.0 ? tau : std::sin(omega * tau) / omega;
      double cosv = std::cos(omega * tau);
      out.u.coeff[f] += cw * sinc * S.coeff[f];
      out.ut.coeff[f] += cw * cosv * S.coeff[f];
    }
  }
  return {std::move(out), m < 3};
}

DuhamelAccumulator::DuhamelAccumulator(const Trajectory& meta)
    : cubic_sign_(meta.cubic_sign),
      nonlinear_(meta.nonlinear),
      mask_(dealias_mask(meta.grid)),
      xi_(meta.grid.xi_norm_table()),
      acc_{0.0, SpectralField(meta.grid), SpectralField(meta.grid)} {}

void DuhamelAccumulator::push(const WaveState& snap) {
  if (count_ == 0) acc_.t = snap.t;
  ++count_;
  if (!nonlinear_) {
    acc_.t = snap.t;
    return;
  }
  pending_.emplace_back(snap.t, dealiased_cube(snap.u, &mask_));
  if (pending_.size() < 3) return;

  // Advance the accumulated integral across the completed Simpson pair.
  double t_end = pending_[2].first;
  double h = (t_end - pending_[0].first) / 2.0;
  PropagatorTable shift(snap.u.grid, t_end - acc_.t);
  linear_propagate_inplace(acc_, shift);
  const double wts[3] = {h / 3, 4 * h / 3, h / 3};
  for (int j = 0; j < 3; ++j) {
    double tau = t_end - pending_[j].first;
    double cw = wts[j] * cubic_sign_;
    const auto& S = pending_[j].second.coeff;
    for (std::int64_t f = 0; f < xi_.size(); ++f) {
      double omega = xi_[f];
      double sinc = omega == 0.0 ? tau : std::sin(omega * tau) / omega;
      acc_.u.coeff[f] += cw * sinc * S[f];
      acc_.ut.coeff[f] += cw * std::cos(omega * tau) * S[f];
    }
  }
  acc_.t = t_end;
  pending_.erase(pending_.begin(), pending_.begin() + 2);
}

}  // namespace cwi
