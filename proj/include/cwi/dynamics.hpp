#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cwi/field.hpp"

namespace cwi {

/// Pair (u, du/dt) at a time instant.
struct WaveState {
  double t;
  SpectralField u;
  SpectralField ut;
};

/// CFL-type step bound for the splitting integrator, 0.5 * (L/n). The linear
/// flow is exact at any dt; the bound keeps the splitting error of the cubic
/// stage in its asymptotic regime. Conservative on purpose.
double stability_bound(const Grid3& grid);

/// Per-mode rotation tables of the free flow over a fixed dt:
/// cos(|xi| dt), sin(|xi| dt)/|xi| (value dt at xi = 0), -|xi| sin(|xi| dt).
struct PropagatorTable {
  double dt;
  Eigen::ArrayXd cos_t, sinc_t, dsin_t;
  PropagatorTable(const Grid3& grid, double dt);
};

/// Exact free-wave flow: each Fourier mode rotates by angle |xi| dt. Exactly
/// reversible; dt may have either sign.
WaveState linear_propagate(const WaveState& s, double dt);
void linear_propagate_inplace(WaveState& s, const PropagatorTable& tab);

/// Sharp spectral truncation to |k|_inf <= n/4 (exact dealiasing for a cubic
/// product up to the band edge); 1/0 mask in flat order.
Eigen::ArrayXd dealias_mask(const Grid3& grid);

/// dealias(u^3): truncate, cube in physical space, transform back, truncate.
/// Throws on overflow in the physical cube, reporting max |u|.
SpectralField dealiased_cube(const SpectralField& u,
                             const Eigen::ArrayXd* mask = nullptr);

struct StepperOptions {
  bool nonlinear = true;
  /// Sign of the cubic forcing term: -1 defocusing (the equation's sign),
  /// +1 focusing (sign-sanity experiments only).
  double cubic_sign = -1.0;
};

/// ut <- ut + dt * cubic_sign * dealias(u^3); u unchanged.
WaveState nonlinear_kick(const WaveState& s, double dt,
                         const StepperOptions& opts = {});

/// Strang composition linear(dt/2) . kick(dt) . linear(dt/2). Requires
/// 0 < dt <= stability_bound(grid).
WaveState step_strang(const WaveState& s, double dt,
                      const StepperOptions& opts = {});

/// Ordered snapshots of one run, uniformly spaced dt*stride apart.
struct Trajectory {
  Grid3 grid;
  double dt = 0.0;
  int stride = 1;
  bool nonlinear = true;
  double cubic_sign = -1.0;
  bool aborted = false;          // non-finite field detected mid-run
  std::vector<WaveState> states; // empty when evolve ran storage-free

  double snap_dt() const { return dt * stride; }
  double t_begin() const { return states.front().t; }
  double t_end() const { return states.back().t; }
  /// Snapshot index whose time matches t within half a snapshot spacing.
  int index_of_time(double t) const;
};

struct EvolveOptions {
  StepperOptions stepper;
  bool store = true;
  /// Called for every snapshot (including the initial state) in time order.
  std::function<void(const WaveState&, int snapshot_index)> observer;
};

/// Repeated step_strang from `s` over horizon T with snapshots every
/// `stride` steps. The step count is rounded up so the horizon is covered by
/// a whole number of snapshot intervals. On a non-finite field the run stops
/// and the partial trajectory is returned with `aborted` set (the bad state
/// is not recorded).
Trajectory evolve(const WaveState& s, double T, double dt, int stride,
                  const EvolveOptions& opts = {});

/// Composite quadrature weights over m uniform intervals of width h:
/// Simpson for even m, Simpson with a 3/8 tail for odd m >= 3, trapezoid
/// for m = 1. Returns m + 1 node weights.
std::vector<double> composite_quadrature_weights(int m, double h);

struct SubInterval {
  double a, b;
  SubInterval(double a_, double b_) : a(a_), b(b_) {
    if (!(a < b)) throw std::invalid_argument("SubInterval: need a < b");
  }
  double length() const { return b - a; }
};

/// J with both endpoints snapped to snapshot times of the trajectory.
SubInterval snap_interval(const Trajectory& traj, const SubInterval& J);

/// Free evolution of the snapshot at a = J.a evaluated at time t in J;
/// independent of the trajectory after a.
WaveState adapted_linear_part(const Trajectory& traj, const SubInterval& J,
                              double t);

struct DuhamelResult {
  WaveState state;
  bool reduced_order;  // fewer than 4 quadrature nodes were available
};

/// Duhamel integral of the cubic source from J.a to t (composite Simpson on
/// the snapshot lattice; a 3/8 tail handles odd interval counts), together
/// with its time derivative through the cosine kernel. Exactly zero at
/// t = J.a.
DuhamelResult duhamel_nonlinear_part(const Trajectory& traj,
                                     const SubInterval& J, double t);

/// Streaming evaluator for the Duhamel integral on consecutive even-indexed
/// snapshots: push snapshots in order; value() holds u^{nl} relative to the
/// anchor after each complete Simpson pair. Equivalent to the direct
/// composite rule through the free-flow semigroup property.
class DuhamelAccumulator {
 public:
  explicit DuhamelAccumulator(const Trajectory& meta);  // uses grid/sign only
  void push(const WaveState& snap);
  bool has_value() const { return count_ > 0 && (count_ - 1) % 2 == 0; }
  const WaveState& value() const { return acc_; }

 private:
  double cubic_sign_;
  bool nonlinear_;
  Eigen::ArrayXd mask_;
  Eigen::ArrayXd xi_;
  int count_ = 0;
  WaveState acc_;
  std::vector<std::pair<double, SpectralField>> pending_;  // (t, S_hat)
};

}  // namespace cwi
