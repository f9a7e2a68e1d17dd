#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cwi/dynamics.hpp"
#include "cwi/multiplier.hpp"

namespace cwi {

/// E(u) = 1/2 ∫ (du/dt)^2 + 1/2 ∫ |Du|^2 + 1/4 ∫ u^4. The quadratic parts
/// are exact lattice sums through Plancherel; the quartic part is the
/// physical-space Riemann sum with cell volume (L/n)^3.
double energy(const WaveState& s);

/// E(Iu): the energy functional evaluated on the smoothed pair (Iu, I du/dt).
/// Equals energy(s) exactly when the state is band-limited to |xi| <= N.
double mollified_energy(const WaveState& s, const MultiplierProfile& prof);

/// Quadratic part only, 1/2 ||du/dt||^2 + 1/2 ||Du||^2 (exact lattice sums).
double quadratic_energy(const WaveState& s);
double quadratic_mollified_energy(const WaveState& s,
                                  const MultiplierProfile& prof);

/// Momentum ∫ (du/dt) grad(u) dx, an exact spectral sum.
Eigen::Vector3d momentum(const WaveState& s);

/// ||f||_{H^s} = ||(1+D)^s f||_2 (inhomogeneous) or ||D^s f||_2
/// (homogeneous). The homogeneous variant with s < 0 requires a mean-zero
/// field.
double sobolev_norm_field(const SpectralField& f, double s, bool homogeneous);

struct SobolevNorm {
  double u_part;   // ||u||_{H^s}
  double ut_part;  // ||du/dt||_{H^{s-1}}
  double combined; // sum convention, ||u||_{H^s} + ||du/dt||_{H^{s-1}}
};
SobolevNorm sobolev_norm(const WaveState& s, double order,
                         bool homogeneous = false);

/// Exponent pair (q, r) with derivative index m: wave-admissible means
/// 1/q + 1/r <= 1/2 with q in (2, inf], r in [2, inf), and the dimensional
/// relation 1/q + 3/r = 3/2 - m with 0 <= m <= 1.
struct AdmissiblePair {
  double q, r, m;
  AdmissiblePair(double q_, double r_);  // throws if not admissible
  std::string label() const;
};

/// m = 3/2 - 1/q - 3/r when (q, r) is admissible and m lands in [0, 1];
/// otherwise the violated constraint, by name.
std::variant<double, std::string> admissible_check(double q, double r);

/// The pairs the diagnostics evaluate by default:
/// (inf,2), (8,8/3), (6,6), (4,4), (12/5,12).
std::vector<AdmissiblePair> default_pair_set();

/// Optional multiplier applied inside mixed norms: D^sigma, optionally
/// followed by the smoothing operator I, acting on the chosen component.
/// For sigma < 0 the lattice zero mode is dropped (treated as coefficient
/// 0); the continuum point xi = 0 carries no mass, the lattice point does.
struct NormWeight {
  double sigma = 0.0;
  const MultiplierProfile* smoothing = nullptr;
  bool on_time_derivative = false;
};

/// ||w(u)||_{L^q_t(J) L^r_x}: spatial L^r by lattice Riemann sum, temporal
/// L^q by composite trapezoid over the snapshots in J (max over snapshots
/// when q = inf). r = inf is rejected. Monotone in J up to quadrature
/// tolerance.
double mixed_spacetime_norm(const Trajectory& traj, const SubInterval& J,
                            double q, double r,
                            const NormWeight& weight = {});

struct ZNormResult {
  double value;
  AdmissiblePair argmax;
};

/// max over the supplied pairs of
/// ||D^{1-m} I u||_{L^q L^r} + ||D^{-m} I du/dt||_{L^q L^r}.
ZNormResult z_norm(const Trajectory& traj, const SubInterval& J,
                   const MultiplierProfile& prof,
                   const std::vector<AdmissiblePair>& pairs);

struct GainNormResult {
  double value;           // ||dt I u^nl||_{L6 L3} + ||D I u^nl||_{L6 L3}
  double predicted_bound; // (max(1,|J|))^{2/3}
};

/// The regularity-gain quantity of the nonlinear part on J, evaluated on
/// even-indexed snapshots through the streaming Duhamel accumulator.
GainNormResult nonlinear_gain_norm(const Trajectory& traj,
                                   const SubInterval& J,
                                   const MultiplierProfile& prof);

/// Per-snapshot scalar series of one run.
struct EnergyTrajectory {
  std::vector<double> times;
  std::vector<double> E_u;
  std::vector<double> E_Iu;
  std::vector<double> Hs_norm;   // ||u||_{H^s}
  std::vector<double> Hs1_norm;  // ||du/dt||_{H^{s-1}}
};

EnergyTrajectory measure_energy_trajectory(const Trajectory& traj,
                                           const MultiplierProfile& prof);

/// CSV export: one row per snapshot (time, E_u, E_Iu, Hs_norm, Hs1_norm),
/// preceded by a header row carrying the config hash and (s, N, L, n, dt).
std::string energy_trajectory_csv(const EnergyTrajectory& et,
                                  const std::string& config_hash, double s,
                                  double N, double L, int n, double dt);

}  // namespace cwi
