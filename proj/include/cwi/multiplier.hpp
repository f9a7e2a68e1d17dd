#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cwi/field.hpp"

namespace cwi {

/// Radial symbol m(xi) of the smoothing multiplier: identity below the
/// dyadic cutoff N, the power law (N/|xi|)^{1-s} from 2N upward, and a C^2
/// monotone quintic interpolant in log|xi| across the transition band
/// (value, slope and curvature matched at both ends; log m on the power side
/// is linear in log|xi|, so both endpoint curvatures are zero).
struct MultiplierProfile {
  double s;       // regularity exponent, 1/2 < s < 1
  double cutoff;  // N, dyadic, >= 1

  MultiplierProfile(double s_, double cutoff_);

  double m(double xi_abs) const;

  /// m over the whole lattice, flat order. One transcendental pass; hold on
  /// to the result when applying repeatedly.
  Eigen::ArrayXd table(const Grid3& grid) const;
};

/// coeff'(k) = symbol(|xi_k|) * coeff(k). The zero-frequency value must be
/// supplied by the caller when symbol(0) is not finite. Rejects NaN symbol
/// values, naming the lattice point.
SpectralField apply_radial_multiplier(
    const SpectralField& f, const std::function<double(double)>& symbol,
    std::optional<double> zero_value = std::nullopt);

/// Pointwise product with a precomputed symbol table (no validation).
SpectralField apply_symbol_table(const SpectralField& f,
                                 const Eigen::ArrayXd& table);

/// D^sigma, symbol |xi|^sigma. For sigma > 0 the zero mode maps to 0. For
/// sigma < 0 the input must be mean-zero unless `zero_mode` supplies the
/// output coefficient at k = 0.
SpectralField fractional_derivative(
    const SpectralField& f, double sigma,
    std::optional<std::complex<double>> zero_mode = std::nullopt);

/// The smoothing operator I: coeff'(k) = m(|xi_k|) coeff(k).
SpectralField smoothing_I(const SpectralField& f,
                          const MultiplierProfile& prof);

/// Littlewood-Paley profile: radial, nonincreasing, 1 on |xi|<=M, supported
/// on |xi|<=2M (quintic smoothstep in log2 across (M,2M)).
double lp_phi(double rho);  // rho = |xi|/M
/// Annulus profile psi(rho) = phi(rho) - phi(2 rho), supported on (1/2, 2).
double lp_psi(double rho);

struct DyadicShell {
  double M;  // integer power of two times the dyadic base (2^j, j in Z)
};

enum class LpMode { at, below, above };

/// P_M (mode at), P_{<=M} (below), P_{>M} (above). below and above are exact
/// complements: P_{<=M} + P_{>M} = Id holds coefficientwise.
SpectralField lp_project(const SpectralField& f, DyadicShell shell,
                         LpMode mode);

/// One entry of a decomposition list: the anchor shell uses the ball profile
/// (mode below), every later shell the annulus profile (mode at).
struct ShellEntry {
  DyadicShell shell;
  LpMode mode;
};

/// Consecutive shells covering the lattice: the anchor M_min (largest dyadic
/// <= the smallest nonzero |xi_k|, taken as a ball so the zero mode is kept)
/// followed by annuli up to the smallest dyadic >= the lattice corner |xi|.
/// By telescoping, summing the projections reconstructs any field exactly.
std::vector<ShellEntry> lattice_shells(const Grid3& grid);

}  // namespace cwi
