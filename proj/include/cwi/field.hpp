#pragma once

#include <complex>

#include <Eigen/Core>

#include "cwi/grid.hpp"

namespace cwi {

/// One real scalar field stored as Fourier coefficients over the full
/// frequency lattice of its grid.
///
/// Convention (Fourier series): u(x_j) = sum_k coeff_k e^{+i xi_k . x_j}.
/// A real field therefore has Hermitian-symmetric coefficients,
/// coeff(-k) = conj(coeff(k)) with -k taken mod n per axis. Plancherel under
/// this convention reads ||samples||_2 = n^{3/2} ||coeff||_2, and physical
/// integrals become  ∫ u v dx = L^3 sum_k conj(u_k) v_k  for real u, v.
struct SpectralField {
  Grid3 grid;
  Eigen::ArrayXcd coeff;

  explicit SpectralField(const Grid3& g)
      : grid(g), coeff(Eigen::ArrayXcd::Zero(g.size())) {}
  SpectralField(const Grid3& g, Eigen::ArrayXcd c)
      : grid(g), coeff(std::move(c)) {}

  /// L^2(box) norm, sqrt(L^3 sum |coeff|^2).
  double l2_norm() const {
    return std::sqrt(grid.volume() * coeff.abs2().sum());
  }

  /// Coefficient of the integer frequency triple k.
  std::complex<double> at(int k1, int k2, int k3) const {
    return coeff[grid.flat(grid.index_of_k(k1), grid.index_of_k(k2),
                           grid.index_of_k(k3))];
  }
  std::complex<double>& at(int k1, int k2, int k3) {
    return coeff[grid.flat(grid.index_of_k(k1), grid.index_of_k(k2),
                           grid.index_of_k(k3))];
  }
};

/// Worst Hermitian-symmetry violation max_k |c(k) - conj(c(-k))| divided by
/// max_k |c(k)| (0 for the zero field). Also reports the offending k.
struct SymmetryCheck {
  double relative_error;
  Eigen::Vector3i worst_k;
};
SymmetryCheck hermitian_asymmetry(const SpectralField& f);

/// Projects onto the Hermitian-symmetric part, c(k) <- (c(k)+conj(c(-k)))/2.
void enforce_hermitian(SpectralField& f);

/// Physical samples -> coefficients. Rejects non-finite input, naming the
/// first bad flat index. Output is exactly Hermitian-symmetric.
SpectralField forward_transform(const Eigen::ArrayXd& samples,
                                const Grid3& grid);

/// Coefficients -> physical samples. Requires Hermitian symmetry within
/// 1e-9 relative (error names the worst offending k); the imaginary residue
/// of the inverse DFT is discarded after the check passes.
Eigen::ArrayXd inverse_transform(const SpectralField& f);

/// Inverse transform without the symmetry gate, for hot loops that operate
/// on fields whose symmetry is maintained by construction.
Eigen::ArrayXd inverse_transform_unchecked(const SpectralField& f);

}  // namespace cwi
