#include "cwi/field.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cwi/fft.hpp"

namespace cwi {

SymmetryCheck hermitian_asymmetry(const SpectralField& f) {
  const Grid3& g = f.grid;
  double max_abs = f.coeff.abs().maxCoeff();
  if (max_abs == 0.0) return {0.0, {0, 0, 0}};
  double worst = 0.0;
  std::int64_t worst_f = 0;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    std::int64_t m = g.mirror(i);
    if (m < i) continue;
    double d = std::abs(f.coeff[i] - std::conj(f.coeff[m]));
    if (d > worst) {
      worst = d;
      worst_f = i;
    }
  }
  return {worst / max_abs, g.k_vec(worst_f)};
}

void enforce_hermitian(SpectralField& f) {
  const Grid3& g = f.grid;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    std::int64_t m = g.mirror(i);
    if (m < i) continue;
    if (m == i) {
      f.coeff[i] = std::complex<double>(f.coeff[i].real(), 0.0);
    } else {
      std::complex<double> avg =
          0.5 * (f.coeff[i] + std::conj(f.coeff[m]));
      f.coeff[i] = avg;
      f.coeff[m] = std::conj(avg);
    }
  }
}

SpectralField forward_transform(const Eigen::ArrayXd& samples,
                                const Grid3& grid) {
  if (samples.size() != grid.size())
    throw std::invalid_argument("forward_transform: sample count mismatch");
  for (std::int64_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      std::ostringstream os;
      os << "forward_transform: non-finite input at flat index " << i
         << " (value " << samples[i] << ")";
      throw std::invalid_argument(os.str());
    }
  }
  Eigen::ArrayXcd in = samples.cast<std::complex<double>>();
  SpectralField out(grid);
  fft::forward_raw(grid, in, out.coeff);
  out.coeff /= static_cast<double>(grid.size());
  // The DFT of real input is Hermitian up to rounding; make it exact so the
  // invariant survives arbitrarily long operation chains.
  enforce_hermitian(out);
  return out;
}

namespace {

Eigen::ArrayXd backward_real(const SpectralField& f) {
  Eigen::ArrayXcd phys;
  fft::backward_raw(f.grid, f.coeff, phys);
  return phys.real();
}

}  // namespace

Eigen::ArrayXd inverse_transform(const SpectralField& f) {
  SymmetryCheck chk = hermitian_asymmetry(f);
  if (chk.relative_error > 1e-9) {
    std::ostringstream os;
    os << "inverse_transform: Hermitian symmetry violated, relative error "
       << chk.relative_error << " at k = (" << chk.worst_k[0] << ", "
       << chk.worst_k[1] << ", " << chk.worst_k[2] << ")";
    throw std::invalid_argument(os.str());
  }
  return backward_real(f);
}

Eigen::ArrayXd inverse_transform_unchecked(const SpectralField& f) {
  return backward_real(f);
}

}  // namespace cwi
