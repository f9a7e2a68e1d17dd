#include "cwi/multiplier.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cwi {

namespace {
constexpr double kLn2 = std::numbers::ln2;

bool is_dyadic(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) return false;
  int exp;
  double mant = std::frexp(x, &exp);
  return mant == 0.5;
}
}  // namespace

MultiplierProfile::MultiplierProfile(double s_, double cutoff_)
    : s(s_), cutoff(cutoff_) {
  if (!(s > 0.5 && s < 1.0))
    throw std::invalid_argument(
        "MultiplierProfile: s must lie in the open interval (1/2, 1)");
  if (!(cutoff >= 1.0) || !is_dyadic(cutoff))
    throw std::invalid_argument(
        "MultiplierProfile: cutoff N must be a dyadic number >= 1");
}

double MultiplierProfile::m(double r) const {
  if (r <= cutoff) return 1.0;
  double tau = std::log2(r / cutoff);
  if (tau >= 1.0) return std::pow(cutoff / r, 1.0 - s);
  // log m = -(1-s) ln2 * h(tau), h the quintic with h(0)=h'(0)=h''(0)=0,
  // h(1)=h'(1)=1, h''(1)=0; h' = tau^2 (18 - 32 tau + 15 tau^2) > 0 on (0,1).
  double h = tau * tau * tau * (6.0 + tau * (-8.0 + 3.0 * tau));
  return std::exp(-(1.0 - s) * kLn2 * h);
}

Eigen::ArrayXd MultiplierProfile::table(const Grid3& grid) const {
  Eigen::ArrayXd xi = grid.xi_norm_table();
  Eigen::ArrayXd t(xi.size());
  for (std::int64_t i = 0; i < xi.size(); ++i) t[i] = m(xi[i]);
  return t;
}

SpectralField apply_symbol_table(const SpectralField& f,
                                 const Eigen::ArrayXd& table) {
  SpectralField out(f.grid, f.coeff * table);
  return out;
}

SpectralField apply_radial_multiplier(
    const SpectralField& f, const std::function<double(double)>& symbol,
    std::optional<double> zero_value) {
  const Grid3& g = f.grid;
  Eigen::ArrayXd xi = g.xi_norm_table();
  Eigen::ArrayXd table(xi.size());
  for (std::int64_t i = 0; i < xi.size(); ++i) {
    double v = (xi[i] == 0.0 && zero_value) ? *zero_value : symbol(xi[i]);
    if (std::isnan(v)) {
      Eigen::Vector3i k = g.k_vec(i);
      std::ostringstream os;
      os << "apply_radial_multiplier: symbol is NaN at k = (" << k[0] << ", "
         << k[1] << ", " << k[2] << "), |xi| = " << xi[i];
      throw std::invalid_argument(os.str());
    }
    table[i] = v;
  }
  return apply_symbol_table(f, table);
}

SpectralField fractional_derivative(
    const SpectralField& f, double sigma,
    std::optional<std::complex<double>> zero_mode) {
  if (sigma == 0.0) return f;
  if (sigma < 0.0 && !zero_mode) {
    double mean_mag = std::abs(f.coeff[0]);
    double scale = f.coeff.abs().maxCoeff();
    if (mean_mag > 1e-13 * std::max(scale, 1e-300))
      throw std::invalid_argument(
          "fractional_derivative: negative order on a field with nonzero "
          "mean and no zero-mode rule supplied");
  }
  SpectralField out = apply_radial_multiplier(
      f, [sigma](double r) { return std::pow(r, sigma); }, 0.0);
  if (zero_mode) out.coeff[0] = *zero_mode;
  return out;
}

SpectralField smoothing_I(const SpectralField& f,
                          const MultiplierProfile& prof) {
  return apply_symbol_table(f, prof.table(f.grid));
}

double lp_phi(double rho) {
  if (rho <= 1.0) return 1.0;
  if (rho >= 2.0) return 0.0;
  double t = std::log2(rho);
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double lp_psi(double rho) { return lp_phi(rho) - lp_phi(2.0 * rho); }

SpectralField lp_project(const SpectralField& f, DyadicShell shell,
                         LpMode mode) {
  if (!is_dyadic(shell.M))
    throw std::invalid_argument("lp_project: shell M must be dyadic");
  double M = shell.M;
  auto sym = [M, mode](double r) {
    double rho = r / M;
    switch (mode) {
      case LpMode::at:
        return lp_psi(rho);
      case LpMode::below:
        return lp_phi(rho);
      case LpMode::above:
        return 1.0 - lp_phi(rho);
    }
    return 0.0;
  };
  return apply_radial_multiplier(f, sym);
}

std::vector<ShellEntry> lattice_shells(const Grid3& grid) {
  double xi_min = grid.xi_unit();        // smallest nonzero |xi_k|
  double xi_top = grid.xi_corner();      // largest |xi_k|
  double lo = std::exp2(std::floor(std::log2(xi_min)));
  double hi = std::exp2(std::ceil(std::log2(xi_top)));
  std::vector<ShellEntry> out;
  out.push_back({{lo}, LpMode::below});
  for (double M = 2.0 * lo; M <= hi * 1.0000001; M *= 2.0)
    out.push_back({{M}, LpMode::at});
  return out;
}

}  // namespace cwi
