#include "cwi/synthesis.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cwi {

namespace {

double wrap_half(double d, double L) {
  // minimum-image offset in [-L/2, L/2)
  d = std::fmod(d, L);
  if (d < -L / 2) d += L;
  if (d >= L / 2) d -= L;
  return d;
}

void check_box(const Grid3& grid, const Recipe& r) {
  if (std::abs(grid.box_length() - r.box_length) >
      1e-9 * std::max(1.0, r.box_length)) {
    std::ostringstream os;
    os << "synthesize_initial_data: grid box length " << grid.box_length()
       << " does not match recipe box length " << r.box_length;
    throw std::invalid_argument(os.str());
  }
}

std::pair<SpectralField, SpectralField> synth_localized(const Grid3& grid,
                                                        const Recipe& r) {
  const int n = grid.n();
  const double L = grid.box_length();
  const double h = L / n;
  const bool packet = r.kind == Recipe::Kind::plane_wave_packet;
  const double kmag = r.wavevector.norm();

  Eigen::ArrayXd u0(grid.size()), u1(grid.size());
  std::int64_t f = 0;
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = 0; i2 < n; ++i2) {
      for (int i3 = 0; i3 < n; ++i3, ++f) {
        Eigen::Vector3d x(i1 * h, i2 * h, i3 * h);
        Eigen::Vector3d d(wrap_half(x[0] - r.center[0], L),
                          wrap_half(x[1] - r.center[1], L),
                          wrap_half(x[2] - r.center[2], L));
        double env =
            r.amplitude * std::exp(-d.squaredNorm() / (2.0 * r.width * r.width));
        if (packet) {
          double phase = r.wavevector.dot(x);
          u0[f] = env * std::cos(phase);
          u1[f] = env * kmag * std::sin(phase);
        } else {
          u0[f] = env;
          u1[f] = 0.0;
        }
      }
    }
  }
  return {forward_transform(u0, grid), forward_transform(u1, grid)};
}

std::pair<SpectralField, SpectralField> synth_random_sobolev(
    const Grid3& grid, const Recipe& r, std::uint64_t seed) {
  SpectralField u0(grid), u1(grid);
  const double p0 = -(r.sobolev_s + 1.5) - r.roughness;
  const double p1 = -(r.sobolev_s + 0.5) - r.roughness;
  const double inv_l = 1.0 / r.lambda;
  const double inv_l2 = inv_l * inv_l;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);

  // The coefficient law lives on the unscaled lattice xi_ref = lambda * xi;
  // scaling divides u0 by lambda and u1 by lambda^2 coefficientwise.
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    std::int64_t mir = grid.mirror(i);
    if (mir < i) continue;
    double xi_ref = r.lambda * grid.xi_norm(i);
    double mag0 = r.amplitude * std::pow(1.0 + xi_ref, p0) * inv_l;
    double mag1 = r.amplitude * std::pow(1.0 + xi_ref, p1) * inv_l2;
    double th0 = unif(rng);
    double th1 = unif(rng);
    if (mir == i) {
      u0.coeff[i] = mag0 * (th0 < std::numbers::pi ? 1.0 : -1.0);
      u1.coeff[i] = mag1 * (th1 < std::numbers::pi ? 1.0 : -1.0);
    } else {
      u0.coeff[i] = std::polar(mag0, th0);
      u0.coeff[mir] = std::conj(u0.coeff[i]);
      u1.coeff[i] = std::polar(mag1, th1);
      u1.coeff[mir] = std::conj(u1.coeff[i]);
    }
  }
  return {std::move(u0), std::move(u1)};
}

}  // namespace

Recipe::Kind Recipe::kind_from_name(const std::string& name) {
  if (name == "gaussian-bump") return Kind::gaussian_bump;
  if (name == "plane-wave-packet") return Kind::plane_wave_packet;
  if (name == "random-sobolev") return Kind::random_sobolev;
  throw std::invalid_argument(
      "unknown recipe \"" + name +
      "\"; valid recipes: gaussian-bump, plane-wave-packet, random-sobolev");
}

std::string Recipe::name() const {
  switch (kind) {
    case Kind::gaussian_bump:
      return "gaussian-bump";
    case Kind::plane_wave_packet:
      return "plane-wave-packet";
    case Kind::random_sobolev:
      return "random-sobolev";
  }
  return "?";
}

double Recipe::support_radius() const {
  if (!is_localized())
    throw std::logic_error(
        "support_radius: random-sobolev data is not localized");
  return 4.0 * width;
}

std::pair<SpectralField, SpectralField> synthesize_initial_data(
    const Grid3& grid, const Recipe& recipe, std::uint64_t seed) {
  check_box(grid, recipe);
  switch (recipe.kind) {
    case Recipe::Kind::gaussian_bump:
    case Recipe::Kind::plane_wave_packet:
      return synth_localized(grid, recipe);
    case Recipe::Kind::random_sobolev:
      return synth_random_sobolev(grid, recipe, seed);
  }
  throw std::logic_error("synthesize_initial_data: unreachable");
}

Recipe scale_profile(const Recipe& recipe, double lambda) {
  if (!(lambda >= 1.0))
    throw std::invalid_argument("scale_profile: lambda must be >= 1");
  Recipe out = recipe;
  out.box_length *= lambda;
  switch (recipe.kind) {
    case Recipe::Kind::gaussian_bump:
    case Recipe::Kind::plane_wave_packet:
      out.amplitude /= lambda;
      out.width *= lambda;
      out.center *= lambda;
      out.wavevector /= lambda;
      break;
    case Recipe::Kind::random_sobolev:
      out.lambda *= lambda;
      break;
  }
  return out;
}

}  // namespace cwi
