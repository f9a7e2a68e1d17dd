#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "cwi/field.hpp"

namespace cwi {

/// Analytic initial-data descriptor. Supported kinds:
///
///  gaussian-bump      u0 = A exp(-|x-c|^2 / 2w^2), u1 = 0
///  plane-wave-packet  u0 = A cos(k0.x) G, u1 = A |k0| sin(k0.x) G with the
///                     same Gaussian envelope G (an approximately traveling
///                     packet)
///  random-sobolev     |u0_hat(xi)| = A (1+|xi|)^{-(s+3/2)-delta},
///                     |u1_hat(xi)| = A (1+|xi|)^{-(s+1/2)-delta}, phases
///                     uniform under Hermitian symmetry (self-conjugate
///                     lattice points draw a random sign)
///
/// The descriptor carries its box length; the scaling u -> (1/l) u(./l)
/// acts on descriptor parameters in closed form, never by resampling. For
/// random-sobolev the coefficient law is anchored to the integer lattice of
/// the unscaled box, so `lambda` enters the law analytically.
struct Recipe {
  enum class Kind { gaussian_bump, plane_wave_packet, random_sobolev };

  Kind kind;
  double amplitude = 1.0;
  double box_length = 2.0 * std::numbers::pi;

  // gaussian-bump / plane-wave-packet
  double width = 1.0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d wavevector = Eigen::Vector3d::Zero();  // packet only

  // random-sobolev
  double sobolev_s = 0.75;
  double roughness = 0.05;  // delta > 0
  double lambda = 1.0;      // accumulated analytic scaling

  static Kind kind_from_name(const std::string& name);
  std::string name() const;

  /// Radius beyond which the profile is negligible; defined for the two
  /// analytic bump kinds (4 widths). Used for the box-length default rule
  /// L = 16 x support radius.
  double support_radius() const;
  bool is_localized() const { return kind != Kind::random_sobolev; }
};

/// Deterministic synthesis of (u0, u1) on `grid` for a fixed seed. The grid
/// box must match the recipe box within 1e-9 relative.
std::pair<SpectralField, SpectralField> synthesize_initial_data(
    const Grid3& grid, const Recipe& recipe, std::uint64_t seed);

/// Descriptor-level scaling map  u -> (1/l) u(./l), u1 -> (1/l^2) u1(./l);
/// multiplies the box length by lambda so the support-to-box ratio is
/// preserved. Requires lambda >= 1.
Recipe scale_profile(const Recipe& recipe, double lambda);

}  // namespace cwi
