#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cwi {

/// Periodic box [0,L)^3 sampled on an n^3 collocation grid, together with its
/// frequency lattice xi_k = (2*pi/L) * k, k in {-n/2, ..., n/2-1}^3.
///
/// Coefficient arrays are flat, row-major over FFT index order: the flat
/// index of (i1,i2,i3) is (i1*n + i2)*n + i3 with i3 fastest, and axis index
/// i maps to the integer frequency k = i for i < n/2, k = i - n otherwise.
class Grid3 {
 public:
  /// Smallest valid grid; placeholder for containers built before the real
  /// grid is known.
  Grid3() : n_(8), box_length_(2.0 * std::numbers::pi) {}

  Grid3(int n, double box_length) : n_(n), box_length_(box_length) {
    if (n < 8 || (n & (n - 1)) != 0)
      throw std::invalid_argument("Grid3: n must be a power of two >= 8, got " +
                                  std::to_string(n));
    if (!(box_length > 0.0))
      throw std::invalid_argument("Grid3: box length must be positive");
  }

  int n() const { return n_; }
  double box_length() const { return box_length_; }
  std::int64_t size() const {
    return static_cast<std::int64_t>(n_) * n_ * n_;
  }
  double cell_volume() const {
    double h = box_length_ / n_;
    return h * h * h;
  }
  double volume() const { return box_length_ * box_length_ * box_length_; }
  /// Lattice spacing in frequency space, 2*pi/L.
  double xi_unit() const { return 2.0 * std::numbers::pi / box_length_; }
  /// Axis Nyquist magnitude (2*pi/L)*(n/2); strictly positive.
  double xi_max() const { return xi_unit() * (n_ / 2); }
  /// Largest |xi| on the lattice (attained at a corner).
  double xi_corner() const {
    double m = xi_max();
    return std::sqrt(3.0) * m;
  }

  int k_of_index(int i) const { return i < n_ / 2 ? i : i - n_; }
  int index_of_k(int k) const { return k >= 0 ? k : k + n_; }

  std::int64_t flat(int i1, int i2, int i3) const {
    return (static_cast<std::int64_t>(i1) * n_ + i2) * n_ + i3;
  }

  /// Integer frequency triple of a flat index.
  Eigen::Vector3i k_vec(std::int64_t f) const {
    int i3 = static_cast<int>(f % n_);
    int i2 = static_cast<int>((f / n_) % n_);
    int i1 = static_cast<int>(f / (static_cast<std::int64_t>(n_) * n_));
    return {k_of_index(i1), k_of_index(i2), k_of_index(i3)};
  }

  Eigen::Vector3d xi(std::int64_t f) const {
    return xi_unit() * k_vec(f).cast<double>();
  }

  double xi_norm(std::int64_t f) const {
    Eigen::Vector3i k = k_vec(f);
    return xi_unit() * std::sqrt(static_cast<double>(
                           k.squaredNorm()));
  }

  /// Flat index of the Hermitian partner -k (mod n per axis).
  std::int64_t mirror(std::int64_t f) const {
    int i3 = static_cast<int>(f % n_);
    int i2 = static_cast<int>((f / n_) % n_);
    int i1 = static_cast<int>(f / (static_cast<std::int64_t>(n_) * n_));
    auto m = [this](int i) { return i == 0 ? 0 : n_ - i; };
    return flat(m(i1), m(i2), m(i3));
  }

  /// |xi| for every lattice point, in flat order. Computed once per call;
  /// callers that need it repeatedly should hold on to the result.
  Eigen::ArrayXd xi_norm_table() const {
    Eigen::ArrayXd t(size());
    double xu = xi_unit();
    std::int64_t f = 0;
    for (int i1 = 0; i1 < n_; ++i1) {
      double k1 = k_of_index(i1);
      for (int i2 = 0; i2 < n_; ++i2) {
        double k2 = k_of_index(i2);
        for (int i3 = 0; i3 < n_; ++i3, ++f) {
          double k3 = k_of_index(i3);
          t[f] = xu * std::sqrt(k1 * k1 + k2 * k2 + k3 * k3);
        }
      }
    }
    return t;
  }

  bool operator==(const Grid3& o) const {
    return n_ == o.n_ && box_length_ == o.box_length_;
  }
  bool operator!=(const Grid3& o) const { return !(*this == o); }

 private:
  int n_;
  double box_length_;
};

}  // namespace cwi
