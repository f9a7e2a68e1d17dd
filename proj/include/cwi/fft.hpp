#pragma once

#include <complex>

#include <Eigen/Core>

#include "cwi/grid.hpp"

namespace cwi::fft {

/// Unnormalized 3D DFT, sum_j x_j e^{-i 2pi jk/n} per axis. in and out must
/// not alias (out-of-place plans); the Eigen overloads below handle aliasing.
void forward_raw(const Grid3& grid, const std::complex<double>* in,
                 std::complex<double>* out);

/// Unnormalized inverse-sign 3D DFT, sum_k c_k e^{+i 2pi jk/n} per axis.
void backward_raw(const Grid3& grid, const std::complex<double>* in,
                  std::complex<double>* out);

void forward_raw(const Grid3& grid, const Eigen::ArrayXcd& in,
                 Eigen::ArrayXcd& out);
void backward_raw(const Grid3& grid, const Eigen::ArrayXcd& in,
                  Eigen::ArrayXcd& out);

}  // namespace cwi::fft
