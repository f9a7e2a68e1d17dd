#include "cwi/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace cwi::fft {
namespace {

// One forward and one backward plan per grid size. Plans are created with
// FFTW_ESTIMATE (deterministic kernel choice) and FFTW_UNALIGNED so they can
// execute on any caller buffer via the new-array interface. Plan creation is
// the only non-thread-safe FFTW entry point, hence the mutex.
struct Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex g_mutex;
std::map<int, Plans>& plan_cache() {
  static std::map<int, Plans> cache;
  return cache;
}

const Plans& plans_for(int n) {
  std::lock_guard<std::mutex> lock(g_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::size_t total = static_cast<std::size_t>(n) * n * n;
  fftw_complex* a = fftw_alloc_complex(total);
  fftw_complex* b = fftw_alloc_complex(total);
  if (!a || !b) throw std::runtime_error("fft: allocation failed");
  Plans p;
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.fwd = fftw_plan_dft_3d(n, n, n, a, b, FFTW_FORWARD, flags);
  p.bwd = fftw_plan_dft_3d(n, n, n, a, b, FFTW_BACKWARD, flags);
  fftw_free(a);
  fftw_free(b);
  if (!p.fwd || !p.bwd) throw std::runtime_error("fft: planning failed");
  return cache.emplace(n, p).first->second;
}

void execute(fftw_plan plan, const std::complex<double>* in,
             std::complex<double>* out) {
  // FFTW does not write through `in` for out-of-place plans; the const_cast
  // is required by its C interface only.
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(
                       const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

void forward_raw(const Grid3& grid, const std::complex<double>* in,
                 std::complex<double>* out) {
  execute(plans_for(grid.n()).fwd, in, out);
}

void backward_raw(const Grid3& grid, const std::complex<double>* in,
                  std::complex<double>* out) {
  execute(plans_for(grid.n()).bwd, in, out);
}

void forward_raw(const Grid3& grid, const Eigen::ArrayXcd& in,
                 Eigen::ArrayXcd& out) {
  if (&in == &out) {
    Eigen::ArrayXcd tmp(in.size());
    forward_raw(grid, in.data(), tmp.data());
    out.swap(tmp);
    return;
  }
  out.resize(in.size());
  forward_raw(grid, in.data(), out.data());
}

void backward_raw(const Grid3& grid, const Eigen::ArrayXcd& in,
                  Eigen::ArrayXcd& out) {
  if (&in == &out) {
    Eigen::ArrayXcd tmp(in.size());
    backward_raw(grid, in.data(), tmp.data());
    out.swap(tmp);
    return;
  }
  out.resize(in.size());
  backward_raw(grid, in.data(), out.data());
}

}  // namespace cwi::fft
