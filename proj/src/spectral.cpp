#include "gkdvlab/spectral.hpp"

#include <fftw3.h>

#include <mutex>

namespace gkdvlab {

namespace {
// FFTW's planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

SpectralWorkspace::SpectralWorkspace(int n) : n_(n) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  buf_a_ = reinterpret_cast<std::complex<double>*>(
      fftw_alloc_complex(static_cast<size_t>(n)));
  buf_b_ = reinterpret_cast<std::complex<double>*>(
      fftw_alloc_complex(static_cast<size_t>(n)));
  // FFTW_ESTIMATE keeps plan selection deterministic run to run.
  fwd_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf_a_),
                          reinterpret_cast<fftw_complex*>(buf_b_),
                          FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf_a_),
                          reinterpret_cast<fftw_complex*>(buf_b_),
                          FFTW_BACKWARD, FFTW_ESTIMATE);
}

SpectralWorkspace::~SpectralWorkspace() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(fwd_);
  fftw_destroy_plan(bwd_);
  fftw_free(buf_a_);
  fftw_free(buf_b_);
}

void SpectralWorkspace::forward(const cvec& in, cvec& out) {
  for (int i = 0; i < n_; ++i) buf_a_[i] = in[i];
  fftw_execute(fwd_);
  out.resize(n_);
  for (int i = 0; i < n_; ++i) out[i] = buf_b_[i];
}

void SpectralWorkspace::inverse(const cvec& in, cvec& out) {
  for (int i = 0; i < n_; ++i) buf_a_[i] = in[i];
  fftw_execute(bwd_);
  out.resize(n_);
  const double inv = 1.0 / n_;
  for (int i = 0; i < n_; ++i) out[i] = buf_b_[i] * inv;
}

cvec SpectralWorkspace::derivative(const GridSpec& grid, const cvec& in,
                                   int order) {
  if (order == 0) return in;
  cvec hat;
  forward(in, hat);
  const bool odd = (order % 2) != 0;
  for (int m = 0; m < n_; ++m) {
    if (odd && grid.signed_mode(m) == n_ / 2) {
      hat[m] = 0.0;
      continue;
    }
    const double k = grid.wavenumber(m);
    std::complex<double> factor;
    switch (order) {
      case 1: factor = {0.0, k}; break;
      case 2: factor = {-k * k, 0.0}; break;
      case 3: factor = {0.0, -k * k * k}; break;
      case 4: factor = {k * k * k * k, 0.0}; break;
      case 5: factor = {0.0, k * k * k * k * k}; break;
      default: factor = std::pow(std::complex<double>(0.0, k), order); break;
    }
    hat[m] *= factor;
  }
  cvec out;
  inverse(hat, out);
  return out;
}

void SpectralWorkspace::dealias(const GridSpec& grid, cvec& spectrum) {
  const int n = grid.n;
  for (int m = 0; m < n; ++m) {
    if (std::abs(grid.signed_mode(m)) > n / 3) spectrum[m] = 0.0;
  }
}

}  // namespace gkdvlab
