#ifndef GKDVLAB_SPECTRAL_HPP
#define GKDVLAB_SPECTRAL_HPP

#include <complex>
#include <vector>

#include "gkdvlab/grid.hpp"

// Forward declarations so fftw3.h stays out of the public surface.
struct fftw_plan_s;

namespace gkdvlab {

/// FFT scratch space bound to one transform size. Construction is guarded by
/// a global planner mutex; execution is safe from the owning thread only.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(int n);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  int size() const { return n_; }

  void forward(const cvec& in, cvec& out);   // unnormalized FFT
  void inverse(const cvec& in, cvec& out);   // normalized inverse

  /// Spectral d^order/dx^order. Odd orders zero the Nyquist mode so the
  /// differentiation matrix stays skew-symmetric.
  cvec derivative(const GridSpec& grid, const cvec& in, int order);

  /// 2/3-rule mask applied to a spectrum in place.
  static void dealias(const GridSpec& grid, cvec& spectrum);

 private:
  int n_;
  fftw_plan_s* fwd_;
  fftw_plan_s* bwd_;
  std::complex<double>* buf_a_;
  std::complex<double>* buf_b_;
};

/// Trapezoid quadrature on the periodic grid (all weights equal).
inline double quadrature(const GridSpec& g, const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * g.dx();
}

/// Symmetric bilinear form h * sum Re(a) Re(b); the theory operates on real
/// fields, imaginary residue is FFT round-off.
inline double inner_real(const GridSpec& g, const cvec& a, const cvec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real();
  return s * g.dx();
}

inline double l2_sq(const GridSpec& g, const cvec& a) {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  return s * g.dx();
}

}  // namespace gkdvlab

#endif
