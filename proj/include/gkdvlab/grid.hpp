#ifndef GKDVLAB_GRID_HPP
#define GKDVLAB_GRID_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "gkdvlab/errors.hpp"

namespace gkdvlab {

using cvec = std::vector<std::complex<double>>;

/// Uniform periodic grid on [-L, L) with N points; dt is the solver step
/// (0 when the grid is used for quadrature/operators only).
struct GridSpec {
  int n = 0;
  double half_length = 0.0;
  double dt = 0.0;

  double dx() const { return 2.0 * half_length / n; }
  double x(int i) const { return -half_length + i * dx(); }

  // Signed integer mode for FFT bin m.
  int signed_mode(int m) const { return m <= n / 2 ? m : m - n; }
  double wavenumber(int m) const {
    return M_PI * signed_mode(m) / half_length;
  }

  static bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

  void validate(bool require_dt = false) const {
    if (!power_of_two(n) || n < 64)
      throw InvalidParameters("grid N must be a power of two >= 64, got " +
                              std::to_string(n));
    if (!(half_length > 0))
      throw InvalidParameters("grid L must be positive");
    if (require_dt && !(dt != 0.0) )
      throw InvalidParameters("grid dt must be nonzero for time stepping");
  }

  bool operator==(const GridSpec& o) const {
    return n == o.n && half_length == o.half_length && dt == o.dt;
  }
};

/// Samples of a real or complex function on a GridSpec, stamped with time.
struct SampledField {
  cvec values;
  GridSpec grid;
  double t = 0.0;

  int size() const { return static_cast<int>(values.size()); }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
  }
  std::complex<double> mass() const {
    std::complex<double> s = 0.0;
    for (const auto& v : values) s += v;
    return s * grid.dx();
  }
  double l2_sq() const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return s * grid.dx();
  }
  double l2_norm() const { return std::sqrt(l2_sq()); }
  bool is_real(double tol = 1e-12) const {
    double scale = max_abs();
    if (scale == 0.0) return true;
    for (const auto& v : values)
      if (std::abs(v.imag()) > tol * scale) return false;
    return true;
  }
};

inline SampledField zero_field(const GridSpec& g, double t = 0.0) {
  return SampledField{cvec(g.n, 0.0), g, t};
}

}  // namespace gkdvlab

#endif
