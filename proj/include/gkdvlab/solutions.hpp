#ifndef GKDVLAB_SOLUTIONS_HPP
#define GKDVLAB_SOLUTIONS_HPP

#include <complex>
#include <string>

#include "gkdvlab/grid.hpp"

namespace gkdvlab {

class SpectralWorkspace;

enum class NonlinearityFamily { pure_power, gardner, complex_cubic };

/// The nonlinearity a(u) entering (d_t + d_x^3) u = a(u) d_x u, with the
/// bound constant M1 for |a(s)| <= M1 (|s| + |s|^j).
struct NonlinearitySpec {
  NonlinearityFamily family = NonlinearityFamily::pure_power;
  int j = 1;
  double coeff = -1.0;   // pure power: a(u) = coeff * u^j
  double alpha1 = 0.0;   // gardner: a(u) = alpha1 u + alpha2 u^2
  double alpha2 = 0.0;
  double M1 = 1.0;

  static NonlinearitySpec pure_power(int j);                 // a = -j u^j
  static NonlinearitySpec pure_power_coeff(int j, double c); // a = c u^j
  static NonlinearitySpec gardner(double a1, double a2);
  static NonlinearitySpec mkdv();          // a = -6 u^2
  static NonlinearitySpec complex_cubic(); // a = -|u|^2, complex states
  static NonlinearitySpec none();          // a = 0

  bool is_complex() const { return family == NonlinearityFamily::complex_cubic; }
  bool is_zero() const;

  double a_real(double s) const;
  /// a(u) is real for every supported family, including the complex one.
  double a_of(const std::complex<double>& u) const;
  /// alpha(s) = s^{-2} int_0^s a(s') s' ds', closed form.
  double alpha_integral(double s) const;
  /// |a(s)| <= M1 (|s| + |s|^j) at a sample amplitude.
  bool bound_holds(double s) const;

  std::string name() const;
  bool same_function(const NonlinearitySpec& o) const;
};

enum class SolutionKind {
  gkdv_soliton,
  mkdv_soliton,
  mkdv_breather,
  complex_breather
};

/// Closed-form solution family parameters. lambda is the amplitude/decay
/// parameter; mu the internal breather frequency; x0 a translation.
struct SolutionSpec {
  SolutionKind kind = SolutionKind::mkdv_soliton;
  double lambda = 1.0;
  double mu = 0.0;
  int j = 1;       // gkdv power
  double x0 = 0.0;

  void validate() const;
  bool is_complex() const { return kind == SolutionKind::complex_breather; }
  double envelope_speed() const;
  double envelope_center(double t) const { return x0 + envelope_speed() * t; }
  double decay_rate() const { return lambda; }
  NonlinearitySpec matching_nonlinearity() const;
  std::string name() const;

  static SolutionSpec gkdv_soliton(int j, double lambda, double x0 = 0.0);
  static SolutionSpec mkdv_soliton(double lambda, double x0 = 0.0);
  static SolutionSpec mkdv_breather(double lambda, double mu, double x0 = 0.0);
  static SolutionSpec complex_breather(double lambda, double mu, double x0 = 0.0);
};

/// Overflow-safe sech.
double sech_stable(double z);

std::complex<double> evaluate(const SolutionSpec& spec, double x, double t);
/// Analytic d/dt of the closed form (chain rule through the traveling
/// arguments and phases).
std::complex<double> evaluate_dt(const SolutionSpec& spec, double x, double t);

SampledField sample(const SolutionSpec& spec, const GridSpec& grid, double t);

/// sup |(d_t + d_x^3) u - a(u) d_x u| with spectral x-derivatives and the
/// supplied time derivative.
double pde_residual_sup(const cvec& u, const cvec& u_t,
                        const NonlinearitySpec& nl, const GridSpec& grid,
                        SpectralWorkspace& ws);

/// Residual of the sanctioned (solution, nonlinearity) pairing on a grid;
/// throws MismatchedPair for any other pairing and BoundaryLeak if the
/// solution does not decay below 1e-12 (relative) at the grid edge.
double residual_sup(const SolutionSpec& spec, const NonlinearitySpec& nl,
                    const GridSpec& grid, double t, SpectralWorkspace& ws);

/// Least-squares decay rate of log|u| over [r_lo, r_hi] to the right of the
/// envelope center, using block maxima so breather oscillations do not bias
/// the fit. Throws UnderflowWindow below 1e-300.
double tail_decay_rate(const SolutionSpec& spec, double t, double r_lo,
                       double r_hi);

}  // namespace gkdvlab

#endif
