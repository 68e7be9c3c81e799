#ifndef GKDVLAB_DIAGNOSTICS_HPP
#define GKDVLAB_DIAGNOSTICS_HPP

#include <vector>

#include "gkdvlab/grid.hpp"
#include "gkdvlab/operators.hpp"
#include "gkdvlab/solutions.hpp"
#include "gkdvlab/spectral.hpp"

namespace gkdvlab {

/// Overflowed is a value, not an error: it is the legitimate outcome when
/// the weighted integral diverges on every sufficiently wide grid.
struct WeightedNorm {
  double value = 0.0;
  bool overflowed = false;
};

/// Quadrature of e^{2 lam |x - b t|} |d_x^k u|^2. Flagged Overflowed when
/// the boundary-cell integrand exceeds 1e-10 of the whole integral (the
/// tail no longer decays under the weight).
WeightedNorm weighted_norm(const SampledField& u, double lambda, double b,
                           double t, int deriv_order, SpectralWorkspace& ws);

/// ||u||_{H^1}^2 on the grid.
double h1_norm_sq(const SampledField& u, SpectralWorkspace& ws);
/// int e^{|x - b t|} |u|^2.
double m3_functional(const SampledField& u, double b, double t);

/// Supremum of admissible weight rates: the two-sided log-slope of the
/// field's tails (block maxima), +infinity for super-exponential data.
/// Throws UnderflowWindow when no usable tail window exists.
double max_admissible_lambda(const SampledField& u, double b, double t);

/// f = e^{lambda phi(|x - b t|)} u.
SampledField conjugated_field(const SampledField& u, const FrameSpec& frame);

struct ClaimTwoResult {
  double lhs = 0.0;   // int a(u) (f_x - lam phi' f) f
  double rhs = 0.0;   // -int e^{2 lam phi} 2 lam phi' u^2 alpha(u)
  double lhs_over_lambda = 0.0;
};
ClaimTwoResult claim2_identity_check(const SampledField& u,
                                     const FrameSpec& frame,
                                     const NonlinearitySpec& nl,
                                     SpectralWorkspace& ws);

struct ClaimThreeResult {
  double ratio = 0.0;
  bool degenerate = false;
  double m2 = 0.0;
  double m3 = 0.0;
  double pointwise_max = 0.0;    // max e^{|x-bt|/2} u^2
  double pointwise_bound = 0.0;  // 2 sqrt(m2 m3) + m3/2
};
ClaimThreeResult claim3_bound_check(const SampledField& u,
                                    const FrameSpec& frame,
                                    const NonlinearitySpec& nl,
                                    SpectralWorkspace& ws);

/// Time window for the integrated identities. The triangle window is
/// 1/2 - |t - center| on [center - 1/2, center + 1/2]; its distributional
/// second derivative is handled as the exact point evaluation at the kink.
/// The smooth ramp rises C2 from 0 at t0 to 1 at t0 + 1 and stays 1.
struct WindowSpec {
  enum class Shape { triangle, smooth_ramp };
  Shape shape = Shape::triangle;
  double a = 0.5;
  double b = 1.5;
  double center = 1.0;

  static WindowSpec triangle(double center);
  static WindowSpec smooth_ramp(double t0, double t1);

  double eta(double t) const;
  double eta_prime(double t) const;
  double eta_second(double t) const;  // smooth ramp only
};

struct TimeIdentityResult {
  double residual_I = 0.0;
  double residual_II = 0.0;
  double scale_I = 0.0;
  double scale_II = 0.0;
};

/// Residuals of the two time-integrated identities over stored fields u(t_k)
/// at uniform cadence, with F = a(u)(f_x - lam phi' f). Throws
/// InsufficientCadence when the time quadrature cannot support 1e-3.
TimeIdentityResult time_identity_check(const std::vector<SampledField>& us,
                                       const FrameSpec& frame,
                                       const NonlinearitySpec& nl,
                                       const WindowSpec& window,
                                       SpectralWorkspace& ws);

/// Max relative residual of d/dt <f,f> = -2 <S f, f> + 2 <F, f> along the
/// stored samples (4th-order finite differences in t).
double energy_rate_max_residual(const std::vector<SampledField>& us,
                                const FrameSpec& frame,
                                const NonlinearitySpec& nl,
                                SpectralWorkspace& ws);

}  // namespace gkdvlab

#endif
