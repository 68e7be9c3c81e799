#ifndef GKDVLAB_WEIGHT_HPP
#define GKDVLAB_WEIGHT_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "gkdvlab/errors.hpp"

namespace gkdvlab {

/// Outcome of one audited constraint; worst_r locates the tightest (or first
/// failing) grid point.
struct AuditCheck {
  bool pass = true;
  double worst_r = 0.0;
  double worst_value = 0.0;
};

/// Full audit record. c0 is the smallest constant dominating the high-order
/// derivatives by phi0'' on the grid; C0 the smallest constant with
/// e^{-r/2} <= C0 * phi0''(r).
struct WeightAudit {
  AuditCheck positive;          // phi0 > 0
  AuditCheck first_deriv_low;   // phi0'(r) = r on [0, 3/2]
  AuditCheck first_deriv_high;  // phi0'(r) = 2 - log2/(4 log r) on [2, inf)
  AuditCheck second_range;      // 0 < phi0'' <= 1
  AuditCheck second_monotone;   // phi0'' strictly decreasing for r > 3/2
  AuditCheck high_order;        // |phi0^(k)| <= c0 phi0'', k = 3..6
  AuditCheck exp_lower;         // e^{-r/2} <= C0 phi0''
  AuditCheck junctions;         // piece continuity at 3/2 and 2, orders 0..6
  AuditCheck integral;          // integral of phi0'' over [3/2,2] equals 1/4
  double c0 = 0.0;
  double C0 = 0.0;
  double integral_value = 0.0;

  bool pass() const {
    return positive.pass && first_deriv_low.pass && first_deriv_high.pass &&
           second_range.pass && second_monotone.pass && high_order.pass &&
           exp_lower.pass && junctions.pass && integral.pass;
  }
};

/// The Carleman weight phi = scale * phi0, scale in {1, 1/4}.
///
/// phi0 is even and positive with phi0'(r) = r on [0, 3/2], the logarithmic
/// closed form on [2, inf), and a blend of phi0'' on (3/2, 2): a two-point
/// Hermite interpolant that meets both pieces with two derivative orders to
/// spare (the junctions are C8, which keeps grid quadratures of the
/// commutator integrands spectrally clean), enriched with correction modes
/// vanishing to seventh order at the junctions and chosen by a small QP so
/// that the blend integrates to exactly 1/4, stays strictly decreasing, and
/// keeps its bending as small as the constraints allow.
class WeightProfile {
 public:
  /// Deterministic construction; throws ConstructionFailed if the blend
  /// cannot satisfy positivity/monotonicity/the integral constraint.
  static WeightProfile build(double scale);

  double scale() const { return scale_; }

  /// phi and derivatives up to order 6, including the scale factor and the
  /// even/odd parity extension to r < 0. Throws UnsupportedOrder.
  double derivative(int order, double r) const;
  double operator()(double r) const { return derivative(0, r); }

  /// Unscaled phi0 derivatives (audits and the certificate denominators are
  /// stated for phi0 itself).
  double phi0_derivative(int order, double r) const;

  /// Blend coefficients: the jet part (interpolant 1 + tau^7 Q(tau), Q in
  /// powers of tau - 1) followed by the correction-mode amplitudes on
  /// tau^7 (tau - 1)^{7+i}, i = 0..4.
  const std::vector<double>& blend_coefficients() const { return blend_; }

  double c0_measured() const { return c0_; }
  double C0_measured() const { return C0_; }

  /// Grid audit plus junction-continuity and integral checks.
  WeightAudit audit(double r_max, double step) const;

  /// |left-piece - right-piece| at a junction (1.5 or 2.0) for one order.
  double junction_mismatch(double r0, int order) const;

 private:
  WeightProfile() = default;
  double piece_value(int piece, int order, double r) const;  // 0=quad,1=blend,2=tail
  double blend_g(double tau, int dtau) const;  // phi0'' blend and tau-derivs
  double blend_int1(double tau) const;         // int_0^tau g
  double blend_int2(double tau) const;         // int_0^tau int_0^s g

  double scale_ = 1.0;
  std::array<double, 7> q_{};  // jet coefficients in powers of (tau - 1)
  std::array<double, 5> p_{};  // correction-mode amplitudes
  double phi_at_2_ = 0.0;
  double li_2_ = 0.0;
  double c0_ = 0.0;
  double C0_ = 0.0;
  std::vector<double> blend_;
};

inline WeightProfile build_weight(double scale) {
  return WeightProfile::build(scale);
}

/// Grid-only audit of an arbitrary evaluator eval(order, r) for unscaled
/// phi0 derivatives; used for corrupted-profile checks. Populates every
/// field except junctions/integral (left passing).
WeightAudit audit_grid(const std::function<double(int, double)>& eval,
                       double r_max, double step);

}  // namespace gkdvlab

#endif
