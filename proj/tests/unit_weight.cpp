#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gkdvlab/weight.hpp"

using namespace gkdvlab;

namespace {

// 4th-order central difference, the independent oracle for the evaluators.
template <typename F>
double central_diff(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) /
         (12 * h);
}

}  // namespace

TEST_CASE("construction is deterministic") {
  const WeightProfile a = build_weight(1.0);
  const WeightProfile b = build_weight(1.0);
  REQUIRE(a.blend_coefficients().size() == b.blend_coefficients().size());
  for (size_t i = 0; i < a.blend_coefficients().size(); ++i)
    CHECK(a.blend_coefficients()[i] == b.blend_coefficients()[i]);
}

TEST_CASE("first derivative closed forms") {
  const WeightProfile w = build_weight(1.0);
  CHECK(w.derivative(1, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.derivative(1, 1.5) == doctest::Approx(1.5).epsilon(1e-14));
  // 2 - log2/(4 log 2) = 7/4 at the right junction
  CHECK(std::abs(w.derivative(1, 2.0) - 1.75) < 1e-12);
  CHECK(w.derivative(1, -1.0) == doctest::Approx(-1.0).epsilon(1e-14));
  // bounded by 2 everywhere
  CHECK(w.derivative(1, 1e6) < 2.0);
  double sup = 0.0;
  for (double r = 0; r < 400.0; r += 0.01)
    sup = std::max(sup, w.derivative(1, r));
  CHECK(sup <= 2.0);

  const WeightProfile q = build_weight(0.25);
  CHECK(q.derivative(1, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("value and low-order pieces") {
  const WeightProfile w = build_weight(1.0);
  CHECK(w.derivative(0, 0.0) == doctest::Approx(1.0));
  CHECK(w.derivative(0, 1.0) == doctest::Approx(1.5));
  CHECK(w.derivative(2, 1.0) == doctest::Approx(1.0));
  CHECK(w.derivative(4, 1.0) == 0.0);
  CHECK(w.derivative(3, 0.5) == 0.0);
  CHECK_THROWS_AS(w.derivative(7, 1.0), UnsupportedOrder);
  CHECK_THROWS_AS(build_weight(0.5), InvalidParameters);
}

TEST_CASE("tail derivatives match the finite-difference oracle") {
  const WeightProfile w = build_weight(1.0);
  // closed form of phi0'' at r = 3: log2 / (4 r log^2 r)
  const double expect2 = std::log(2.0) / (4.0 * 3.0 * std::pow(std::log(3.0), 2));
  CHECK(w.derivative(2, 3.0) == doctest::Approx(expect2).epsilon(1e-14));
  CHECK(w.derivative(2, 3.0) ==
        doctest::Approx(0.047858084245562045).epsilon(1e-12));

  // third derivative at 3: central differences of phi0'' at step 1e-4
  const double fd3 = central_diff(
      [&](double x) { return w.derivative(2, x); }, 3.0, 1e-4);
  CHECK(w.derivative(3, 3.0) == doctest::Approx(fd3).epsilon(1e-8));
  CHECK(w.derivative(3, 3.0) ==
        doctest::Approx(-0.044994231809535629).epsilon(1e-10));
}

TEST_CASE("finite differences validate every order away from breakpoints") {
  const WeightProfile w = build_weight(1.0);
  for (double r : {0.3, 1.2, 1.62, 1.78, 1.93, 2.5, 5.0, 20.0}) {
    for (int k = 1; k <= 6; ++k) {
      const double h = (r > 1.5 && r < 2.0) ? 1e-5 : 1e-4;
      if (r - 2 * h <= 1.5 && r + 2 * h >= 1.5) continue;
      if (r - 2 * h <= 2.0 && r + 2 * h >= 2.0) continue;
      const double fd = central_diff(
          [&](double x) { return w.derivative(k - 1, x); }, r, h);
      const double ev = w.derivative(k, r);
      const double scale = std::max({std::abs(ev), std::abs(fd), 1e-12});
      CHECK(std::abs(ev - fd) / scale < 1e-6);
    }
  }
}

TEST_CASE("parity of the even extension") {
  const WeightProfile w = build_weight(1.0);
  for (double r : {0.4, 1.7, 3.3, 12.0}) {
    for (int k = 0; k <= 6; ++k) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      CHECK(w.derivative(k, -r) == doctest::Approx(sign * w.derivative(k, r)));
    }
  }
}

TEST_CASE("junction continuity at machine precision") {
  const WeightProfile w = build_weight(1.0);
  for (double r0 : {1.5, 2.0})
    for (int k = 0; k <= 6; ++k) CHECK(w.junction_mismatch(r0, k) <= 1e-10);
}

TEST_CASE("audit passes and measures the constants") {
  const WeightProfile w = build_weight(1.0);
  const WeightAudit a = w.audit(50.0, 1e-3);
  CHECK(a.pass());
  CHECK(a.positive.pass);
  CHECK(a.second_range.pass);
  CHECK(a.second_monotone.pass);
  CHECK(std::abs(a.integral_value - 0.25) < 1e-10);
  CHECK(a.c0 > 0.0);
  CHECK(std::isfinite(a.c0));
  CHECK(a.C0 > 0.0);
  CHECK(std::isfinite(a.C0));
  CHECK(w.c0_measured() > 0.0);
  CHECK(w.C0_measured() > 0.0);

  // measured C0 dominates e^{-r/2} pointwise on a probe grid
  for (double r = 0.0; r <= 50.0; r += 0.37)
    CHECK(std::exp(-0.5 * r) <= w.C0_measured() * w.phi0_derivative(2, r) *
                                    (1.0 + 1e-12));
  // high-order domination with the measured c0
  for (double r = 0.0; r <= 50.0; r += 0.37)
    for (int k = 3; k <= 6; ++k)
      CHECK(std::abs(w.phi0_derivative(k, r)) <=
            w.c0_measured() * w.phi0_derivative(2, r) * (1.0 + 1e-12));
}

TEST_CASE("audit parameter validation") {
  const WeightProfile w = build_weight(1.0);
  CHECK_THROWS_AS(w.audit(5.0, 1e-3), InvalidParameters);
  CHECK_THROWS_AS(w.audit(50.0, 0.5), InvalidParameters);
}

TEST_CASE("corrupted second derivative is caught at the node") {
  const WeightProfile w = build_weight(1.0);
  const double bad_r = 10.0;
  auto eval = [&](int k, double r) {
    if (k == 2 && std::abs(r - bad_r) < 5e-4) return -1e-3;
    return w.phi0_derivative(k, r);
  };
  const WeightAudit a = audit_grid(eval, 20.0, 1e-3);
  CHECK(!a.second_range.pass);
  CHECK(a.second_range.worst_r == doctest::Approx(bad_r).epsilon(1e-6));
}

TEST_CASE("blend stays inside (0,1] and decreases") {
  const WeightProfile w = build_weight(1.0);
  double prev = w.phi0_derivative(2, 1.5);
  CHECK(prev == doctest::Approx(1.0));
  for (int i = 1; i <= 500; ++i) {
    const double r = 1.5 + 0.5 * i / 500.0;
    const double g = w.phi0_derivative(2, r);
    CHECK(g > 0.0);
    CHECK(g <= 1.0);
    CHECK(g < prev);
    prev = g;
  }
}
