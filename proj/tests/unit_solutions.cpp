#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "gkdvlab/solutions.hpp"
#include "gkdvlab/spectral.hpp"

using namespace gkdvlab;

namespace {
const GridSpec kGrid{2048, 80.0, 0.0};
}

TEST_CASE("pointwise closed-form values") {
  CHECK(evaluate(SolutionSpec::mkdv_soliton(1.0), 0.0, 0.0).real() ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(evaluate(SolutionSpec::gkdv_soliton(1, 1.0), 0.0, 0.0).real() ==
        doctest::Approx(1.5).epsilon(1e-14));
  CHECK(evaluate(SolutionSpec::gkdv_soliton(2, 1.0), 0.0, 0.0).real() ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  // breather with lambda = mu = 1 at the origin: 2 sqrt(2) / 3
  CHECK(evaluate(SolutionSpec::mkdv_breather(1.0, 1.0), 0.0, 0.0).real() ==
        doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(SolutionSpec::mkdv_soliton(-1.0), InvalidParameters);
  CHECK_THROWS_AS(SolutionSpec::mkdv_breather(1.0, 0.0), InvalidParameters);
  CHECK_THROWS_AS(SolutionSpec::gkdv_soliton(0, 1.0), InvalidParameters);
}

TEST_CASE("analytic time derivative agrees with differencing") {
  const double h = 1e-5;
  for (const SolutionSpec spec :
       {SolutionSpec::mkdv_soliton(1.3), SolutionSpec::gkdv_soliton(3, 0.9),
        SolutionSpec::mkdv_breather(1.0, 2.0),
        SolutionSpec::complex_breather(1.0, 0.7)}) {
    for (double x : {-3.0, 0.4, 2.5}) {
      for (double t : {0.0, 0.37}) {
        const std::complex<double> fd =
            (evaluate(spec, x, t + h) - evaluate(spec, x, t - h)) / (2 * h);
        const std::complex<double> an = evaluate_dt(spec, x, t);
        CHECK(std::abs(an - fd) < 1e-7 * std::max(1.0, std::abs(an)));
      }
    }
  }
}

TEST_CASE("PDE residuals of the sanctioned pairings") {
  SpectralWorkspace ws(kGrid.n);
  for (double lam : {0.5, 1.0, 2.0}) {
    const SolutionSpec s = SolutionSpec::mkdv_soliton(lam);
    CHECK(residual_sup(s, s.matching_nonlinearity(), kGrid, 0.0, ws) < 1e-6);
  }
  for (int j : {1, 2, 3, 4}) {
    const SolutionSpec s = SolutionSpec::gkdv_soliton(j, 1.0);
    CHECK(residual_sup(s, s.matching_nonlinearity(), kGrid, 0.1, ws) < 1e-6);
  }
  {
    // the (1,2) breather carries carrier harmonics up to |k| ~ 45; resolve
    // them before asking for 1e-6 pointwise
    const GridSpec fine{4096, 80.0, 0.0};
    SpectralWorkspace wsf(fine.n);
    const SolutionSpec s = SolutionSpec::mkdv_breather(1.0, 2.0);
    CHECK(residual_sup(s, s.matching_nonlinearity(), fine, 0.3, wsf) < 1e-6);
  }
  {
    const SolutionSpec s = SolutionSpec::mkdv_breather(1.0, 1.0);
    CHECK(residual_sup(s, s.matching_nonlinearity(), kGrid, 0.2, ws) < 1e-6);
  }
  {
    const SolutionSpec s = SolutionSpec::complex_breather(1.0, 0.7);
    CHECK(residual_sup(s, s.matching_nonlinearity(), kGrid, 0.15, ws) < 1e-6);
  }
}

TEST_CASE("zero field solves the equation") {
  SpectralWorkspace ws(kGrid.n);
  const cvec zero(kGrid.n, 0.0);
  CHECK(pde_residual_sup(zero, zero, NonlinearitySpec::mkdv(), kGrid, ws) ==
        0.0);
}

TEST_CASE("mismatched pairings are rejected") {
  SpectralWorkspace ws(kGrid.n);
  const SolutionSpec s = SolutionSpec::mkdv_soliton(1.0);
  CHECK_THROWS_AS(
      residual_sup(s, NonlinearitySpec::pure_power(2), kGrid, 0.0, ws),
      MismatchedPair);
  CHECK_THROWS_AS(
      residual_sup(s, NonlinearitySpec::complex_cubic(), kGrid, 0.0, ws),
      MismatchedPair);
  // gardner(0,-6) is the same function as the mkdv normalization
  CHECK_NOTHROW(
      residual_sup(s, NonlinearitySpec::gardner(0.0, -6.0), kGrid, 0.0, ws));
}

TEST_CASE("boundary leak guard") {
  const GridSpec tight{256, 6.0, 0.0};
  SpectralWorkspace wst(tight.n);
  const SolutionSpec s = SolutionSpec::mkdv_soliton(0.5);
  CHECK_THROWS_AS(residual_sup(s, s.matching_nonlinearity(), tight, 0.0, wst),
                  BoundaryLeak);
}

TEST_CASE("scaling symmetry maps breathers onto breathers") {
  // m u(m x, m^3 t; lam, mu) = u(x, t; m lam, m mu) for the cubic power
  for (double m : {0.5, 2.0}) {
    const SolutionSpec base = SolutionSpec::mkdv_breather(1.0, 2.0);
    const SolutionSpec scaled = SolutionSpec::mkdv_breather(m * 1.0, m * 2.0);
    for (double x : {-1.0, 0.3, 2.0}) {
      for (double t : {0.0, 0.21}) {
        const double lhs = m * evaluate(base, m * x, m * m * m * t).real();
        const double rhs = evaluate(scaled, x, t).real();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      }
    }
  }
  // and scaled solitons still solve the equation
  SpectralWorkspace ws(kGrid.n);
  for (double m : {0.5, 2.0}) {
    const SolutionSpec s = SolutionSpec::gkdv_soliton(2, m);
    CHECK(residual_sup(s, s.matching_nonlinearity(), kGrid, 0.0, ws) < 1e-6);
  }
}

TEST_CASE("breather envelope moves at minus gamma") {
  const SolutionSpec s = SolutionSpec::mkdv_breather(1.0, 2.0);
  const double gamma = 3.0 * 2.0 * 2.0 - 1.0;
  CHECK(s.envelope_speed() == doctest::Approx(-gamma));
  const GridSpec g{4096, 60.0, 0.0};
  for (double t : {0.0, 0.5, 1.0}) {
    const SampledField f = sample(s, g, t);
    // |u|^2 centroid tracks the envelope; the raw argmax hops between
    // carrier crests spaced pi/mu
    double num = 0.0, den = 0.0;
    int imax = 0;
    double best = 0.0;
    for (int i = 0; i < g.n; ++i) {
      const double w = std::norm(f.values[i]);
      num += g.x(i) * w;
      den += w;
      if (w > best) {
        best = w;
        imax = i;
      }
    }
    CHECK(std::abs(num / den - (-gamma * t)) < 0.05);
    CHECK(std::abs(g.x(imax) - (-gamma * t)) < M_PI / (2.0 * s.mu) + g.dx());
  }
}

TEST_CASE("complex breather modulus is phase free") {
  const SolutionSpec s = SolutionSpec::complex_breather(1.2, 0.8);
  const double v = 1.2 * 1.2 - 3.0 * 0.8 * 0.8;
  for (double x : {-2.0, 0.0, 1.5}) {
    for (double t : {0.0, 0.4}) {
      const double env = std::sqrt(6.0) * 1.2 * sech_stable(1.2 * (x - v * t));
      CHECK(std::abs(evaluate(s, x, t)) == doctest::Approx(env).epsilon(1e-12));
    }
  }
  CHECK(s.envelope_speed() == doctest::Approx(v));
}

TEST_CASE("no overflow far out") {
  for (const SolutionSpec spec :
       {SolutionSpec::mkdv_soliton(2.0), SolutionSpec::mkdv_breather(2.0, 3.0),
        SolutionSpec::complex_breather(2.0, 1.0)}) {
    for (double x : {-1e3, 1e3}) {
      const auto v = evaluate(spec, x, 1e3);
      CHECK(std::isfinite(v.real()));
      CHECK(std::isfinite(v.imag()));
    }
  }
}

TEST_CASE("tail decay rates recover lambda") {
  CHECK(tail_decay_rate(SolutionSpec::mkdv_soliton(2.0), 0.0, 2.0, 8.0) ==
        doctest::Approx(2.0).epsilon(0.02));
  CHECK(tail_decay_rate(SolutionSpec::mkdv_breather(0.5, 1.0), 0.0, 8.0,
                        40.0) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(tail_decay_rate(SolutionSpec::gkdv_soliton(2, 1.0), 0.0, 4.0, 16.0) ==
        doctest::Approx(1.0).epsilon(0.02));
  CHECK(tail_decay_rate(SolutionSpec::complex_breather(1.0, 0.7), 0.0, 4.0,
                        16.0) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("tail fit underflow guard") {
  CHECK_THROWS_AS(
      tail_decay_rate(SolutionSpec::mkdv_soliton(2.0), 0.0, 300.0, 400.0),
      UnderflowWindow);
}

TEST_CASE("nonlinearity bound constant") {
  for (const auto& nl :
       {NonlinearitySpec::mkdv(), NonlinearitySpec::gardner(1.0, 1.0),
        NonlinearitySpec::pure_power(3), NonlinearitySpec::complex_cubic()}) {
    for (double s : {-3.0, -0.5, 0.0, 0.7, 4.0}) CHECK(nl.bound_holds(s));
  }
}

TEST_CASE("closed-form alpha integrals") {
  // a(s) = -6 s^2 -> alpha = -(3/2) s^2
  CHECK(NonlinearitySpec::mkdv().alpha_integral(2.0) ==
        doctest::Approx(-6.0).epsilon(1e-14));
  // a(s) = s -> alpha = s / 3
  CHECK(NonlinearitySpec::gardner(1.0, 0.0).alpha_integral(0.9) ==
        doctest::Approx(0.3).epsilon(1e-14));
}
