#include "gkdvlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace gkdvlab {

WeightedNorm weighted_norm(const SampledField& u, double lambda, double b,
                           double t, int deriv_order, SpectralWorkspace& ws) {
  if (deriv_order < 0 || deriv_order > 3)
    throw UnsupportedOrder("weighted_norm supports derivative orders 0..3");
  const GridSpec& g = u.grid;
  const cvec d = deriv_order == 0 ? u.values
                                  : ws.derivative(g, u.values, deriv_order);
  WeightedNorm out;
  double total = 0.0, edge = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double r = std::abs(g.x(i) - b * t);
    const double amp = std::abs(d[i]);
    // log-scaled evaluation: exp(big) * underflowed-zero must stay zero
    double w = 0.0;
    if (amp > 0.0) {
      const double e = 2.0 * lambda * r + 2.0 * std::log(amp);
      w = e > 708.0 ? std::numeric_limits<double>::infinity() : std::exp(e);
    }
    total += w;
    if (i < 4 || i >= g.n - 4) edge = std::max(edge, w);
  }
  out.value = total * g.dx();
  if (!std::isfinite(out.value) || (out.value > 0 && edge > 1e-10 * out.value))
    out.overflowed = true;
  return out;
}

double h1_norm_sq(const SampledField& u, SpectralWorkspace& ws) {
  const cvec ux = ws.derivative(u.grid, u.values, 1);
  return u.l2_sq() + l2_sq(u.grid, ux);
}

double m3_functional(const SampledField& u, double b, double t) {
  double s = 0.0;
  for (int i = 0; i < u.grid.n; ++i) {
    const double r = std::abs(u.grid.x(i) - b * t);
    s += std::exp(r) * std::norm(u.values[i]);
  }
  return s * u.grid.dx();
}

namespace {

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// One-sided tail rate from block maxima; dir = +1 or -1 from the center
// index. Returns {rate, super_exponential}.
std::pair<double, bool> side_rate(const SampledField& u, int icenter,
                                  int dir) {
  const GridSpec& g = u.grid;
  const double umax = std::abs(u.values[icenter]);
  // the lower cut stays above the solver's radiation floor so the fit
  // window never touches numerical noise
  const double hi_cut = 1e-2 * umax;
  const double lo_cut = std::max(1e-8 * umax, 1e-290);

  std::vector<double> pos, logv;
  int i = icenter;
  int steps = 0;
  // move to the start of the window
  while (steps < g.n - 8 && std::abs(u.values[(i + g.n) % g.n]) > hi_cut) {
    i += dir;
    ++steps;
  }
  std::vector<double> px, pv;
  while (steps < g.n - 8) {
    const int idx = (i + g.n) % g.n;
    const double v = std::abs(u.values[idx]);
    if (v < lo_cut) break;
    if (idx < 4 || idx >= g.n - 4) break;  // stay off the boundary cells
    px.push_back(g.x(icenter) + dir * (steps * g.dx()));
    pv.push_back(v);
    i += dir;
    ++steps;
  }
  if (static_cast<int>(px.size()) < 32)
    throw UnderflowWindow("tail window too short for a rate fit");

  // block maxima; blocks shrink with the window but keep at least four
  const int block =
      std::max(8, std::min(32, static_cast<int>(px.size()) / 6));
  const int nblocks = static_cast<int>(px.size()) / block;
  for (int bk = 0; bk < nblocks; ++bk) {
    double best = -1.0, best_x = 0.0;
    for (int k = 0; k < block; ++k) {
      const int idx = bk * block + k;
      if (pv[idx] > best) {
        best = pv[idx];
        best_x = px[idx];
      }
    }
    pos.push_back(dir * (best_x - g.x(icenter)));  // distance from center
    logv.push_back(std::log(best));
  }
  if (pos.size() < 4)
    throw UnderflowWindow("tail window too short for a rate fit");

  const size_t half = pos.size() / 2;
  std::vector<double> x1(pos.begin(), pos.begin() + half),
      y1(logv.begin(), logv.begin() + half),
      x2(pos.begin() + half, pos.end()), y2(logv.begin() + half, logv.end());
  const double s_in = -lsq_slope(x1, y1);
  const double s_out = -lsq_slope(x2, y2);
  const double s_all = -lsq_slope(pos, logv);
  const bool super_exp = s_out > 1.35 * std::max(s_in, 1e-300);
  return {s_all, super_exp};
}

}  // namespace

double max_admissible_lambda(const SampledField& u, double b, double t) {
  const GridSpec& g = u.grid;
  int icenter = 0;
  double best = -1.0;
  for (int i = 0; i < g.n; ++i) {
    const double v = std::abs(u.values[i]);
    if (v > best) {
      best = v;
      icenter = i;
    }
  }
  (void)b;
  (void)t;
  if (best <= 0.0) throw UnderflowWindow("field is identically zero");
  const auto right = side_rate(u, icenter, +1);
  const auto left = side_rate(u, icenter, -1);
  if (right.second && left.second)
    return std::numeric_limits<double>::infinity();
  return std::min(left.first, right.first);
}

SampledField conjugated_field(const SampledField& u, const FrameSpec& frame) {
  const ConjugatedFrame op(frame, u.grid, u.t);
  SampledField f = u;
  f.values = op.conjugate(u.values);
  return f;
}

ClaimTwoResult claim2_identity_check(const SampledField& u,
                                     const FrameSpec& frame,
                                     const NonlinearitySpec& nl,
                                     SpectralWorkspace& ws) {
  if (nl.is_complex())
    throw InvalidParameters("claim 2 identity applies to real models");
  const GridSpec& g = u.grid;
  const ConjugatedFrame op(frame, g, u.t);
  op.boundary_check(u.values);
  const cvec f = op.conjugate(u.values);
  const cvec fx = ws.derivative(g, f, 1);
  const double l = frame.lambda;
  const auto& w1 = op.theta_x(1);
  double lhs = 0.0, rhs = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double uv = u.values[i].real();
    const double fv = f[i].real();
    lhs += nl.a_real(uv) * (fx[i].real() - l * w1[i] * fv) * fv;
    const double ua = uv * uv * nl.alpha_integral(uv);
    if (ua != 0.0)
      rhs -= std::exp(2.0 * l * op.theta()[i]) * 2.0 * l * w1[i] * ua;
  }
  ClaimTwoResult out;
  out.lhs = lhs * g.dx();
  out.rhs = rhs * g.dx();
  out.lhs_over_lambda = std::abs(out.lhs) / l;
  return out;
}

ClaimThreeResult claim3_bound_check(const SampledField& u,
                                    const FrameSpec& frame,
                                    const NonlinearitySpec& nl,
                                    SpectralWorkspace& ws) {
  ClaimThreeResult out;
  if (u.l2_sq() == 0.0) {
    out.degenerate = true;
    return out;
  }
  const GridSpec& g = u.grid;
  const ConjugatedFrame op(frame, g, u.t);
  op.boundary_check(u.values);
  const double l = frame.lambda;
  const cvec f = op.conjugate(u.values);
  const cvec fx = ws.derivative(g, f, 1);
  const cvec ux = ws.derivative(g, u.values, 1);
  const auto& w1 = op.theta_x(1);

  out.m2 = u.l2_sq() + l2_sq(g, ux);
  out.m3 = m3_functional(u, frame.b, u.t);

  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double uv = u.values[i].real();
    const double fv = f[i].real();
    const double Fv = nl.a_real(uv) * (fx[i].real() - l * w1[i] * fv);
    num += Fv * Fv;
    den += op.phi0_second()[i] *
           (l * l * l * fv * fv + l * fx[i].real() * fx[i].real());
    const double r = std::abs(g.x(i) - frame.b * u.t);
    out.pointwise_max = std::max(out.pointwise_max,
                                 std::exp(0.5 * r) * uv * uv);
  }
  num *= g.dx();
  den *= g.dx();
  const double prefactor =
      (nl.M1 * nl.M1 / l) *
      (std::pow(std::sqrt(out.m2 * out.m3) + out.m3, 0.5 * nl.j) + 1.0);
  out.ratio = num / (prefactor * den);
  out.pointwise_bound = 2.0 * std::sqrt(out.m2 * out.m3) + 0.5 * out.m3;
  return out;
}

// ---------------------------------------------------------------------------
// time-integrated identities
// ---------------------------------------------------------------------------

WindowSpec WindowSpec::triangle(double center) {
  WindowSpec w;
  w.shape = Shape::triangle;
  w.center = center;
  w.a = center - 0.5;
  w.b = center + 0.5;
  return w;
}

WindowSpec WindowSpec::smooth_ramp(double t0, double t1) {
  if (!(t1 > t0 + 1.0))
    throw InvalidParameters("smooth ramp window needs t1 > t0 + 1");
  WindowSpec w;
  w.shape = Shape::smooth_ramp;
  w.a = t0;
  w.b = t1;
  return w;
}

double WindowSpec::eta(double t) const {
  if (shape == Shape::triangle) return 0.5 - std::abs(t - center);
  const double x = t - a;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

double WindowSpec::eta_prime(double t) const {
  if (shape == Shape::triangle) return t < center ? 1.0 : -1.0;
  const double x = t - a;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 30.0 * x * x * (1.0 - x) * (1.0 - x);
}

double WindowSpec::eta_second(double t) const {
  if (shape == Shape::triangle)
    throw InvalidParameters("triangle window second derivative is a point mass");
  const double x = t - a;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
}

namespace {

struct SampleSeries {
  std::vector<double> t, H, G, S2, Ff, FSf, total;
};

SampleSeries evaluate_series(const std::vector<SampledField>& us,
                             const FrameSpec& frame,
                             const NonlinearitySpec& nl,
                             SpectralWorkspace& ws) {
  SampleSeries s;
  const GridSpec& g = us.front().grid;
  for (const auto& u : us) {
    const ConjugatedFrame op(frame, g, u.t);
    const cvec f = op.conjugate(u.values);
    op.boundary_check(f);
    const cvec fx = ws.derivative(g, f, 1);
    const cvec Sf = op.apply_S(ws, f);
    const auto& w1 = op.theta_x(1);
    cvec F(g.n);
    for (int i = 0; i < g.n; ++i) {
      const double uv = u.values[i].real();
      F[i] = nl.a_real(uv) * (fx[i].real() - frame.lambda * w1[i] * f[i].real());
    }
    s.t.push_back(u.t);
    s.H.push_back(inner_real(g, f, f));
    s.G.push_back(inner_real(g, Sf, f));
    s.S2.push_back(inner_real(g, Sf, Sf));
    s.Ff.push_back(inner_real(g, F, f));
    s.FSf.push_back(inner_real(g, F, Sf));
    s.total.push_back(op.commutator_terms(ws, f).total);
  }
  return s;
}

// composite trapezoid over sample indices [i0, i1]
double trap(const std::vector<double>& t, const std::vector<double>& y,
            int i0, int i1) {
  double s = 0.0;
  for (int i = i0; i < i1; ++i)
    s += 0.5 * (y[i] + y[i + 1]) * (t[i + 1] - t[i]);
  return s;
}

int locate(const std::vector<double>& t, double value, double dt) {
  for (size_t i = 0; i < t.size(); ++i)
    if (std::abs(t[i] - value) < 1e-6 * std::max(dt, 1e-12)) return int(i);
  throw InsufficientCadence("window endpoint does not land on a stored sample");
}

}  // namespace

TimeIdentityResult time_identity_check(const std::vector<SampledField>& us,
                                       const FrameSpec& frame,
                                       const NonlinearitySpec& nl,
                                       const WindowSpec& window,
                                       SpectralWorkspace& ws) {
  if (us.size() < 8)
    throw InsufficientCadence("too few stored fields for the time quadrature");
  const double dt = us[1].t - us[0].t;
  SampleSeries s = evaluate_series(us, frame, nl, ws);

  const int ia = locate(s.t, window.a, dt);
  const int ib = locate(s.t, window.b, dt);
  if (ib <= ia + 4) throw InsufficientCadence("window too short");

  auto weighted = [&](const std::vector<double>& y,
                      auto&& weight) {
    std::vector<double> w(y.size(), 0.0);
    for (size_t i = 0; i < y.size(); ++i) w[i] = weight(s.t[i]) * y[i];
    return w;
  };

  double lhs = 0.0, rhs1 = 0.0, rhs2 = 0.0;
  double scale1 = 0.0, scale2 = 0.0;
  auto lhs_on = [&](int stride) {
    // int eta'(t) <S f, f> dt, split at the triangle kink
    if (window.shape == WindowSpec::Shape::triangle) {
      const int ic = locate(s.t, window.center, dt);
      double acc = 0.0;
      for (int i = ia; i < ic; i += stride)
        acc += 0.5 * (s.G[i] + s.G[i + stride]) * (s.t[i + stride] - s.t[i]);
      for (int i = ic; i < ib; i += stride)
        acc -= 0.5 * (s.G[i] + s.G[i + stride]) * (s.t[i + stride] - s.t[i]);
      return acc;
    }
    std::vector<double> w = weighted(s.G, [&](double t) {
      return window.eta_prime(t);
    });
    double acc = 0.0;
    for (int i = ia; i < ib; i += stride)
      acc += 0.5 * (w[i] + w[i + stride]) * (s.t[i + stride] - s.t[i]);
    return acc;
  };
  lhs = lhs_on(1);

  if (window.shape == WindowSpec::Shape::triangle) {
    const int ic = locate(s.t, window.center, dt);
    // boundary term -1/2 (eta' H)|_a^b = (H(a) + H(b)) / 2
    const double bnd = 0.5 * (s.H[ia] + s.H[ib]);
    const double point = -s.H[ic];  // distributional eta'' part
    double f_term = trap(s.t, s.Ff, ia, ic) - trap(s.t, s.Ff, ic, ib);
    rhs1 = bnd + point + f_term;
    scale1 = std::abs(bnd) + std::abs(point) + std::abs(f_term);
  } else {
    const std::vector<double> wF = weighted(s.Ff, [&](double t) {
      return window.eta_prime(t);
    });
    const std::vector<double> wH = weighted(s.H, [&](double t) {
      return window.eta_second(t);
    });
    const double bnd = -0.5 * (window.eta_prime(s.t[ib]) * s.H[ib] -
                               window.eta_prime(s.t[ia]) * s.H[ia]);
    const double f_term = trap(s.t, wF, ia, ib);
    const double h_term = 0.5 * trap(s.t, wH, ia, ib);
    rhs1 = bnd + f_term + h_term;
    scale1 = std::abs(bnd) + std::abs(f_term) + std::abs(h_term);
  }

  {
    const std::vector<double> wT = weighted(s.total, [&](double t) {
      return window.eta(t);
    });
    const std::vector<double> wS = weighted(s.S2, [&](double t) {
      return window.eta(t);
    });
    const std::vector<double> wFS = weighted(s.FSf, [&](double t) {
      return window.eta(t);
    });
    const double bnd =
        window.eta(s.t[ib]) * s.G[ib] - window.eta(s.t[ia]) * s.G[ia];
    const double c_term = trap(s.t, wT, ia, ib);
    const double s_term = 2.0 * trap(s.t, wS, ia, ib);
    const double f_term = -2.0 * trap(s.t, wFS, ia, ib);
    rhs2 = bnd + c_term + s_term + f_term;
    scale2 = std::abs(bnd) + std::abs(c_term) + std::abs(s_term) +
             std::abs(f_term);
  }

  // Richardson cadence estimate on the left-hand side when the window
  // midpoints align with a doubled stride.
  if ((ib - ia) % 2 == 0) {
    bool aligned = true;
    if (window.shape == WindowSpec::Shape::triangle) {
      const int ic = locate(s.t, window.center, dt);
      aligned = ((ic - ia) % 2 == 0);
    }
    if (aligned) {
      const double lhs2 = lhs_on(2);
      const double err = std::abs(lhs - lhs2) / 3.0;
      if (err > 2e-4 * std::max({scale1, scale2, std::abs(lhs)}))
        throw InsufficientCadence(
            "time quadrature error estimate exceeds tolerance");
    }
  }

  TimeIdentityResult out;
  out.scale_I = std::max(scale1, std::abs(lhs));
  out.scale_II = std::max(scale2, std::abs(lhs));
  out.residual_I = std::abs(lhs - rhs1) / std::max(out.scale_I, 1e-300);
  out.residual_II = std::abs(lhs - rhs2) / std::max(out.scale_II, 1e-300);
  return out;
}

double energy_rate_max_residual(const std::vector<SampledField>& us,
                                const FrameSpec& frame,
                                const NonlinearitySpec& nl,
                                SpectralWorkspace& ws) {
  if (us.size() < 5)
    throw InsufficientCadence("need at least five samples for the rate check");
  SampleSeries s = evaluate_series(us, frame, nl, ws);
  const double dt = s.t[1] - s.t[0];
  double worst = 0.0, scale = 0.0;
  for (size_t k = 2; k + 2 < s.t.size(); ++k) {
    const double dH = (-s.H[k + 2] + 8.0 * s.H[k + 1] - 8.0 * s.H[k - 1] +
                       s.H[k - 2]) /
                      (12.0 * dt);
    const double rhs = -2.0 * s.G[k] + 2.0 * s.Ff[k];
    worst = std::max(worst, std::abs(dH - rhs));
    scale = std::max(scale, std::abs(rhs));
  }
  return worst / std::max(scale, 1e-300);
}

}  // namespace gkdvlab
