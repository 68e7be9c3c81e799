#include "gkdvlab/solutions.hpp"

#include <algorithm>
#include <cmath>

#include "gkdvlab/spectral.hpp"

namespace gkdvlab {

// ---------------------------------------------------------------------------
// NonlinearitySpec
// ---------------------------------------------------------------------------

NonlinearitySpec NonlinearitySpec::pure_power(int j) {
  return pure_power_coeff(j, -double(j));
}

NonlinearitySpec NonlinearitySpec::pure_power_coeff(int j, double c) {
  if (j < 1) throw InvalidParameters("pure power j must be >= 1");
  NonlinearitySpec n;
  n.family = NonlinearityFamily::pure_power;
  n.j = j;
  n.coeff = c;
  n.M1 = std::abs(c);
  return n;
}

NonlinearitySpec NonlinearitySpec::gardner(double a1, double a2) {
  NonlinearitySpec n;
  n.family = NonlinearityFamily::gardner;
  n.j = 2;
  n.alpha1 = a1;
  n.alpha2 = a2;
  n.M1 = std::max(std::abs(a1), std::abs(a2));
  return n;
}

NonlinearitySpec NonlinearitySpec::mkdv() { return pure_power_coeff(2, -6.0); }

NonlinearitySpec NonlinearitySpec::complex_cubic() {
  NonlinearitySpec n;
  n.family = NonlinearityFamily::complex_cubic;
  n.j = 2;
  n.M1 = 1.0;
  return n;
}

NonlinearitySpec NonlinearitySpec::none() { return pure_power_coeff(1, 0.0); }

bool NonlinearitySpec::is_zero() const {
  switch (family) {
    case NonlinearityFamily::pure_power: return coeff == 0.0;
    case NonlinearityFamily::gardner: return alpha1 == 0.0 && alpha2 == 0.0;
    case NonlinearityFamily::complex_cubic: return false;
  }
  return false;
}

double NonlinearitySpec::a_real(double s) const {
  switch (family) {
    case NonlinearityFamily::pure_power: {
      double p = 1.0;
      for (int i = 0; i < j; ++i) p *= s;
      return coeff * p;
    }
    case NonlinearityFamily::gardner:
      return alpha1 * s + alpha2 * s * s;
    case NonlinearityFamily::complex_cubic:
      return -s * s;
  }
  return 0.0;
}

double NonlinearitySpec::a_of(const std::complex<double>& u) const {
  if (family == NonlinearityFamily::complex_cubic) return -std::norm(u);
  return a_real(u.real());
}

double NonlinearitySpec::alpha_integral(double s) const {
  switch (family) {
    case NonlinearityFamily::pure_power: {
      double p = 1.0;
      for (int i = 0; i < j; ++i) p *= s;
      return coeff * p / (j + 2);
    }
    case NonlinearityFamily::gardner:
      return alpha1 * s / 3.0 + alpha2 * s * s / 4.0;
    case NonlinearityFamily::complex_cubic:
      return -s * s / 4.0;
  }
  return 0.0;
}

bool NonlinearitySpec::bound_holds(double s) const {
  const double lhs = std::abs(a_real(s));
  const double as = std::abs(s);
  return lhs <= M1 * (as + std::pow(as, j)) * (1.0 + 1e-12) + 1e-300;
}

std::string NonlinearitySpec::name() const {
  switch (family) {
    case NonlinearityFamily::pure_power:
      return "pure_power(j=" + std::to_string(j) +
             ",c=" + std::to_string(coeff) + ")";
    case NonlinearityFamily::gardner:
      return "gardner(" + std::to_string(alpha1) + "," +
             std::to_string(alpha2) + ")";
    case NonlinearityFamily::complex_cubic:
      return "complex_cubic";
  }
  return "?";
}

bool NonlinearitySpec::same_function(const NonlinearitySpec& o) const {
  if ((family == NonlinearityFamily::complex_cubic) !=
      (o.family == NonlinearityFamily::complex_cubic))
    return false;
  if (family == NonlinearityFamily::complex_cubic) return true;
  // Compare as polynomials in u: c1 u + c2 u^2 + cj u^j.
  auto canon = [](const NonlinearitySpec& n, int deg) {
    if (n.family == NonlinearityFamily::gardner)
      return deg == 1 ? n.alpha1 : (deg == 2 ? n.alpha2 : 0.0);
    return deg == n.j ? n.coeff : 0.0;
  };
  const int maxdeg = std::max({2, j, o.j});
  for (int d = 1; d <= maxdeg; ++d)
    if (std::abs(canon(*this, d) - canon(o, d)) > 1e-12) return false;
  return true;
}

// ---------------------------------------------------------------------------
// SolutionSpec
// ---------------------------------------------------------------------------

SolutionSpec SolutionSpec::gkdv_soliton(int j, double lambda, double x0) {
  SolutionSpec s{SolutionKind::gkdv_soliton, lambda, 0.0, j, x0};
  s.validate();
  return s;
}
SolutionSpec SolutionSpec::mkdv_soliton(double lambda, double x0) {
  SolutionSpec s{SolutionKind::mkdv_soliton, lambda, 0.0, 1, x0};
  s.validate();
  return s;
}
SolutionSpec SolutionSpec::mkdv_breather(double lambda, double mu, double x0) {
  SolutionSpec s{SolutionKind::mkdv_breather, lambda, mu, 1, x0};
  s.validate();
  return s;
}
SolutionSpec SolutionSpec::complex_breather(double lambda, double mu,
                                            double x0) {
  SolutionSpec s{SolutionKind::complex_breather, lambda, mu, 1, x0};
  s.validate();
  return s;
}

void SolutionSpec::validate() const {
  if (!(lambda > 0.0))
    throw InvalidParameters("solution lambda must be positive");
  if ((kind == SolutionKind::mkdv_breather ||
       kind == SolutionKind::complex_breather) &&
      !(mu > 0.0))
    throw InvalidParameters("breather mu must be positive");
  if (kind == SolutionKind::gkdv_soliton && j < 1)
    throw InvalidParameters("gkdv soliton power j must be >= 1");
}

double SolutionSpec::envelope_speed() const {
  switch (kind) {
    case SolutionKind::gkdv_soliton:
    case SolutionKind::mkdv_soliton:
      return lambda * lambda;
    case SolutionKind::mkdv_breather:
      // envelope argument lambda (x + gamma t), gamma = 3 mu^2 - lambda^2
      return lambda * lambda - 3.0 * mu * mu;
    case SolutionKind::complex_breather:
      return lambda * lambda - 3.0 * mu * mu;
  }
  return 0.0;
}

NonlinearitySpec SolutionSpec::matching_nonlinearity() const {
  switch (kind) {
    case SolutionKind::gkdv_soliton:
      // The sech^{2/j} profile solves the traveling-wave equation for
      // a(u) = -(j+1) u^j (profile normalization fixes the coefficient).
      return NonlinearitySpec::pure_power_coeff(j, -double(j + 1));
    case SolutionKind::mkdv_soliton:
    case SolutionKind::mkdv_breather:
      return NonlinearitySpec::mkdv();
    case SolutionKind::complex_breather:
      return NonlinearitySpec::complex_cubic();
  }
  return NonlinearitySpec::none();
}

std::string SolutionSpec::name() const {
  switch (kind) {
    case SolutionKind::gkdv_soliton: return "gkdv_soliton";
    case SolutionKind::mkdv_soliton: return "mkdv_soliton";
    case SolutionKind::mkdv_breather: return "mkdv_breather";
    case SolutionKind::complex_breather: return "complex_breather";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

double sech_stable(double z) {
  const double a = std::abs(z);
  const double e = std::exp(-a);
  return 2.0 * e / (1.0 + e * e);
}

namespace {

// Breather building block: value plus partials with respect to the envelope
// argument xi = lambda(x + gamma t) and the phase Phi.
struct BreatherParts {
  double u, du_dxi, du_dphi;
};

BreatherParts breather_parts(double lambda, double mu, double xi, double phi) {
  const double a = lambda / mu;
  const double S = sech_stable(xi);
  const double T = std::tanh(xi);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double N = cp - a * sp * T;
  const double D = 1.0 + a * a * sp * sp * S * S;
  const double S_xi = -S * T;
  const double N_xi = -a * sp * S * S;
  const double D_xi = -2.0 * a * a * sp * sp * S * S * T;
  const double N_phi = -sp - a * cp * T;
  const double D_phi = 2.0 * a * a * sp * cp * S * S;
  BreatherParts p;
  p.u = 2.0 * lambda * S * N / D;
  p.du_dxi =
      2.0 * lambda * (S_xi * N / D + S * N_xi / D - S * N * D_xi / (D * D));
  p.du_dphi = 2.0 * lambda * S * (N_phi / D - N * D_phi / (D * D));
  return p;
}

double gkdv_profile(int j, double z) {
  // ((j+2)/2 sech^2(j z / 2))^{1/j}
  const double s = sech_stable(0.5 * j * z);
  return std::pow(0.5 * (j + 2) * s * s, 1.0 / j);
}

}  // namespace

std::complex<double> evaluate(const SolutionSpec& spec, double x, double t) {
  spec.validate();
  const double l = spec.lambda;
  switch (spec.kind) {
    case SolutionKind::mkdv_soliton: {
      const double z = l * (x - spec.x0 - l * l * t);
      return l * sech_stable(z);
    }
    case SolutionKind::gkdv_soliton: {
      const double z = l * (x - spec.x0 - l * l * t);
      return std::pow(l, 2.0 / spec.j) * gkdv_profile(spec.j, z);
    }
    case SolutionKind::mkdv_breather: {
      const double mu = spec.mu;
      const double gamma = 3.0 * mu * mu - l * l;
      const double delta = mu * mu - 3.0 * l * l;
      const double xi = l * (x - spec.x0 + gamma * t);
      const double phi = mu * (x - spec.x0 + delta * t) - std::atan(l / mu);
      return breather_parts(l, mu, xi, phi).u;
    }
    case SolutionKind::complex_breather: {
      const double mu = spec.mu;
      const double v = l * l - 3.0 * mu * mu;
      const double alpha = mu * (x - spec.x0) - t * mu * (3.0 * l * l - mu * mu);
      const double env = std::sqrt(6.0) * l * sech_stable(l * (x - spec.x0 - v * t));
      return std::polar(env, alpha);
    }
  }
  return 0.0;
}

std::complex<double> evaluate_dt(const SolutionSpec& spec, double x, double t) {
  const double l = spec.lambda;
  switch (spec.kind) {
    case SolutionKind::mkdv_soliton: {
      const double z = l * (x - spec.x0 - l * l * t);
      return l * l * l * l * sech_stable(z) * std::tanh(z);
    }
    case SolutionKind::gkdv_soliton: {
      const double z = l * (x - spec.x0 - l * l * t);
      // d/dx of the profile is -profile * tanh(j z / 2)
      return std::pow(l, 2.0 / spec.j + 3.0) * gkdv_profile(spec.j, z) *
             std::tanh(0.5 * spec.j * z);
    }
    case SolutionKind::mkdv_breather: {
      const double mu = spec.mu;
      const double gamma = 3.0 * mu * mu - l * l;
      const double delta = mu * mu - 3.0 * l * l;
      const double xi = l * (x - spec.x0 + gamma * t);
      const double phi = mu * (x - spec.x0 + delta * t) - std::atan(l / mu);
      const BreatherParts p = breather_parts(l, mu, xi, phi);
      return l * gamma * p.du_dxi + mu * delta * p.du_dphi;
    }
    case SolutionKind::complex_breather: {
      const double mu = spec.mu;
      const double v = l * l - 3.0 * mu * mu;
      const std::complex<double> u = evaluate(spec, x, t);
      const double z = l * (x - spec.x0 - v * t);
      return u * (std::complex<double>(0.0, -mu * (3.0 * l * l - mu * mu)) +
                  std::complex<double>(l * v * std::tanh(z), 0.0));
    }
  }
  return 0.0;
}

SampledField sample(const SolutionSpec& spec, const GridSpec& grid, double t) {
  SampledField f = zero_field(grid, t);
  for (int i = 0; i < grid.n; ++i) f.values[i] = evaluate(spec, grid.x(i), t);
  return f;
}

double pde_residual_sup(const cvec& u, const cvec& u_t,
                        const NonlinearitySpec& nl, const GridSpec& grid,
                        SpectralWorkspace& ws) {
  const cvec ux = ws.derivative(grid, u, 1);
  const cvec uxxx = ws.derivative(grid, u, 3);
  double sup = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    const std::complex<double> res = u_t[i] + uxxx[i] - nl.a_of(u[i]) * ux[i];
    sup = std::max(sup, std::abs(res));
  }
  return sup;
}

double residual_sup(const SolutionSpec& spec, const NonlinearitySpec& nl,
                    const GridSpec& grid, double t, SpectralWorkspace& ws) {
  if (!spec.matching_nonlinearity().same_function(nl))
    throw MismatchedPair("nonlinearity " + nl.name() +
                         " does not match solution " + spec.name());
  SampledField u = sample(spec, grid, t);
  const double umax = u.max_abs();
  double edge = 0.0;
  for (int i = 0; i < 4; ++i) {
    edge = std::max(edge, std::abs(u.values[i]));
    edge = std::max(edge, std::abs(u.values[grid.n - 1 - i]));
  }
  if (edge > 1e-12 * umax)
    throw BoundaryLeak("solution tails touch the grid boundary");
  cvec ut(grid.n);
  for (int i = 0; i < grid.n; ++i) ut[i] = evaluate_dt(spec, grid.x(i), t);
  return pde_residual_sup(u.values, ut, nl, grid, ws);
}

double tail_decay_rate(const SolutionSpec& spec, double t, double r_lo,
                       double r_hi) {
  if (!(0.0 < r_lo && r_lo < r_hi))
    throw InvalidParameters("tail fit window must satisfy 0 < r_lo < r_hi");
  const double center = spec.envelope_center(t);
  const double total = r_hi - r_lo;
  // Block maxima: each block wide enough to contain one oscillation crest.
  double block = total / 24.0;
  if (spec.kind == SolutionKind::mkdv_breather)
    block = std::max(block, 1.2 * M_PI / spec.mu);
  const int nblocks = static_cast<int>(total / block);
  if (nblocks < 4)
    throw InvalidParameters("tail fit window too short for the oscillation");

  std::vector<double> pos, logv;
  const int per_block = 256;
  for (int b = 0; b < nblocks; ++b) {
    double best = -1.0, best_r = 0.0;
    for (int i = 0; i < per_block; ++i) {
      const double r = r_lo + (b + double(i) / per_block) * block;
      const double v = std::abs(evaluate(spec, center + r, t));
      if (v > best) {
        best = v;
        best_r = r;
      }
    }
    if (best < 1e-300)
      throw UnderflowWindow("tail window reaches underflow range");
    pos.push_back(best_r);
    logv.push_back(std::log(best));
  }
  // least squares slope
  const int n = static_cast<int>(pos.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += pos[i];
    sy += logv[i];
    sxx += pos[i] * pos[i];
    sxy += pos[i] * logv[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

}  // namespace gkdvlab
