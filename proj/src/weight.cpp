#include "gkdvlab/weight.hpp"

#include <algorithm>
#include <cmath>

namespace gkdvlab {

namespace {

constexpr double kBlendLo = 1.5;
constexpr double kBlendHi = 2.0;
constexpr double kBlendLen = kBlendHi - kBlendLo;
const double kLog2Over4 = std::log(2.0) / 4.0;
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// ---- small polynomial helpers (monomial basis, Horner) ----

double poly_eval(const double* c, int deg, double x) {
  double y = c[deg];
  for (int i = deg - 1; i >= 0; --i) y = y * x + c[i];
  return y;
}

// coefficients of the derivative polynomial
void poly_derive(const double* c, int deg, double* out) {
  for (int i = 1; i <= deg; ++i) out[i - 1] = i * c[i];
}

// ---- Gauss-Legendre nodes on [-1,1], generated by Newton iteration ----

struct GaussRule {
  std::array<double, 32> node{};
  std::array<double, 32> weight{};
};

const GaussRule& gauss32() {
  static const GaussRule rule = [] {
    GaussRule r;
    const int n = 32;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      r.node[i] = x;
      r.weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }();
  return rule;
}

// ---- closed-form tail: phi0'(r) = 2 - log2/(4 log r) for r >= 2 ----
// Orders 7 and 8 are used only to raise the junction smoothness of the
// blend; the public evaluator stops at order 6.

double tail_deriv(int order, double r) {
  const double L = std::log(r);
  const double K = kLog2Over4;
  switch (order) {
    case 1:
      return 2.0 - K / L;
    case 2:
      return K / (r * L * L);
    case 3:
      return -K * (L + 2.0) / (r * r * L * L * L);
    case 4:
      return K * (2 * L * L + 6 * L + 6) / (r * r * r * L * L * L * L);
    case 5:
      return -K * (6 * L * L * L + 22 * L * L + 36 * L + 24) /
             (r * r * r * r * L * L * L * L * L);
    case 6:
      return K * (24 * L * L * L * L + 100 * L * L * L + 210 * L * L +
                  240 * L + 120) /
             (r * r * r * r * r * L * L * L * L * L * L);
    case 7:
      return -2.0 * K *
             (60 * std::pow(L, 5) + 274 * std::pow(L, 4) +
              675 * std::pow(L, 3) + 1020 * L * L + 900 * L + 360) /
             (std::pow(r, 6) * std::pow(L, 7));
    case 8:
      return 24.0 * K *
             (30 * std::pow(L, 6) + 147 * std::pow(L, 5) +
              406 * std::pow(L, 4) + 735 * std::pow(L, 3) + 875 * L * L +
              630 * L + 210) /
             (std::pow(r, 7) * std::pow(L, 8));
    default:
      return 0.0;
  }
}

// Exponential integral Ei(x) for x > 0 (series; all terms positive).
double expint_ei(double x) {
  double sum = kEulerGamma + std::log(x);
  double p = 1.0;
  for (int n = 1; n < 200; ++n) {
    p *= x / n;
    const double term = p / n;
    sum += term;
    if (term < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Logarithmic integral li(r) = Ei(log r), r > 1.
double logint(double r) { return expint_ei(std::log(r)); }

// Dense linear solve with partial pivoting (tiny KKT systems).
void solve_linear(int n, std::vector<double>& M, std::vector<double>& rhs) {
  auto at = [&](int r, int c) -> double& { return M[r * n + c]; };
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(at(r, c)) > std::abs(at(piv, c))) piv = r;
    if (piv != c) {
      for (int k = 0; k < n; ++k) std::swap(at(c, k), at(piv, k));
      std::swap(rhs[c], rhs[piv]);
    }
    for (int r = c + 1; r < n; ++r) {
      const double f = at(r, c) / at(c, c);
      for (int k = c; k < n; ++k) at(r, k) -= f * at(c, k);
      rhs[r] -= f * rhs[c];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int k = r + 1; k < n; ++k) s -= at(r, k) * rhs[k];
    rhs[r] = s / at(r, r);
  }
}

constexpr double kBinom[7][7] = {
    {1, 0, 0, 0, 0, 0, 0},  {1, 1, 0, 0, 0, 0, 0},  {1, 2, 1, 0, 0, 0, 0},
    {1, 3, 3, 1, 0, 0, 0},  {1, 4, 6, 4, 1, 0, 0},  {1, 5, 10, 10, 5, 1, 0},
    {1, 6, 15, 20, 15, 6, 1}};

// d^k/dtau^k of tau^7 (tau-1)^m by Leibniz, k <= 6.
double mode_deriv(int m, double tau, int k) {
  double sum = 0.0;
  for (int j = 0; j <= k; ++j) {
    double fj = 1.0;  // (tau^7)^(j) coefficient 7!/(7-j)!
    for (int i = 0; i < j; ++i) fj *= (7 - i);
    fj *= std::pow(tau, 7 - j);
    const int l = k - j;
    if (l > m) continue;
    double gl = 1.0;  // ((tau-1)^m)^(l)
    for (int i = 0; i < l; ++i) gl *= (m - i);
    gl *= std::pow(tau - 1.0, m - l);
    sum += kBinom[k][j] * fj * gl;
  }
  return sum;
}

// int_0^1 tau^7 (tau-1)^m dtau = (-1)^m 7! m! / (m+8)!
double mode_integral(int m) {
  double v = 1.0;
  for (int i = 1; i <= 7; ++i) v *= i;        // 7!
  for (int i = m + 8; i > m; --i) v /= i;     // / ((m+8)...(m+1))
  return (m % 2 ? -1.0 : 1.0) * v;
}

}  // namespace

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

WeightProfile WeightProfile::build(double scale) {
  if (scale != 1.0 && scale != 0.25)
    throw InvalidParameters("weight scale must be 1 or 1/4");

  WeightProfile w;
  w.scale_ = scale;

  // Hermite data for g = phi0'' on [0,1] (tau units): value 1 and six zero
  // derivatives on the left, closed-form data through order six on the
  // right (two orders beyond what C6 of phi0 requires; the extra junction
  // smoothness keeps grid quadratures of the commutator terms clean). With
  // g = 1 + tau^7 Q(tau), Q in powers of (tau - 1), the left conditions
  // hold identically and the right ones solve triangularly (Leibniz on
  // tau^7 Q at tau = 1).
  double target[7];
  target[0] = tail_deriv(2, kBlendHi) - 1.0;
  for (int k = 1; k <= 6; ++k)
    target[k] = tail_deriv(2 + k, kBlendHi) * std::pow(kBlendLen, k);
  // (tau^7)^(j)(1) = 7!/(7-j)!
  const double u1 = 7, u2 = 42, u3 = 210, u4 = 840, u5 = 2520, u6 = 5040;
  const double uj[7] = {1, u1, u2, u3, u4, u5, u6};
  double fact[7] = {1, 1, 2, 6, 24, 120, 720};
  for (int k = 0; k <= 6; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j)
      s += kBinom[k][j] * uj[j] * fact[k - j] * w.q_[k - j];
    w.q_[k] = (target[k] - s) / fact[k];
  }

  // Pick the eight correction-mode amplitudes by a small QP: minimize the
  // bending energy int (g''')^2 + 0.01 int (g'''')^2 subject to the exact
  // blend integral (int_0^1 g = 1/2, so the scaled blend integrates to 1/4)
  // and a strict-decrease margin g'(tau_k) <= -0.01 on collocation points.
  // The correction modes tau^7 (tau - 1)^{7+i} leave both junction jets
  // untouched through order six.
  {
    constexpr int kModes = 5;
    constexpr double kW4 = 0.01;
    const GaussRule& gr = gauss32();
    w.p_.fill(0.0);  // jet-only evaluation during assembly

    double A[kModes][kModes] = {};
    double bvec[kModes] = {};
    for (int gq = 0; gq < 32; ++gq) {
      const double tau = 0.5 * (gr.node[gq] + 1.0);
      const double wt = 0.5 * gr.weight[gq];
      double e3[kModes], e4[kModes];
      for (int i = 0; i < kModes; ++i) {
        e3[i] = mode_deriv(7 + i, tau, 3);
        e4[i] = mode_deriv(7 + i, tau, 4);
      }
      const double h3 = w.blend_g(tau, 3), h4 = w.blend_g(tau, 4);
      for (int i = 0; i < kModes; ++i) {
        bvec[i] += wt * (h3 * e3[i] + kW4 * h4 * e4[i]);
        for (int j = 0; j < kModes; ++j)
          A[i][j] += wt * (e3[i] * e3[j] + kW4 * e4[i] * e4[j]);
      }
    }
    // Column scaling keeps the nearly collinear high-power modes from
    // wrecking the KKT conditioning; the small ridge keeps the minimizer
    // off the near-null directions (large mutually cancelling amplitudes).
    double colscale[kModes];
    for (int i = 0; i < kModes; ++i) colscale[i] = std::sqrt(A[i][i]);
    for (int i = 0; i < kModes; ++i) {
      bvec[i] /= colscale[i];
      for (int j = 0; j < kModes; ++j)
        A[i][j] /= colscale[i] * colscale[j];
    }
    for (int i = 0; i < kModes; ++i) A[i][i] += 1e-3;

    double ceq[kModes];
    for (int i = 0; i < kModes; ++i)
      ceq[i] = mode_integral(7 + i) / colscale[i];
    double int_jet = 1.0;
    for (int i = 0; i <= 6; ++i) int_jet += w.q_[i] * mode_integral(i);
    const double deq = 0.5 - int_jet;

    // slope constraints
    constexpr int kColl = 35;
    double G[kColl][kModes], hvec[kColl];
    for (int k = 0; k < kColl; ++k) {
      const double tau = 0.30 + 0.02 * k;
      for (int i = 0; i < kModes; ++i)
        G[k][i] = mode_deriv(7 + i, tau, 1) / colscale[i];
      hvec[k] = -0.01 - w.blend_g(tau, 1);
    }

    std::vector<int> active;
    double p[kModes] = {};
    for (int it = 0; it < 200; ++it) {
      const int m = static_cast<int>(active.size());
      const int dim = kModes + 1 + m;
      std::vector<double> K(dim * dim, 0.0), rhs(dim, 0.0);
      for (int i = 0; i < kModes; ++i) {
        rhs[i] = -bvec[i];
        for (int j = 0; j < kModes; ++j) K[i * dim + j] = A[i][j];
        K[i * dim + kModes] = ceq[i];
        K[kModes * dim + i] = ceq[i];
      }
      rhs[kModes] = deq;
      for (int a = 0; a < m; ++a) {
        for (int i = 0; i < kModes; ++i) {
          K[i * dim + (kModes + 1 + a)] = G[active[a]][i];
          K[(kModes + 1 + a) * dim + i] = G[active[a]][i];
        }
        rhs[kModes + 1 + a] = hvec[active[a]];
      }
      solve_linear(dim, K, rhs);
      for (int i = 0; i < kModes; ++i) p[i] = rhs[i];

      // drop a constraint pushing the wrong way
      int drop = -1;
      double most_negative = -1e-12;
      for (int a = 0; a < m; ++a) {
        if (rhs[kModes + 1 + a] < most_negative) {
          most_negative = rhs[kModes + 1 + a];
          drop = a;
        }
      }
      if (drop >= 0) {
        active.erase(active.begin() + drop);
        continue;
      }
      // add the most violated slope constraint (violation: G p - h > 0)
      int worst = -1;
      double worst_resid = 1e-11;
      for (int k = 0; k < kColl; ++k) {
        double gk = -hvec[k];
        for (int i = 0; i < kModes; ++i) gk += G[k][i] * p[i];
        if (gk > worst_resid &&
            std::find(active.begin(), active.end(), k) == active.end()) {
          worst_resid = gk;
          worst = k;
        }
      }
      if (worst < 0) break;
      active.push_back(worst);
      std::sort(active.begin(), active.end());
    }

    // polish the integral constraint exactly along the constraint normal
    double cp = 0.0, cc = 0.0;
    for (int i = 0; i < kModes; ++i) {
      cp += ceq[i] * p[i];
      cc += ceq[i] * ceq[i];
    }
    const double shift = (deq - cp) / cc;
    for (int i = 0; i < kModes; ++i) p[i] += shift * ceq[i];
    // undo the column scaling
    for (int i = 0; i < kModes; ++i) w.p_[i] = p[i] / colscale[i];
  }

  // Validate positivity, range and strict monotonicity of the blend. Near
  // the flat junction the decrease per grid step is below one ulp, so
  // monotonicity is checked through the sign of the derivative.
  if (std::abs(w.blend_g(0.0, 0) - 1.0) > 1e-14)
    throw ConstructionFailed("blend does not start at 1");
  double prev = w.blend_g(0.0, 0);
  for (int i = 1; i <= 4000; ++i) {
    const double tau = i / 4000.0;
    const double g = w.blend_g(tau, 0);
    if (!(g > 0.0) || g > 1.0 + 1e-14)
      throw ConstructionFailed("blend violates 0 < phi0'' <= 1");
    if (g > prev || !(w.blend_g(tau, 1) < 0.0))
      throw ConstructionFailed("blend is not strictly decreasing");
    prev = g;
  }

  w.phi_at_2_ = 2.125 + 1.5 * kBlendLen + kBlendLen * kBlendLen * w.blend_int2(1.0);
  w.li_2_ = logint(2.0);

  w.blend_.assign(w.q_.begin(), w.q_.end());
  w.blend_.insert(w.blend_.end(), w.p_.begin(), w.p_.end());

  // Measured constants from the default audit grid.
  const WeightAudit a = w.audit(100.0, 1e-3);
  if (!a.pass()) {
    std::string which;
    auto note = [&which](const char* name, const AuditCheck& c) {
      if (!c.pass)
        which += std::string(which.empty() ? "" : ", ") + name + " at r=" +
                 std::to_string(c.worst_r) + " (" +
                 std::to_string(c.worst_value) + ")";
    };
    note("positivity", a.positive);
    note("phi0' low", a.first_deriv_low);
    note("phi0' high", a.first_deriv_high);
    note("phi0'' range", a.second_range);
    note("phi0'' monotone", a.second_monotone);
    note("high-order domination", a.high_order);
    note("exp lower bound", a.exp_lower);
    note("junction continuity", a.junctions);
    note("blend integral", a.integral);
    throw ConstructionFailed("constructed weight fails its audit: " + which);
  }
  w.c0_ = a.c0;
  w.C0_ = a.C0;
  return w;
}

// ---------------------------------------------------------------------------
// blend evaluation: g = H(psi(tau)), psi = tau + c m(tau)
// ---------------------------------------------------------------------------

double WeightProfile::blend_g(double tau, int dtau) const {
  if (dtau < 0 || dtau > 6)
    throw UnsupportedOrder("blend derivative order > 6");
  // jet part 1 + tau^7 Q(tau), Q in powers of (tau - 1); Leibniz on the
  // product keeps both junction jets exact to round-off.
  const double x = tau;
  const double d = x - 1.0;
  // Q^{(l)}(tau) for l = 0..6, Horner in d
  double Q[7] = {};
  for (int l = 0; l <= 6; ++l) {
    double acc = 0.0;
    for (int i = 6; i >= l; --i) {
      double coef = q_[i];
      for (int f = i; f > i - l; --f) coef *= f;
      acc = acc * d + coef;
    }
    Q[l] = acc;
  }
  double u[7];
  for (int j = 0; j <= 6; ++j) {
    double fj = 1.0;
    for (int i = 0; i < j; ++i) fj *= (7 - i);
    u[j] = fj * std::pow(x, 7 - j);
  }
  double value = (dtau == 0) ? 1.0 : 0.0;
  for (int j = 0; j <= dtau; ++j)
    value += kBinom[dtau][j] * u[j] * Q[dtau - j];

  // correction part factored as B(tau) R(tau), B = tau^7 (tau-1)^7: keeps
  // every Leibniz factor small so the amplitudes never amplify round-off
  double R[7] = {};
  for (int l = 0; l <= dtau; ++l) {
    double acc = 0.0;
    for (int i = 4; i >= l; --i) {
      double coef = p_[i];
      for (int f = i; f > i - l; --f) coef *= f;
      acc = acc * d + coef;
    }
    R[l] = acc;
  }
  double B[7];
  for (int j = 0; j <= dtau; ++j) {
    double acc = 0.0;
    for (int a = 0; a <= j; ++a) {
      double fa = 1.0;
      for (int i = 0; i < a; ++i) fa *= (7 - i);
      double gb = 1.0;
      for (int i = 0; i < j - a; ++i) gb *= (7 - i);
      acc += kBinom[j][a] * fa * std::pow(x, 7 - a) * gb *
             std::pow(d, 7 - (j - a));
    }
    B[j] = acc;
  }
  for (int j = 0; j <= dtau; ++j)
    value += kBinom[dtau][j] * B[j] * R[dtau - j];
  return value;
}

double WeightProfile::blend_int1(double tau) const {
  if (tau == 0.0) return 0.0;
  const GaussRule& gr = gauss32();
  double s = 0.0;
  for (int i = 0; i < 32; ++i)
    s += gr.weight[i] * blend_g(0.5 * tau * (gr.node[i] + 1.0), 0);
  return 0.5 * tau * s;
}

double WeightProfile::blend_int2(double tau) const {
  if (tau == 0.0) return 0.0;
  const GaussRule& gr = gauss32();
  double s = 0.0;
  for (int i = 0; i < 32; ++i)
    s += gr.weight[i] * blend_int1(0.5 * tau * (gr.node[i] + 1.0));
  return 0.5 * tau * s;
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

double WeightProfile::piece_value(int piece, int order, double r) const {
  switch (piece) {
    case 0:  // r in [0, 3/2]: phi0 = 1 + r^2/2
      switch (order) {
        case 0: return 1.0 + 0.5 * r * r;
        case 1: return r;
        case 2: return 1.0;
        default: return 0.0;
      }
    case 1: {  // blend
      const double tau = (r - kBlendLo) / kBlendLen;
      if (order == 0)
        return 2.125 + 1.5 * (r - kBlendLo) +
               kBlendLen * kBlendLen * blend_int2(tau);
      if (order == 1) return 1.5 + kBlendLen * blend_int1(tau);
      return blend_g(tau, order - 2) / std::pow(kBlendLen, order - 2);
    }
    default:  // tail r >= 2
      if (order == 0)
        return phi_at_2_ + 2.0 * (r - kBlendHi) -
               kLog2Over4 * (logint(r) - li_2_);
      return tail_deriv(order, r);
  }
}

double WeightProfile::phi0_derivative(int order, double r) const {
  if (order < 0 || order > 6)
    throw UnsupportedOrder("weight derivative order must be in 0..6");
  const double a = std::abs(r);
  double v;
  if (a <= kBlendLo)
    v = piece_value(0, order, a);
  else if (a < kBlendHi)
    v = piece_value(1, order, a);
  else
    v = piece_value(2, order, a);
  // phi0 is even: odd-order derivatives are odd functions.
  if (r < 0.0 && (order % 2) == 1) v = -v;
  return v;
}

double WeightProfile::derivative(int order, double r) const {
  return scale_ * phi0_derivative(order, r);
}

double WeightProfile::junction_mismatch(double r0, int order) const {
  if (r0 == kBlendLo)
    return std::abs(piece_value(0, order, r0) - piece_value(1, order, r0));
  return std::abs(piece_value(1, order, r0) - piece_value(2, order, r0));
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

WeightAudit audit_grid(const std::function<double(int, double)>& eval,
                       double r_max, double step) {
  WeightAudit a;
  auto fail_at = [](AuditCheck& c, double r, double v) {
    if (c.pass) {
      c.pass = false;
      c.worst_r = r;
      c.worst_value = v;
    }
  };
  auto track_max = [](AuditCheck& c, double r, double v) {
    if (v > c.worst_value) {
      c.worst_value = v;
      c.worst_r = r;
    }
  };

  const long npts = std::lround(r_max / step);
  double prev_second = 0.0;
  bool have_prev = false;
  for (long i = 0; i <= npts; ++i) {
    const double r = i * step;
    const double p0 = eval(0, r);
    const double p1 = eval(1, r);
    const double p2 = eval(2, r);

    if (!(p0 > 0.0)) fail_at(a.positive, r, p0);

    if (r <= 1.5 && std::abs(p1 - r) > 1e-12)
      fail_at(a.first_deriv_low, r, p1 - r);
    if (r >= 2.0) {
      const double want = 2.0 - std::log(2.0) / (4.0 * std::log(r));
      if (std::abs(p1 - want) > 1e-12) fail_at(a.first_deriv_high, r, p1 - want);
    }

    if (!(p2 > 0.0) || p2 > 1.0 + 1e-14) fail_at(a.second_range, r, p2);
    if (have_prev && r > 1.5 + 0.5 * step) {
      if (!(p2 < prev_second)) fail_at(a.second_monotone, r, p2 - prev_second);
    }
    if (r > 1.5 - 0.5 * step) {
      prev_second = p2;
      have_prev = true;
    }

    if (p2 > 0.0) {
      for (int k = 3; k <= 6; ++k)
        track_max(a.high_order, r, std::abs(eval(k, r)) / p2);
      track_max(a.exp_lower, r, std::exp(-0.5 * r) / p2);
    }
  }
  a.c0 = a.high_order.worst_value;
  a.C0 = a.exp_lower.worst_value;
  a.high_order.pass = a.high_order.pass && std::isfinite(a.c0);
  a.exp_lower.pass = a.exp_lower.pass && std::isfinite(a.C0);
  return a;
}

WeightAudit WeightProfile::audit(double r_max, double step) const {
  if (r_max < 10.0 || step > 1e-2)
    throw InvalidParameters("audit requires r_max >= 10 and step <= 1e-2");
  WeightAudit a = audit_grid(
      [this](int k, double r) { return phi0_derivative(k, r); }, r_max, step);

  for (double r0 : {kBlendLo, kBlendHi}) {
    for (int k = 0; k <= 6; ++k) {
      const double d = junction_mismatch(r0, k);
      if (d > a.junctions.worst_value) {
        a.junctions.worst_value = d;
        a.junctions.worst_r = r0;
      }
    }
  }
  a.junctions.pass = a.junctions.worst_value <= 1e-10;

  // Independent quadrature of the blend: composite Simpson, 4096 panels.
  const int panels = 4096;
  const double h = kBlendLen / panels;
  double simpson = phi0_derivative(2, kBlendLo) + phi0_derivative(2, kBlendHi);
  for (int i = 1; i < panels; ++i)
    simpson += (i % 2 ? 4.0 : 2.0) * phi0_derivative(2, kBlendLo + i * h);
  simpson *= h / 3.0;
  a.integral_value = simpson;
  a.integral.worst_value = std::abs(simpson - 0.25);
  a.integral.pass = a.integral.worst_value <= 1e-10;
  return a;
}

}  // namespace gkdvlab
