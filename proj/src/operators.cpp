#include "gkdvlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

namespace gkdvlab {

FrameSpec FrameSpec::make(double lambda, double b) {
  if (!(lambda >= 1.0))
    throw InvalidParameters("frame lambda must be >= 1");
  const double scale = (b >= 1.5 * lambda * lambda) ? 0.25 : 1.0;
  return FrameSpec{lambda, b, WeightProfile::build(scale)};
}

ConjugatedFrame::ConjugatedFrame(const FrameSpec& frame, const GridSpec& grid,
                                 double t)
    : frame_(frame), grid_(grid), t_(t) {
  grid.validate(false);
  theta_.resize(grid.n);
  phi0_second_.resize(grid.n);
  for (auto& w : w_) w.resize(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double s = grid.x(i) - frame.b * t;
    theta_[i] = frame.weight.derivative(0, s);
    for (int k = 1; k <= 6; ++k) w_[k - 1][i] = frame.weight.derivative(k, s);
    phi0_second_[i] = frame.weight.phi0_derivative(2, s);
  }
}

cvec ConjugatedFrame::conjugate(const cvec& u) const {
  cvec f(u.size());
  for (size_t i = 0; i < u.size(); ++i)
    f[i] = u[i] * std::exp(frame_.lambda * theta_[i]);
  return f;
}

cvec ConjugatedFrame::deconjugate(const cvec& f) const {
  cvec u(f.size());
  for (size_t i = 0; i < f.size(); ++i)
    u[i] = f[i] * std::exp(-frame_.lambda * theta_[i]);
  return u;
}

void ConjugatedFrame::boundary_check(const cvec& f) const {
  double edge = 0.0, total = 0.0;
  const int n = grid_.n;
  for (int i = 0; i < n; ++i) total += std::norm(f[i]);
  for (int i = 0; i < 4; ++i)
    edge += std::norm(f[i]) + std::norm(f[n - 1 - i]);
  if (edge > 1e-10 * total)
    throw BoundaryLeak("field does not decay at the grid boundary");
}

cvec ConjugatedFrame::apply_S(SpectralWorkspace& ws, const cvec& f) const {
  const double l = frame_.lambda;
  const int n = grid_.n;
  const cvec fx = ws.derivative(grid_, f, 1);
  cvec tmp(n);
  for (int i = 0; i < n; ++i) tmp[i] = w_[0][i] * fx[i];
  const cvec dtmp = ws.derivative(grid_, tmp, 1);
  cvec out(n);
  for (int i = 0; i < n; ++i) {
    const double w1 = w_[0][i];
    // -l theta_t = +l b theta_x
    const double pot =
        -l * l * l * w1 * w1 * w1 - l * w_[2][i] + l * frame_.b * w1;
    out[i] = -3.0 * l * dtmp[i] + pot * f[i];
  }
  return out;
}

cvec ConjugatedFrame::apply_A_tilde(SpectralWorkspace& ws,
                                    const cvec& f) const {
  const double l = frame_.lambda;
  const int n = grid_.n;
  const cvec fx = ws.derivative(grid_, f, 1);
  const cvec fxxx = ws.derivative(grid_, f, 3);
  cvec out(n);
  for (int i = 0; i < n; ++i) {
    const double w1 = w_[0][i];
    out[i] = fxxx[i] + 3.0 * l * l * w1 * w1 * fx[i] +
             3.0 * l * l * w1 * w_[1][i] * f[i];
  }
  return out;
}

cvec ConjugatedFrame::apply_A(SpectralWorkspace& ws, const cvec& f,
                              const cvec& f_t) const {
  cvec out = apply_A_tilde(ws, f);
  for (size_t i = 0; i < out.size(); ++i) out[i] += f_t[i];
  return out;
}

cvec ConjugatedFrame::apply_S_t(SpectralWorkspace& ws, const cvec& f) const {
  const double l = frame_.lambda;
  const double b = frame_.b;
  const int n = grid_.n;
  const cvec fx = ws.derivative(grid_, f, 1);
  cvec tmp(n);
  for (int i = 0; i < n; ++i) tmp[i] = w_[1][i] * fx[i];
  const cvec dtmp = ws.derivative(grid_, tmp, 1);
  cvec out(n);
  for (int i = 0; i < n; ++i) {
    const double w1 = w_[0][i];
    const double pot = 3.0 * l * l * l * b * w1 * w1 * w_[1][i] +
                       l * b * w_[3][i] - l * b * b * w_[1][i];
    out[i] = 3.0 * l * b * dtmp[i] + pot * f[i];
  }
  return out;
}

TermBreakdown ConjugatedFrame::commutator_terms(SpectralWorkspace& ws,
                                                const cvec& f) const {
  boundary_check(f);
  const double l = frame_.lambda;
  const double b = frame_.b;
  const int n = grid_.n;
  const double h = grid_.dx();
  const cvec fx = ws.derivative(grid_, f, 1);
  const cvec fxx = ws.derivative(grid_, f, 2);

  // The quadratures with third and higher weight derivatives are evaluated
  // through their by-parts forms, moving the derivatives onto the smooth
  // decaying field products: the grid then only ever samples theta_x,
  // theta_xx, theta_xxx, whose fine structure it resolves. The identities
  // used (all exact for decaying fields):
  //   int w'''' g       = int w'' g''
  //   int w' w'' w''' F = -1/2 int w''^2 (w' F)'
  //   int w'^2 w'''' F  = -int w''' (w'^2 F)'
  //   int w^(6) F       = int w'' F''''
  cvec f_sq(n), fx_sq(n);
  for (int i = 0; i < n; ++i) {
    f_sq[i] = f[i].real() * f[i].real();
    fx_sq[i] = fx[i].real() * fx[i].real();
  }
  const cvec fsq_d2 = ws.derivative(grid_, f_sq, 2);
  const cvec fsq_d4 = ws.derivative(grid_, f_sq, 4);
  const cvec fxsq_d2 = ws.derivative(grid_, fx_sq, 2);

  double q[12] = {};
  for (int i = 0; i < n; ++i) {
    const double fi = f[i].real();
    const double fxi = fx[i].real();
    const double fxxi = fxx[i].real();
    const double w1 = w_[0][i], w2 = w_[1][i], w3 = w_[2][i];
    const double f2 = fi * fi, fx2 = fxi * fxi, ffx = fi * fxi;
    q[0] += w2 * fxxi * fxxi;
    q[1] += w2 * fx2;
    q[2] += w1 * w1 * w2 * fx2;
    q[3] += w2 * fxsq_d2[i].real();
    q[4] += w1 * w1 * w1 * w1 * w2 * f2;
    q[5] += w2 * f2;
    q[6] += w2 * w2 * w2 * f2;
    q[7] += w2 * w2 * (w2 * f2 + 2.0 * w1 * ffx);  // -1/2 (w' f^2)' form
    q[8] += w3 * w1 * (w2 * f2 + w1 * ffx);        // -(w'^2 f^2)' form
    q[9] += w2 * fsq_d4[i].real();
    q[10] += w2 * fsq_d2[i].real();
    q[11] += w1 * w1 * w2 * f2;
  }
  TermBreakdown out;
  const double l3 = l * l * l;
  out.terms[0] = 9.0 * l * q[0] * h;
  out.terms[1] = 6.0 * l * b * q[1] * h;
  out.terms[2] = 18.0 * l3 * q[2] * h;
  out.terms[3] = -6.0 * l * q[3] * h;
  out.terms[4] = 9.0 * l3 * l * l * q[4] * h;
  out.terms[5] = l * b * b * q[5] * h;
  out.terms[6] = -3.0 * l3 * q[6] * h;
  out.terms[7] = 9.0 * l3 * q[7] * h;
  out.terms[8] = 6.0 * l3 * q[8] * h;
  out.terms[9] = l * q[9] * h;
  out.terms[10] = -2.0 * l * b * q[10] * h;
  out.terms[11] = -6.0 * l3 * b * q[11] * h;
  for (double v : out.terms) out.total += v;
  return out;
}

double ConjugatedFrame::commutator_composition(SpectralWorkspace& ws,
                                               const cvec& f) const {
  const cvec sa = apply_S(ws, apply_A_tilde(ws, f));
  const cvec as = apply_A_tilde(ws, apply_S(ws, f));
  const cvec st = apply_S_t(ws, f);
  cvec comm(f.size());
  for (size_t i = 0; i < f.size(); ++i) comm[i] = sa[i] - as[i] - st[i];
  return inner_real(grid_, comm, f);
}

double ConjugatedFrame::drift_square_quadrature(const cvec& f) const {
  const double l = frame_.lambda;
  const double b = frame_.b;
  double s = 0.0;
  for (int i = 0; i < grid_.n; ++i) {
    const double w1 = w_[0][i];
    const double g = 3.0 * l * l * w1 * w1 - b;
    s += g * g * w_[1][i] * f[i].real() * f[i].real();
  }
  return l * s * grid_.dx();
}

std::pair<double, double> ConjugatedFrame::case4_identity(
    SpectralWorkspace& ws, const cvec& f) const {
  const TermBreakdown tb = commutator_terms(ws, f);
  const double lhs = tb.terms[0] + tb.terms[1] + tb.terms[5];
  const double l = frame_.lambda;
  const double b = frame_.b;
  const cvec fxx = ws.derivative(grid_, f, 2);
  cvec f_sq(grid_.n);
  for (int i = 0; i < grid_.n; ++i)
    f_sq[i] = f[i].real() * f[i].real();
  const cvec fsq_d2 = ws.derivative(grid_, f_sq, 2);
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < grid_.n; ++i) {
    const double g = fxx[i].real() - (b / 3.0) * f[i].real();
    s1 += w_[1][i] * g * g;
    s2 += w_[1][i] * fsq_d2[i].real();  // int w'''' f^2 by parts
  }
  const double rhs = (9.0 * l * s1 + 3.0 * l * b * s2) * grid_.dx();
  return {lhs, rhs};
}

EnsembleReport run_commutator_ensemble(const FrameSpec& frame,
                                       const std::vector<SampledField>& fields,
                                       int jobs) {
  if (fields.empty()) throw InvalidEnsemble("ensemble is empty");
  for (const auto& f : fields)
    if (f.l2_sq() == 0.0)
      throw InvalidEnsemble("ensemble contains a zero field");
  const GridSpec grid = fields.front().grid;
  const double t = fields.front().t;
  for (const auto& f : fields)
    if (!(f.grid == grid))
      throw InvalidEnsemble("ensemble fields live on different grids");

  const ConjugatedFrame op(frame, grid, t);
  const int count = static_cast<int>(fields.size());
  const double l = frame.lambda;

  struct PerField {
    double ratio, identity_rel, composition_rel;
    std::array<double, 12> terms;
  };
  std::vector<PerField> results(count);

  auto work = [&](int begin, int end) {
    SpectralWorkspace ws(grid.n);
    for (int i = begin; i < end; ++i) {
      const cvec& f = fields[i].values;
      const TermBreakdown tb = op.commutator_terms(ws, f);
      const cvec fx = ws.derivative(grid, f, 1);
      double denom = 0.0;
      for (int k = 0; k < grid.n; ++k) {
        const double fv = f[k].real(), fxv = fx[k].real();
        denom += op.phi0_second()[k] *
                 (l * l * l * fv * fv + l * l * fxv * fxv);
      }
      denom *= grid.dx();
      const double fused = op.drift_square_quadrature(f);
      const double trio = tb.terms[4] + tb.terms[5] + tb.terms[11];
      const double comp = op.commutator_composition(ws, f);
      PerField r;
      r.ratio = tb.total / denom;
      r.identity_rel =
          std::abs(trio - fused) / std::max(std::abs(fused), 1e-300);
      r.composition_rel =
          std::abs(tb.total - comp) / std::max(tb.sum_abs(), 1e-300);
      r.terms = tb.terms;
      results[i] = r;
    }
  };

  jobs = std::max(1, jobs);
  if (jobs == 1) {
    work(0, count);
  } else {
    std::vector<std::future<void>> futs;
    const int chunk = (count + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j) {
      const int b0 = j * chunk, b1 = std::min(count, b0 + chunk);
      if (b0 >= b1) break;
      futs.push_back(std::async(std::launch::async, work, b0, b1));
    }
    for (auto& f : futs) f.get();
  }

  EnsembleReport rep;
  rep.lambda = frame.lambda;
  rep.b = frame.b;
  rep.scale = frame.scale();
  rep.min_ratio = results.front().ratio;
  for (const auto& r : results) {
    rep.ratios.push_back(r.ratio);
    rep.min_ratio = std::min(rep.min_ratio, r.ratio);
    rep.max_identity_rel = std::max(rep.max_identity_rel, r.identity_rel);
    rep.max_composition_rel =
        std::max(rep.max_composition_rel, r.composition_rel);
    for (int k = 0; k < 12; ++k) rep.mean_terms[k] += r.terms[k] / count;
  }
  rep.all_positive = rep.min_ratio > 0.0;
  return rep;
}

std::vector<SampledField> random_ensemble(const GridSpec& grid, int count,
                                          uint64_t seed) {
  grid.validate(false);
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return double(rng() >> 11) * 0x1.0p-53;  // [0,1)
  };
  auto normal = [&]() {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };

  SpectralWorkspace ws(grid.n);
  std::vector<SampledField> out;
  out.reserve(count);
  const double L = grid.half_length;
  for (int c = 0; c < count; ++c) {
    const double sigma = L * (1.0 / 14.0 + uniform() * (1.0 / 10.0 - 1.0 / 14.0));
    const double center = L / 10.0 * (2.0 * uniform() - 1.0);
    double poly[5];
    for (double& p : poly) p = normal();
    SampledField f = zero_field(grid, 0.0);
    for (int i = 0; i < grid.n; ++i) {
      const double z = (grid.x(i) - center) / sigma;
      double pv = poly[4];
      for (int d = 3; d >= 0; --d) pv = pv * z + poly[d];
      f.values[i] = pv * std::exp(-0.5 * z * z);
    }
    cvec hat;
    ws.forward(f.values, hat);
    SpectralWorkspace::dealias(grid, hat);
    ws.inverse(hat, f.values);
    const double norm = f.l2_norm();
    if (norm > 0)
      for (auto& v : f.values) v /= norm;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace gkdvlab
