#ifndef GKDVLAB_SOLVER_HPP
#define GKDVLAB_SOLVER_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gkdvlab/grid.hpp"
#include "gkdvlab/solutions.hpp"
#include "gkdvlab/spectral.hpp"

namespace gkdvlab {

/// Initial-condition descriptor, serializable into the run manifest.
struct ICSpec {
  enum class Kind { exact, gaussian, cosine, zero };
  Kind kind = Kind::zero;
  SolutionSpec sol;       // kind == exact
  double amplitude = 1.0; // gaussian / cosine
  double sigma = 1.0;     // gaussian
  double center = 0.0;    // gaussian
  int mode = 1;           // cosine: amplitude * cos(pi * mode * x / L)

  static ICSpec exact(const SolutionSpec& s) {
    ICSpec ic;
    ic.kind = Kind::exact;
    ic.sol = s;
    return ic;
  }
  static ICSpec gaussian(double amplitude, double sigma, double center = 0.0) {
    ICSpec ic;
    ic.kind = Kind::gaussian;
    ic.amplitude = amplitude;
    ic.sigma = sigma;
    ic.center = center;
    return ic;
  }
  static ICSpec cosine(double amplitude, int mode) {
    ICSpec ic;
    ic.kind = Kind::cosine;
    ic.amplitude = amplitude;
    ic.mode = mode;
    return ic;
  }
  static ICSpec zero() { return ICSpec{}; }

  SampledField build(const GridSpec& grid) const;
  std::string name() const;
};

/// Everything needed to reproduce a run bit-for-bit on one platform.
struct RunManifest {
  NonlinearitySpec model;
  GridSpec grid;
  ICSpec ic;
  double t_final = 1.0;
  int diag_every = 10;
  int store_every = 0;        // 0: keep no intermediate fields
  double blowup_ceiling = 1e6;
  uint64_t seed = 0;
  bool track_weighted = false; // record e^{2 lam |x - b t|} |d_x^k u|^2
  double diag_lambda = 0.0;
  double diag_b = 0.0;

  void validate() const;
  long n_steps() const;
};

struct DiagnosticsSeries {
  std::vector<double> t, mass_re, mass_im, l2, h1, peak_x;
  std::vector<std::array<double, 4>> weighted;  // k = 0..3 when tracked
  bool has_weighted = false;
};

struct RunResult {
  SampledField final_state;
  DiagnosticsSeries series;
  std::vector<SampledField> stored;
  RunManifest manifest;
};

/// max|u| exceeded the configured ceiling; carries the state at which
/// integration stopped (at most one step past the ceiling).
class BlowUpError : public Error {
 public:
  BlowUpError(std::string msg, SampledField last)
      : Error(std::move(msg)), last_good(std::move(last)) {}
  int exit_code() const override { return 3; }
  SampledField last_good;
};

/// Fourth-order exponential-integrator pseudospectral stepper for
/// (d_t + d_x^3) u = a(u) d_x u on the periodic grid. The Airy part is
/// integrated exactly in Fourier space; the nonlinear product is dealiased
/// with the 2/3-rule mask.
class GkdvSolver {
 public:
  GkdvSolver(const NonlinearitySpec& model, const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  double dt() const { return dt_; }
  void set_dt(double dt);
  void set_blowup_ceiling(double c) { ceiling_ = c; }

  /// One step of the state; throws BlowUpError past the ceiling.
  SampledField step(const SampledField& state);

  RunResult run(const RunManifest& manifest);

 private:
  void rebuild_tables();
  // nonlinear term in spectral space; also reports max|u| of the stage.
  void nonlinear_hat(const cvec& u_hat, cvec& out, double* max_abs);

  NonlinearitySpec model_;
  GridSpec grid_;
  double dt_;
  double ceiling_ = 1e6;
  SpectralWorkspace ws_;
  cvec E_, E2_, q_, w1_, w2_, w3_;
  cvec scratch_phys_, scratch_dx_, scratch_hat_;
};

/// Argmax of |u| with parabolic sub-cell refinement.
double peak_position(const SampledField& u);

/// Center of mass of |u|^2; insensitive to breather carrier crests.
double envelope_centroid(const SampledField& u);

}  // namespace gkdvlab

#endif
