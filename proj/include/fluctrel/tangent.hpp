#pragma once

#include <optional>

#include "fluctrel/integrate.hpp"
#include "fluctrel/stats.hpp"

namespace fluctrel {

// Overflow-safe cocycle product X = E_N ... E_1.  Maintains X = Q * P with Q
// orthogonal and P an accumulated product of positive-diagonal triangular
// factors kept on a floating log scale; dense X is never stored beyond the
// pending block between re-orthonormalizations.
class CocycleAccumulator {
 public:
  explicit CocycleAccumulator(int d, int qr_interval = 1);

  void apply(const Mat& e);  // X <- e X
  void flush();              // absorb the pending block

  int dim() const { return d_; }
  double log_abs_det() const { return logabsdet_.value(); }
  int det_sign() const;
  double log_scale() const { return logscale_; }
  const Mat& orthogonal() const { return q_; }
  const Mat& scaled_product() const { return ptil_; }

  // log singular values, sorted non-increasing; optional metric square roots
  // conjugate the cocycle at the endpoints.
  Vec stretching_logs(const Mat* metric_sqrt_T = nullptr,
                      const Mat* metric_inv_sqrt_0 = nullptr) const;

  Mat dense() const;  // Q e^s Ptil (tests only; may overflow for long T)

 private:
  int d_;
  int qr_interval_;
  int pending_count_ = 0;
  Mat q_, ptil_, pending_;
  double logscale_ = 0.0;
  KahanSum logabsdet_;
  int sign_ = 1;
};

struct TangentTrajectory {
  Trajectory base;            // empty states for decoupled Kraichnan cocycles
  CocycleAccumulator cocycle;
  double horizon = 0.0;
  bool escaped = false;
};

struct StretchingSpectrum {
  Vec rho;        // sorted non-increasing
  double horizon = 0.0;
};

struct TangentOptions {
  int qr_interval = 1;
  Mat x0_cocycle;             // initial cocycle (default identity)
  bool record_noise = true;
  bool store_base_states = true;
};

// Joint integration of (x_t, X_t): the state by Euler-Maruyama, the cocycle
// by exp(h A)(1 + N + N^2/2) per step with A the Stratonovich drift Jacobian
// and N the sampled noise-field Jacobian increment.  Homogeneous-Kraichnan
// specs use the decoupled matrix SDE directly.
TangentTrajectory evolve_tangent(const ProcessSpec& spec, const Vec& x0, double h,
                                 RngStream stream, const TangentOptions& opt = {});

// | ln det X_T - sum of midpoint divergence increments |.
double contraction_identity_residual(const TangentTrajectory& tan,
                                     const ProcessSpec& spec);

StretchingSpectrum stretching_exponents(const TangentTrajectory& tan,
                                        const Mat* metric_T = nullptr,
                                        const Mat* metric_0 = nullptr);

// Closed-form 2x2 / 1x1 matrix exponential (Pade for larger blocks).
Mat small_expm(const Mat& m);

struct MultiplicativeHistogramReport {
  double max_z = 0.0;
  int cells = 0;
  bool pass = false;
};

// Bin-wise check of P(d rho) e^{sum rho} = P'(d(-rho~)) on the leading
// exponent, comparing the weighted forward mass against the mirrored
// backward counts (z < 4 on bins with >= min_count in both ensembles).
MultiplicativeHistogramReport multiplicative_fr_histogram(
    const std::vector<Vec>& forward, const std::vector<Vec>& backward, int bins,
    int min_count = 100);

}  // namespace fluctrel
