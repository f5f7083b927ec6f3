#pragma once

#include <functional>
#include <vector>

#include "fluctrel/process.hpp"

namespace fluctrel {

// Linear Langevin model dx = M x + zeta, <zeta zeta> = 2 beta^-1 Gamma dt.
// With C > 0 solving M C + C M^T = -2 Gamma, Pi = Gamma + M C is
// antisymmetric and M = -(Gamma - Pi) C^-1.
struct LinearModel {
  Mat M;
  Mat gamma;
  Mat pi;
  Mat C;       // stationary covariance scale (beta absorbed separately)
  double beta = 1.0;

  int dim() const { return static_cast<int>(M.rows()); }

  // Build from (Gamma, Pi, C); derives M and validates the consistency
  // relations to 1e-10.
  static LinearModel from_gpc(const Mat& gamma, const Mat& pi, const Mat& C,
                              double beta = 1.0);
  // Build from (M, Gamma); derives C = C_infinity and Pi.
  static LinearModel from_mgamma(const Mat& M, const Mat& gamma, double beta = 1.0);
};

// C_t = 2 int_0^t e^{sM} Gamma e^{sM^T} ds (adaptive quadrature, rel tol
// 1e-10); t = infinity solves the Lyapunov equation via the Kronecker system.
Mat ct_integral(const Mat& M, const Mat& gamma, double t);
Mat lyapunov_stationary(const Mat& M, const Mat& gamma);

struct GaussianKernel {
  Vec mean;
  Mat cov;
  double log_density(const Vec& y) const;
};

// Transition kernel P_t(x, .) = N(e^{tM} x, beta^-1 C_t).
GaussianKernel gaussian_kernel(const LinearModel& model, double t, const Vec& x);
// Stationary Gibbs kernel N(0, beta^-1 C).
GaussianKernel stationary_kernel(const LinearModel& model);

// Mean entropy production rate -tr(Pi Gamma^-1 M) of the stationary state.
double stationary_entropy_rate(const LinearModel& model);

// One-dimensional Langevin dx = -H'(x) dt + zeta with odd polynomial H of
// degree k >= 3; the resuscitating process has the constant-flux invariant
// density rho(x) = N^-1 e^{-beta H(x)} int_{s inf}^x e^{beta H(y)} dy.
struct FluxModel {
  std::vector<double> H_coeffs;  // H(x) = sum c_i x^i, c_k leading, k odd >= 3
  double beta = 1.0;
  int sign = +1;                 // +1: leading coeff > 0 (escape to -inf)

  double H(double x) const;
  double Hp(double x) const;
  double Hpp(double x) const;
  int degree() const { return static_cast<int>(H_coeffs.size()) - 1; }

  static FluxModel cubic(double a3, double a2, double beta);
};

struct FluxDensity {
  FluxModel model;
  std::vector<double> grid;
  std::vector<double> density;    // normalized rho on the grid
  std::vector<double> cdf;        // window CDF at grid points
  double normalization = 0.0;     // N
  double current = 0.0;           // j = -sign / (beta N)
  double x_lo = 0.0, x_hi = 0.0;  // quadrature window
  double mean_pv = 0.0;           // principal-value mean of x

  double rho(double x) const;                 // interpolated + asymptotic tails
  double mean_x() const { return mean_pv; }
  double sample(double u) const;              // inverse-CDF on the window
};

FluxDensity flux_invariant_density(const FluxModel& model, int grid_points = 2001);

// Top Lyapunov exponent of the inertial-particle tangent ratio
// dx = (-x^2 - x/tau) dt + zeta, <zeta zeta> = c delta: mean of x in the
// flux measure for H = x^3/3 + x^2/(2 tau), beta = 2/c.
double lyapunov_inertial(double tau, double c);

// Same quantity for the Anderson-type SDE x' = -x^2 - E + V (H = x^3/3 + Ex).
double lyapunov_anderson(double E, double c);

}  // namespace fluctrel
