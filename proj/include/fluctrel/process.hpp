#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "fluctrel/errors.hpp"
#include "fluctrel/rng.hpp"

namespace fluctrel {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using DriftFn = std::function<void(double t, const Vec& x, Vec& out)>;
using ScalarFieldFn = std::function<double(double t, const Vec& x)>;
using SpaceFieldFn = std::function<double(const Vec& x)>;
using CovarianceFn = std::function<void(double t, const Vec& x, const Vec& y, Mat& out)>;
using JacobianFn = std::function<void(double t, const Vec& x, Mat& out)>;
using SamplerFn = std::function<Vec(double t, RngStream& rng)>;

// Involution x -> x* with x** = x. Linear involutions cache the matrix so
// sigma(x) = |det dx*/dx| is a constant.
struct Involution {
  std::function<void(const Vec&, Vec&)> map;       // null => identity
  std::function<void(const Vec&, Mat&)> jacobian;  // null => fd / linear
  std::optional<Mat> linear;                       // r with r*r = 1

  bool is_identity() const { return !map && !linear; }
  void apply(const Vec& x, Vec& out) const;
  Vec apply(const Vec& x) const;
  void jac(const Vec& x, Mat& out) const;
  double log_sigma(const Vec& x) const;  // ln |det dx*/dx|

  static Involution identity() { return Involution{}; }
  static Involution from_matrix(const Mat& r);
  static Involution negate(int dim);
  static Involution momentum_flip(int nq);  // (q,p) -> (q,-p)
};

// Time-indexed family of functions phi_t with gradient and time derivative;
// optionally a sampler for the normalized density e^{-phi_t} dx.
struct PhiFamily {
  ScalarFieldFn value;
  DriftFn grad;       // null => finite differences
  ScalarFieldFn dt;   // null => finite differences
  SamplerFn sample;   // null => SamplerUnavailable

  double phi(double t, const Vec& x) const { return value(t, x); }
  void gradient(double t, const Vec& x, Vec& out) const;
  double time_derivative(double t, const Vec& x) const;
  Vec draw(double t, RngStream& rng) const;
};

// Langevin-family structure: dx = -Gamma grad H + Pi grad H + G + noise,
// with noise covariance D = 2 beta^-1 Gamma.
struct LangevinData {
  Mat gamma;
  Mat pi;
  double beta = 1.0;
  ScalarFieldFn H;
  DriftFn gradH;
  ScalarFieldFn dtH;                       // null => static Hamiltonian
  DriftFn G;                               // null => zero force
  ScalarFieldFn divG;                      // null => zero
  std::function<double(double)> free_energy;  // F_t, null if unavailable

  bool has_force() const { return static_cast<bool>(G); }
  bool static_hamiltonian() const { return !dtH; }
};

// Homogeneous-Kraichnan tangent cocycle written as a matrix-valued diffusion
// dX = S_t dt X (Ito) with <S^i_k S^j_l> = delta(t-s) C^ij_kl.  The isotropic
// tensor is C^ij_kl = a d^ij d_kl + b (d^i_k d^j_l + d^i_l d^j_k).
struct KraichnanTensor {
  int flow_dim = 1;          // d; the process state is the d x d matrix X
  double a = 0.0;
  double b = 0.0;

  static KraichnanTensor isotropic(int d, double amplitude, double compressibility);

  // Quadratic-form eigenvalues on sym-traceless / antisym / trace parts.
  double lambda_sym() const { return a + b; }
  double lambda_antisym() const { return a - b; }
  double lambda_trace() const { return a + b * (flow_dim + 1); }

  // Stratonovich drift matrix B with X' = B X + S X, B = -(1/2) C^ik_kl.
  Mat strat_drift() const;
  // Sample S * sqrt(h) from flow_dim^2 standard normals.
  Mat sample_noise(double sqrt_h, const double* normals) const;
  int normals_per_step() const { return flow_dim * flow_dim; }
  // Covariance of the matrix diffusion viewed as a d^2-dim process:
  // D^(ij)(kl)(X,Y) = C^ij_nm X^n_k Y^m_l   (row-major pair indexing).
  void covariance(const Mat& X, const Mat& Y, Mat& out) const;
  double tensor(int i, int j, int k, int l) const;
};

// A diffusion dx = u_{t,+} + u_{t,-} + v_t(x), Stratonovich, with Gaussian
// white-in-time velocity field of covariance D_t(x,y).
struct ProcessSpec {
  int dim = 1;
  double horizon = 1.0;
  std::optional<double> beta;
  std::string family_tag;

  DriftFn drift_plus;              // null => zero
  DriftFn drift_minus;             // null => zero
  CovarianceFn covariance;         // D_t(x,y); null => zero (deterministic)
  bool additive_noise = false;     // D independent of (x,y)

  Involution involution;           // default identity

  // Optional analytic shortcuts (finite differences otherwise).
  DriftFn ito_correction_fn;       // (1/2) d_x D(x,y)|_{y=x}
  DriftFn hat_shift_fn;            // (1/2) d_y D(x,y)|_{y=x}
  JacobianFn drift_jacobian;       // full Stratonovich drift Jacobian
  ScalarFieldFn div_plus;          // divergence of drift_plus
  ScalarFieldFn div_minus;

  std::optional<LangevinData> langevin;
  std::optional<KraichnanTensor> kraichnan;
  std::optional<PhiFamily> phi;           // instantaneously invariant family
  std::optional<PhiFamily> phi_evolving;  // family solving the forward equation

  double blowup_guard = 1e8;
  std::function<bool(Vec&)> reinject;  // boundary hook (resuscitating processes)

  void drift(double t, const Vec& x, Vec& out) const;
  void dplus(double t, const Vec& x, Vec& out) const;
  void dminus(double t, const Vec& x, Vec& out) const;
  bool has_noise() const { return static_cast<bool>(covariance) || kraichnan.has_value(); }

  // d_t(x) = D_t(x,x).
  void diffusion(double t, const Vec& x, Mat& out) const;

  // Ito correction u~ and hat shift (u^ = u - hat_shift).
  void ito_correction(double t, const Vec& x, Vec& out) const;
  void hat_shift(double t, const Vec& x, Vec& out) const;
  void hat_drift(double t, const Vec& x, Vec& out) const;        // u^ = u - shift
  void hat_drift_plus(double t, const Vec& x, Vec& out) const;   // u^_+ = u_+ - shift

  double divergence_plus(double t, const Vec& x) const;
  double divergence_minus(double t, const Vec& x) const;
  void jacobian(double t, const Vec& x, Mat& out) const;
};

// Scale-aware central-difference step.
double fd_step(double xi);

// Symmetric PSD factorization L L^T = m: Cholesky with a symmetric-eigenvalue
// fallback that zeroes negative eigenvalues below 1e-12 * trace.
Mat psd_factor(const Mat& m);

// Inverse of d with a condition-number gate (throws SingularDiffusion).
Mat checked_inverse(const Mat& d, double cond_limit = 1e12);

// (ito, hat) corrections at (t, x); see ProcessSpec::ito_correction/hat_shift.
std::pair<Vec, Vec> drift_corrections(const ProcessSpec& spec, double t, const Vec& x);

enum class GeneratorPart { full, plus, minus };

// (L_t f)(x) = u^ . grad f + (1/2) d_j d^ij d_i f, or the formal adjoint
// acting on densities when adjoint=true.  Probe functions may be supplied
// with analytic derivatives via ScalarProbe.
struct ScalarProbe {
  SpaceFieldFn f;
  std::function<void(const Vec&, Vec&)> grad;     // null => fd
  std::function<void(const Vec&, Mat&)> hessian;  // null => fd
};

double generator_apply(const ProcessSpec& spec, double t, const ScalarProbe& f,
                       const Vec& x, bool adjoint = false,
                       GeneratorPart part = GeneratorPart::full);

}  // namespace fluctrel
