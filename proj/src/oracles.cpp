#include "fluctrel/oracles.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "fluctrel/stats.hpp"

namespace fluctrel {

namespace {

void require_negative_spectrum(const Mat& M) {
  Eigen::EigenSolver<Mat> es(M);
  for (int i = 0; i < M.rows(); ++i)
    if (es.eigenvalues()[i].real() >= 0.0)
      throw UnstableDrift("Re spec(M) must be negative");
}

// Gauss-Legendre 15-point nodes/weights on [-1, 1].
constexpr int kGL = 15;
const double kGLx[kGL] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
const double kGLw[kGL] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

double gauss_panel(const std::function<double(double)>& f, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < kGL; ++i) s += kGLw[i] * f(mid + half * kGLx[i]);
  return s * half;
}

// log of int_a^b e^{g(y)} dy by Gauss-Legendre in log space.
double log_gauss_panel(const std::function<double(double)>& g, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double vals[kGL];
  double vmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGL; ++i) {
    vals[i] = g(mid + half * kGLx[i]);
    vmax = std::max(vmax, vals[i]);
  }
  double s = 0.0;
  for (int i = 0; i < kGL; ++i) s += kGLw[i] * std::exp(vals[i] - vmax);
  return vmax + std::log(s * half);
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear model

Mat lyapunov_stationary(const Mat& M, const Mat& gamma) {
  require_negative_spectrum(M);
  int d = static_cast<int>(M.rows());
  // (I (x) M + M (x) I) vec(C) = vec(-2 Gamma), column-major vec.
  Mat A = Mat::Zero(d * d, d * d);
  Mat I = Mat::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          // vec index (row i, col j) -> j*d+i; C_{kl} coefficient of
          // (M C + C M^T)_{ij} = M_ik C_kj + C_ik M_jk.
          double coef = 0.0;
          if (l == j) coef += M(i, k);
          if (k == i) coef += M(j, l);
          A(j * d + i, l * d + k) += coef;
        }
  Vec rhs(d * d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) rhs[j * d + i] = -2.0 * gamma(i, j);
  Vec x = A.partialPivLu().solve(rhs);
  Mat C(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) C(i, j) = x[j * d + i];
  return 0.5 * (C + C.transpose());
}

namespace {

Mat ct_adaptive(const Mat& M, const Mat& gamma, double a, double b,
                const Mat& fa, const Mat& fb, const Mat& fm, double tol, int depth) {
  auto eval = [&](double s) -> Mat {
    Mat e = (s * M).exp();
    return e * gamma * e.transpose();
  };
  double m = 0.5 * (a + b);
  Mat fl = eval(0.5 * (a + m));
  Mat fr = eval(0.5 * (m + b));
  Mat simpson = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  Mat refined = (b - a) / 12.0 * (fa + 4.0 * fl + 2.0 * fm + 4.0 * fr + fb);
  double err = (refined - simpson).norm();
  if (depth > 40 || err < tol * std::max(1.0, refined.norm()))
    return refined + (refined - simpson) / 15.0;
  return ct_adaptive(M, gamma, a, m, fa, fm, fl, tol / 1.4, depth + 1) +
         ct_adaptive(M, gamma, m, b, fm, fb, fr, tol / 1.4, depth + 1);
}

}  // namespace

Mat ct_integral(const Mat& M, const Mat& gamma, double t) {
  if (std::isinf(t)) return lyapunov_stationary(M, gamma);
  if (t == 0.0) return Mat::Zero(M.rows(), M.cols());
  auto eval = [&](double s) -> Mat {
    Mat e = (s * M).exp();
    return e * gamma * e.transpose();
  };
  Mat fa = eval(0.0), fb = eval(t), fm = eval(0.5 * t);
  Mat r = 2.0 * ct_adaptive(M, gamma, 0.0, t, fa, fb, fm, 1e-11, 0);
  return 0.5 * (r + r.transpose());
}

LinearModel LinearModel::from_gpc(const Mat& gamma, const Mat& pi, const Mat& C,
                                  double beta) {
  if ((pi + pi.transpose()).norm() > 1e-12 * std::max(1.0, pi.norm()))
    throw InvolutionIncompatible("Pi must be antisymmetric");
  LinearModel m;
  m.gamma = gamma;
  m.pi = pi;
  m.C = C;
  m.beta = beta;
  m.M = -(gamma - pi) * C.inverse();
  require_negative_spectrum(m.M);
  double resid = (m.M * C + C * m.M.transpose() + 2.0 * gamma).norm();
  if (resid > 1e-10 * std::max(1.0, gamma.norm()))
    throw Error("linear model consistency: Lyapunov residual too large");
  return m;
}

LinearModel LinearModel::from_mgamma(const Mat& M, const Mat& gamma, double beta) {
  LinearModel m;
  m.M = M;
  m.gamma = gamma;
  m.beta = beta;
  m.C = lyapunov_stationary(M, gamma);
  m.pi = gamma + M * m.C;
  if ((m.pi + m.pi.transpose()).norm() > 1e-8 * std::max(1.0, m.pi.norm()))
    throw Error("derived Pi not antisymmetric");
  return m;
}

double GaussianKernel::log_density(const Vec& y) const {
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success) throw CovarianceNotPSD("kernel covariance");
  Vec r = y - mean;
  Vec z = llt.matrixL().solve(r);
  double logdet = 0.0;
  for (int i = 0; i < cov.rows(); ++i) logdet += std::log(llt.matrixL()(i, i));
  return -0.5 * z.squaredNorm() - logdet -
         0.5 * cov.rows() * std::log(2.0 * M_PI);
}

GaussianKernel gaussian_kernel(const LinearModel& model, double t, const Vec& x) {
  GaussianKernel k;
  k.mean = (t * model.M).exp() * x;
  k.cov = ct_integral(model.M, model.gamma, t) / model.beta;
  return k;
}

GaussianKernel stationary_kernel(const LinearModel& model) {
  GaussianKernel k;
  k.mean = Vec::Zero(model.dim());
  k.cov = model.C / model.beta;
  return k;
}

double stationary_entropy_rate(const LinearModel& model) {
  Eigen::FullPivLU<Mat> lu(model.gamma);
  if (!lu.isInvertible()) throw SingularGamma("Gamma not invertible");
  return -(model.pi * lu.inverse() * model.M).trace();
}

// ---------------------------------------------------------------------------
// Flux model

double FluxModel::H(double x) const {
  double r = 0.0;
  for (auto it = H_coeffs.rbegin(); it != H_coeffs.rend(); ++it) r = r * x + *it;
  return r;
}

double FluxModel::Hp(double x) const {
  double r = 0.0;
  for (int i = degree(); i >= 1; --i) r = r * x + i * H_coeffs[i];
  return r;
}

double FluxModel::Hpp(double x) const {
  double r = 0.0;
  for (int i = degree(); i >= 2; --i) r = r * x + i * (i - 1) * H_coeffs[i];
  return r;
}

FluxModel FluxModel::cubic(double a3, double a2, double beta) {
  FluxModel m;
  m.H_coeffs = {0.0, 0.0, a2, a3};
  m.beta = beta;
  m.sign = a3 > 0 ? +1 : -1;
  return m;
}

namespace {

void validate_flux(const FluxModel& m) {
  int k = m.degree();
  if (k < 3 || k % 2 == 0 || m.H_coeffs[k] == 0.0)
    throw WrongParity("flux model needs odd polynomial degree k >= 3");
}

// Two-term Laplace tail of log I(x) = log int_{-inf}^x e^{beta H}, valid when
// beta H'(x)^2 >> H''(x).
double log_inner_laplace(const FluxModel& m, double x) {
  double hp = m.Hp(x);
  double corr = m.Hpp(x) / (m.beta * hp * hp);
  return m.beta * m.H(x) - std::log(m.beta * hp) + std::log1p(-corr);
}

FluxModel reflected(const FluxModel& m) {
  FluxModel r = m;
  for (std::size_t i = 1; i < r.H_coeffs.size(); i += 2) r.H_coeffs[i] = -r.H_coeffs[i];
  r.sign = -m.sign;
  return r;
}

}  // namespace

double FluxDensity::rho(double x) const {
  if (x <= x_lo || x >= x_hi) {
    // Asymptotic tail rho ~ N^-1 (beta H')^-1 (1 - H''/(beta H'^2)).
    const FluxModel& m = model;
    double hp = std::abs(m.Hp(x));
    double corr = m.Hpp(x) / (m.beta * m.Hp(x) * m.Hp(x));
    return (1.0 - corr) / (normalization * m.beta * hp);
  }
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t i = std::max<std::ptrdiff_t>(1, it - grid.begin()) - 1;
  i = std::min(i, grid.size() - 2);
  double w = (x - grid[i]) / (grid[i + 1] - grid[i]);
  return (1.0 - w) * density[i] + w * density[i + 1];
}

namespace {

struct FluxTables {
  std::vector<double> grid, dens, cdf;
  double N = 0.0;        // window + tail normalization, un-normalized units
  double mean = 0.0;     // principal-value mean, normalized
  double x_lo = 0.0, x_hi = 0.0;
};

// Core construction for leading coefficient > 0 (escape to -inf, current
// -1/(beta N)); the a < 0 case is handled by reflection.
FluxTables build_flux_tables(const FluxModel& m, int grid_points) {
  int k = m.degree();
  double a = m.H_coeffs[k];
  double scale = std::pow(m.beta * a, -1.0 / k);
  // Sub-leading terms widen the relevant region; include their scale too.
  for (int i = 2; i < k; ++i)
    if (m.H_coeffs[i] != 0.0)
      scale = std::max(scale, std::pow(std::abs(m.H_coeffs[i]) * m.beta, -1.0 / i));
  double W = 40.0 * scale;
  double x_lo = -W, x_hi = W;

  std::vector<double> grid(grid_points);
  for (int i = 0; i < grid_points; ++i)
    grid[i] = x_lo + (x_hi - x_lo) * i / (grid_points - 1.0);

  auto g = [&](double y) { return m.beta * m.H(y); };

  // log of a panel integral, splitting until the exponent range per
  // sub-panel is small enough for the Gauss rule.
  auto log_panel = [&](double a0, double b0) {
    double range = std::abs(g(b0) - g(a0));
    int parts = 1 + static_cast<int>(range / 6.0);
    double acc = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < parts; ++p) {
      double pa = a0 + (b0 - a0) * p / parts;
      double pb = a0 + (b0 - a0) * (p + 1) / parts;
      acc = log_add(acc, log_gauss_panel(g, pa, pb));
    }
    return acc;
  };

  // log I(x) on the grid, seeded by the Laplace tail at x_lo.
  std::vector<double> logI(grid_points);
  logI[0] = log_inner_laplace(m, x_lo);
  for (int i = 1; i < grid_points; ++i)
    logI[i] = log_add(logI[i - 1], log_panel(grid[i - 1], grid[i]));

  FluxTables t;
  t.grid = grid;
  t.x_lo = x_lo;
  t.x_hi = x_hi;
  t.dens.resize(grid_points);
  for (int i = 0; i < grid_points; ++i)
    t.dens[i] = std::exp(-m.beta * m.H(grid[i]) + logI[i]);

  // Window mass and first moment by composite Simpson.
  double mass = 0.0, mom = 0.0;
  for (int i = 0; i + 2 < grid_points; i += 2) {
    double h = grid[i + 1] - grid[i];
    mass += h / 3.0 * (t.dens[i] + 4.0 * t.dens[i + 1] + t.dens[i + 2]);
    mom += h / 3.0 * (grid[i] * t.dens[i] + 4.0 * grid[i + 1] * t.dens[i + 1] +
                      grid[i + 2] * t.dens[i + 2]);
  }

  // Tail corrections via u = 1/x; the asymptotic density is regular in u.
  auto tail_rho = [&](double x) {
    double hp = m.Hp(x);
    double corr = m.Hpp(x) / (m.beta * hp * hp);
    return (1.0 - corr) / (m.beta * std::abs(hp));
  };
  auto mass_tail = [&](double u) {
    if (u == 0.0) return 0.0;  // integrand below is already u-regular
    return (tail_rho(1.0 / u) + tail_rho(-1.0 / u)) / (u * u);
  };
  // Regularized at u = 0: rho(1/u)/u^2 -> 1/(beta a) * u^{k-3}... For k = 3
  // the limit is finite; evaluate via the formula with a small floor.
  auto mass_tail_safe = [&](double u) {
    double uu = std::max(u, 1e-14 / W);
    return mass_tail(uu);
  };
  double tail_mass = gauss_panel(mass_tail_safe, 0.0, 1.0 / x_hi);

  auto mean_tail = [&](double u) {
    double uu = std::max(u, 1e-14 / W);
    double x = 1.0 / uu;
    // x rho(x) + (-x) rho(-x): the 1/x parts cancel pairwise.
    return (x * tail_rho(x) - x * tail_rho(-x)) / (uu * uu);
  };
  double tail_mom = gauss_panel(mean_tail, 0.0, 1.0 / x_hi);

  t.N = mass + tail_mass;
  t.mean = (mom + tail_mom) / t.N;

  // Normalized density + CDF over the window.
  t.cdf.resize(grid_points);
  double c = 0.0;
  t.cdf[0] = 0.0;
  for (int i = 1; i < grid_points; ++i) {
    double h = grid[i] - grid[i - 1];
    c += 0.5 * h * (t.dens[i - 1] + t.dens[i]) / t.N;
    t.cdf[i] = c;
  }
  for (auto& v : t.dens) v /= t.N;
  return t;
}

}  // namespace

FluxDensity flux_invariant_density(const FluxModel& model, int grid_points) {
  validate_flux(model);
  if (grid_points % 2 == 0) ++grid_points;

  FluxDensity out;
  out.model = model;

  if (model.H_coeffs[model.degree()] > 0.0) {
    FluxTables t = build_flux_tables(model, grid_points);
    out.grid = t.grid;
    out.density = t.dens;
    out.cdf = t.cdf;
    out.normalization = t.N;
    out.current = -1.0 / (model.beta * t.N);
    out.x_lo = t.x_lo;
    out.x_hi = t.x_hi;
    out.mean_pv = t.mean;
    return out;
  }
  // Reflect x -> -x onto the positive-leading-coefficient case.
  FluxModel refl = reflected(model);
  FluxTables t = build_flux_tables(refl, grid_points);
  std::size_t n = t.grid.size();
  out.grid.resize(n);
  out.density.resize(n);
  out.cdf.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.grid[i] = -t.grid[n - 1 - i];
    out.density[i] = t.dens[n - 1 - i];
    out.cdf[i] = t.cdf.back() - t.cdf[n - 1 - i];
  }
  out.normalization = t.N;
  out.current = +1.0 / (model.beta * t.N);
  out.x_lo = -t.x_hi;
  out.x_hi = -t.x_lo;
  out.mean_pv = -t.mean;
  return out;
}

double FluxDensity::sample(double u) const {
  auto it = std::lower_bound(cdf.begin(), cdf.end(), u * cdf.back());
  std::size_t i = std::max<std::ptrdiff_t>(1, it - cdf.begin());
  i = std::min(i, cdf.size() - 1);
  double c0 = cdf[i - 1], c1 = cdf[i];
  double w = (c1 > c0) ? (u * cdf.back() - c0) / (c1 - c0) : 0.5;
  return grid[i - 1] + w * (grid[i] - grid[i - 1]);
}

double lyapunov_inertial(double tau, double c) {
  if (tau <= 0.0 || c <= 0.0) throw QuadratureFailure("tau and c must be positive");
  FluxModel m = FluxModel::cubic(1.0 / 3.0, 1.0 / (2.0 * tau), 2.0 / c);
  return flux_invariant_density(m).mean_x();
}

double lyapunov_anderson(double E, double c) {
  FluxModel m;
  m.H_coeffs = {0.0, E, 0.0, 1.0 / 3.0};
  m.beta = 2.0 / c;
  m.sign = +1;
  return flux_invariant_density(m).mean_x();
}

}  // namespace fluctrel
