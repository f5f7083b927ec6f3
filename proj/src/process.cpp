#include "fluctrel/process.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace fluctrel {

double fd_step(double xi) { return 1e-5 * (1.0 + std::abs(xi)); }

namespace {

void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteDerivative(what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Involution

void Involution::apply(const Vec& x, Vec& out) const {
  if (linear) {
    out.noalias() = (*linear) * x;
  } else if (map) {
    map(x, out);
  } else {
    out = x;
  }
}

Vec Involution::apply(const Vec& x) const {
  Vec out(x.size());
  apply(x, out);
  return out;
}

void Involution::jac(const Vec& x, Mat& out) const {
  int d = static_cast<int>(x.size());
  if (linear) {
    out = *linear;
    return;
  }
  if (!map) {
    out = Mat::Identity(d, d);
    return;
  }
  if (jacobian) {
    jacobian(x, out);
    return;
  }
  out.resize(d, d);
  Vec xp = x, xm = x, fp(d), fm(d);
  for (int j = 0; j < d; ++j) {
    double hj = fd_step(x[j]);
    xp[j] = x[j] + hj;
    xm[j] = x[j] - hj;
    map(xp, fp);
    map(xm, fm);
    out.col(j) = (fp - fm) / (2.0 * hj);
    xp[j] = x[j];
    xm[j] = x[j];
  }
}

double Involution::log_sigma(const Vec& x) const {
  if (is_identity()) return 0.0;
  if (linear) return std::log(std::abs(linear->determinant()));
  Mat j(x.size(), x.size());
  jac(x, j);
  return std::log(std::abs(j.determinant()));
}

Involution Involution::from_matrix(const Mat& r) {
  Involution inv;
  inv.linear = r;
  return inv;
}

Involution Involution::negate(int dim) {
  return from_matrix(-Mat::Identity(dim, dim));
}

Involution Involution::momentum_flip(int nq) {
  Mat r = Mat::Identity(2 * nq, 2 * nq);
  r.bottomRightCorner(nq, nq) = -Mat::Identity(nq, nq);
  return from_matrix(r);
}

// ---------------------------------------------------------------------------
// PhiFamily

void PhiFamily::gradient(double t, const Vec& x, Vec& out) const {
  if (grad) {
    grad(t, x, out);
    return;
  }
  int d = static_cast<int>(x.size());
  out.resize(d);
  Vec xp = x;
  for (int j = 0; j < d; ++j) {
    double hj = fd_step(x[j]);
    xp[j] = x[j] + hj;
    double vp = value(t, xp);
    xp[j] = x[j] - hj;
    double vm = value(t, xp);
    xp[j] = x[j];
    out[j] = (vp - vm) / (2.0 * hj);
  }
  check_finite(out, "phi gradient");
}

double PhiFamily::time_derivative(double t, const Vec& x) const {
  if (dt) return dt(t, x);
  double ht = 1e-6 * (1.0 + std::abs(t));
  return (value(t + ht, x) - value(t - ht, x)) / (2.0 * ht);
}

Vec PhiFamily::draw(double t, RngStream& rng) const {
  if (!sample) throw SamplerUnavailable("phi family has no sampler");
  return sample(t, rng);
}

// ---------------------------------------------------------------------------
// KraichnanTensor

KraichnanTensor KraichnanTensor::isotropic(int d, double amplitude,
                                           double compressibility) {
  KraichnanTensor k;
  k.flow_dim = d;
  if (d == 1) {
    // One dimension is purely potential; amplitude is the scalar variance.
    k.a = 0.0;
    k.b = amplitude / 2.0;
    return k;
  }
  double p = compressibility;
  k.a = amplitude * (d + 1.0 - 2.0 * p);
  k.b = amplitude * (p * d - 1.0);
  return k;
}

double KraichnanTensor::tensor(int i, int j, int k, int l) const {
  double v = 0.0;
  if (i == j && k == l) v += a;
  if (i == k && j == l) v += b;
  if (i == l && j == k) v += b;
  return v;
}

Mat KraichnanTensor::strat_drift() const {
  // B^i_l = -(1/2) C^ik_kl = -(1/2)(a + b(d+1)) delta^i_l.
  int d = flow_dim;
  return -0.5 * lambda_trace() * Mat::Identity(d, d);
}

Mat KraichnanTensor::sample_noise(double sqrt_h, const double* normals) const {
  int d = flow_dim;
  Mat w(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) w(r, c) = normals[c * d + r];
  Mat sym = 0.5 * (w + w.transpose());
  double tr = w.trace() / d;
  Mat sym0 = sym - tr * Mat::Identity(d, d);
  Mat antis = 0.5 * (w - w.transpose());
  double ls = std::sqrt(std::max(0.0, lambda_sym()));
  double la = std::sqrt(std::max(0.0, lambda_antisym()));
  double lt = std::sqrt(std::max(0.0, lambda_trace()));
  return sqrt_h * (ls * sym0 + la * antis + lt * tr * Mat::Identity(d, d));
}

void KraichnanTensor::covariance(const Mat& X, const Mat& Y, Mat& out) const {
  int d = flow_dim;
  int dd = d * d;
  out.resize(dd, dd);
  // Pair index (i,k) -> i*d + k (row), (j,l) -> j*d + l (col).
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) {
          double s = 0.0;
          for (int n = 0; n < d; ++n)
            for (int m = 0; m < d; ++m)
              s += tensor(i, j, n, m) * X(n, k) * Y(m, l);
          out(i * d + k, j * d + l) = s;
        }
}

// ---------------------------------------------------------------------------
// ProcessSpec

void ProcessSpec::dplus(double t, const Vec& x, Vec& out) const {
  if (drift_plus)
    drift_plus(t, x, out);
  else
    out.setZero(dim);
}

void ProcessSpec::dminus(double t, const Vec& x, Vec& out) const {
  if (drift_minus)
    drift_minus(t, x, out);
  else
    out.setZero(dim);
}

void ProcessSpec::drift(double t, const Vec& x, Vec& out) const {
  dplus(t, x, out);
  if (drift_minus) {
    Vec tmp(dim);
    drift_minus(t, x, tmp);
    out += tmp;
  }
}

void ProcessSpec::diffusion(double t, const Vec& x, Mat& out) const {
  if (kraichnan) {
    Eigen::Map<const Mat> X(x.data(), kraichnan->flow_dim, kraichnan->flow_dim);
    kraichnan->covariance(X, X, out);
    return;
  }
  if (!covariance) {
    out.setZero(dim, dim);
    return;
  }
  covariance(t, x, x, out);
}

void ProcessSpec::ito_correction(double t, const Vec& x, Vec& out) const {
  if (ito_correction_fn) {
    ito_correction_fn(t, x, out);
    return;
  }
  if (additive_noise || !has_noise()) {
    out.setZero(dim);
    return;
  }
  if (kraichnan) {
    // dX = S dt X is already Ito with zero drift; the Stratonovich form has
    // drift B X, so the Ito correction is -B X.
    Eigen::Map<const Mat> X(x.data(), kraichnan->flow_dim, kraichnan->flow_dim);
    Mat r = -kraichnan->strat_drift() * X;
    out = Eigen::Map<const Vec>(r.data(), dim);
    return;
  }
  // (1/2) d_{x^j} D^{ij}(x,y)|_{y=x} by central differences in the first slot.
  out.setZero(dim);
  Mat dp(dim, dim), dm(dim, dim);
  Vec xp = x, xm = x;
  for (int j = 0; j < dim; ++j) {
    double hj = fd_step(x[j]);
    xp[j] = x[j] + hj;
    xm[j] = x[j] - hj;
    covariance(t, xp, x, dp);
    covariance(t, xm, x, dm);
    for (int i = 0; i < dim; ++i) out[i] += 0.5 * (dp(i, j) - dm(i, j)) / (2.0 * hj);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  check_finite(out, "ito correction");
}

void ProcessSpec::hat_shift(double t, const Vec& x, Vec& out) const {
  if (hat_shift_fn) {
    hat_shift_fn(t, x, out);
    return;
  }
  if (additive_noise || !has_noise()) {
    out.setZero(dim);
    return;
  }
  if (kraichnan) {
    // shift^(ik) = (1/2) sum_(j,l) d_{Y^j_l} [C^ij_nm X^n_k Y^m_l]|_{Y=X}.
    // Each l contributes C^ij_nj X^n_k, so the l-sum gives a factor d and
    // the shift is (d/2) K X with K^i_n = C^ij_nj.
    out.setZero(dim);
    Eigen::Map<const Mat> X(x.data(), kraichnan->flow_dim, kraichnan->flow_dim);
    int d = kraichnan->flow_dim;
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int j = 0; j < d; ++j)
          for (int n = 0; n < d; ++n) s += kraichnan->tensor(i, j, n, j) * X(n, k);
        out[i * d + k] = 0.5 * d * s;
      }
    return;
  }
  out.setZero(dim);
  Mat dp(dim, dim), dm(dim, dim);
  Vec yp = x, ym = x;
  for (int j = 0; j < dim; ++j) {
    double hj = fd_step(x[j]);
    yp[j] = x[j] + hj;
    ym[j] = x[j] - hj;
    covariance(t, x, yp, dp);
    covariance(t, x, ym, dm);
    for (int i = 0; i < dim; ++i) out[i] += 0.5 * (dp(i, j) - dm(i, j)) / (2.0 * hj);
    yp[j] = x[j];
    ym[j] = x[j];
  }
  check_finite(out, "hat shift");
}

void ProcessSpec::hat_drift(double t, const Vec& x, Vec& out) const {
  drift(t, x, out);
  if (!additive_noise && has_noise()) {
    Vec s(dim);
    hat_shift(t, x, s);
    out -= s;
  }
}

void ProcessSpec::hat_drift_plus(double t, const Vec& x, Vec& out) const {
  dplus(t, x, out);
  if (!additive_noise && has_noise()) {
    Vec s(dim);
    hat_shift(t, x, s);
    out -= s;
  }
}

double ProcessSpec::divergence_plus(double t, const Vec& x) const {
  if (div_plus) return div_plus(t, x);
  if (!drift_plus) return 0.0;
  double s = 0.0;
  Vec xp = x, fp(dim), fm(dim);
  for (int j = 0; j < dim; ++j) {
    double hj = fd_step(x[j]);
    xp[j] = x[j] + hj;
    drift_plus(t, xp, fp);
    xp[j] = x[j] - hj;
    drift_plus(t, xp, fm);
    xp[j] = x[j];
    s += (fp[j] - fm[j]) / (2.0 * hj);
  }
  if (!std::isfinite(s)) throw NonFiniteDerivative("divergence_plus");
  return s;
}

double ProcessSpec::divergence_minus(double t, const Vec& x) const {
  if (div_minus) return div_minus(t, x);
  if (!drift_minus) return 0.0;
  double s = 0.0;
  Vec xp = x, fp(dim), fm(dim);
  for (int j = 0; j < dim; ++j) {
    double hj = fd_step(x[j]);
    xp[j] = x[j] + hj;
    drift_minus(t, xp, fp);
    xp[j] = x[j] - hj;
    drift_minus(t, xp, fm);
    xp[j] = x[j];
    s += (fp[j] - fm[j]) / (2.0 * hj);
  }
  if (!std::isfinite(s)) throw NonFiniteDerivative("divergence_minus");
  return s;
}

void ProcessSpec::jacobian(double t, const Vec& x, Mat& out) const {
  if (drift_jacobian) {
    drift_jacobian(t, x, out);
    return;
  }
  out.resize(dim, dim);
  Vec xp = x, fp(dim), fm(dim);
  for (int j = 0; j < dim; ++j) {
    double hj = fd_step(x[j]);
    xp[j] = x[j] + hj;
    drift(t, xp, fp);
    xp[j] = x[j] - hj;
    drift(t, xp, fm);
    xp[j] = x[j];
    out.col(j) = (fp - fm) / (2.0 * hj);
  }
  if (!out.allFinite()) throw NonFiniteDerivative("drift jacobian");
}

// ---------------------------------------------------------------------------
// Linear algebra helpers

Mat psd_factor(const Mat& m) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success)
    throw CovarianceNotPSD("eigenvalue factorization failed");
  Vec ev = es.eigenvalues();
  double floor = -1e-12 * std::max(1e-300, m.trace());
  Vec s(ev.size());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < floor) throw CovarianceNotPSD("negative eigenvalue in d(x)");
    s[i] = std::sqrt(std::max(0.0, ev[i]));
  }
  return es.eigenvectors() * s.asDiagonal();
}

Mat checked_inverse(const Mat& d, double cond_limit) {
  Eigen::SelfAdjointEigenSolver<Mat> es(d);
  if (es.info() != Eigen::Success)
    throw SingularDiffusion("diffusion eigenfactorization failed");
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo > cond_limit)
    throw SingularDiffusion("d(x) not invertible (condition number)");
  return es.eigenvectors() *
         es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

std::pair<Vec, Vec> drift_corrections(const ProcessSpec& spec, double t, const Vec& x) {
  Vec ito(spec.dim), hat(spec.dim);
  spec.ito_correction(t, x, ito);
  spec.hat_shift(t, x, hat);
  return {ito, hat};
}

// ---------------------------------------------------------------------------
// Generator

namespace {

void probe_gradient(const ScalarProbe& f, const Vec& x, Vec& g) {
  if (f.grad) {
    f.grad(x, g);
    return;
  }
  int d = static_cast<int>(x.size());
  g.resize(d);
  Vec xp = x;
  for (int j = 0; j < d; ++j) {
    double hj = fd_step(x[j]);
    xp[j] = x[j] + hj;
    double vp = f.f(xp);
    xp[j] = x[j] - hj;
    double vm = f.f(xp);
    xp[j] = x[j];
    g[j] = (vp - vm) / (2.0 * hj);
  }
  check_finite(g, "probe gradient");
}

void probe_hessian(const ScalarProbe& f, const Vec& x, Mat& hess) {
  if (f.hessian) {
    f.hessian(x, hess);
    return;
  }
  int d = static_cast<int>(x.size());
  hess.resize(d, d);
  double f0 = f.f(x);
  Vec xp = x;
  for (int i = 0; i < d; ++i) {
    double hi = fd_step(x[i]);
    xp[i] = x[i] + hi;
    double fp = f.f(xp);
    xp[i] = x[i] - hi;
    double fm = f.f(xp);
    xp[i] = x[i];
    hess(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (int j = i + 1; j < d; ++j) {
      double hj = fd_step(x[j]);
      xp[i] = x[i] + hi; xp[j] = x[j] + hj;
      double fpp = f.f(xp);
      xp[j] = x[j] - hj;
      double fpm = f.f(xp);
      xp[i] = x[i] - hi; xp[j] = x[j] + hj;
      double fmp = f.f(xp);
      xp[j] = x[j] - hj;
      double fmm = f.f(xp);
      xp[i] = x[i]; xp[j] = x[j];
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
    }
  }
  if (!hess.allFinite()) throw NonFiniteDerivative("probe hessian");
}

// Divergence of the columns of d(x): out_i = d_j d^{ij}(x).
void diffusion_divergence(const ProcessSpec& spec, double t, const Vec& x, Vec& out) {
  int d = spec.dim;
  out.setZero(d);
  if (spec.additive_noise || !spec.has_noise()) return;
  Mat dp(d, d), dm(d, d);
  Vec xp = x;
  for (int j = 0; j < d; ++j) {
    double hj = fd_step(x[j]);
    xp[j] = x[j] + hj;
    spec.diffusion(t, xp, dp);
    xp[j] = x[j] - hj;
    spec.diffusion(t, xp, dm);
    xp[j] = x[j];
    for (int i = 0; i < d; ++i) out[i] += (dp(i, j) - dm(i, j)) / (2.0 * hj);
  }
  check_finite(out, "diffusion divergence");
}

double hat_divergence(const ProcessSpec& spec, double t, const Vec& x,
                      GeneratorPart part) {
  if (part == GeneratorPart::minus) return spec.divergence_minus(t, x);
  int d = spec.dim;
  Vec fp(d), fm(d);
  double s = 0.0;
  Vec xp = x;
  auto eval = [&](double tt, const Vec& xx, Vec& out) {
    switch (part) {
      case GeneratorPart::full: spec.hat_drift(tt, xx, out); break;
      case GeneratorPart::plus: spec.hat_drift_plus(tt, xx, out); break;
      case GeneratorPart::minus: spec.dminus(tt, xx, out); break;
    }
  };
  for (int j = 0; j < d; ++j) {
    double hj = fd_step(x[j]);
    xp[j] = x[j] + hj;
    eval(t, xp, fp);
    xp[j] = x[j] - hj;
    eval(t, xp, fm);
    xp[j] = x[j];
    s += (fp[j] - fm[j]) / (2.0 * hj);
  }
  if (!std::isfinite(s)) throw NonFiniteDerivative("hat drift divergence");
  return s;
}

}  // namespace

double generator_apply(const ProcessSpec& spec, double t, const ScalarProbe& f,
                       const Vec& x, bool adjoint, GeneratorPart part) {
  int d = spec.dim;
  Vec g(d);
  probe_gradient(f, x, g);

  Vec uh(d);
  switch (part) {
    case GeneratorPart::full: spec.hat_drift(t, x, uh); break;
    case GeneratorPart::plus: spec.hat_drift_plus(t, x, uh); break;
    case GeneratorPart::minus: spec.dminus(t, x, uh); break;
  }

  bool second_order = (part != GeneratorPart::minus) && spec.has_noise();

  if (!adjoint) {
    // L f = u^ . grad f + (1/2) (d_j d^ij) d_i f + (1/2) d^ij d_i d_j f
    double r = uh.dot(g);
    if (second_order) {
      Mat dmat(d, d), hess(d, d);
      spec.diffusion(t, x, dmat);
      Vec divd(d);
      diffusion_divergence(spec, t, x, divd);
      probe_hessian(f, x, hess);
      r += 0.5 * divd.dot(g) + 0.5 * (dmat.array() * hess.array()).sum();
    }
    return r;
  }

  // L^dag rho = -div(u^ rho) + (1/2) d_i (d^ij d_j rho)
  //           = -(div u^) rho - u^ . grad rho
  //             + (1/2) (d_i d^ij) d_j rho + (1/2) d^ij d_i d_j rho.
  double divu = hat_divergence(spec, t, x, part);
  double r = -divu * f.f(x) - uh.dot(g);
  if (second_order) {
    Mat dmat(d, d), hess(d, d);
    spec.diffusion(t, x, dmat);
    Vec divd(d);
    diffusion_divergence(spec, t, x, divd);
    probe_hessian(f, x, hess);
    r += 0.5 * divd.dot(g) + 0.5 * (dmat.array() * hess.array()).sum();
  }
  return r;
}

}  // namespace fluctrel
