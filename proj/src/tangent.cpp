#include "fluctrel/tangent.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace fluctrel {

Mat small_expm(const Mat& m) {
  int d = static_cast<int>(m.rows());
  if (d == 1) {
    Mat r(1, 1);
    r(0, 0) = std::exp(m(0, 0));
    return r;
  }
  if (d == 2) {
    // e^M = e^tau [cosh(s) I + sinh(s)/s B], M = tau I + B, B traceless,
    // s^2 = tau^2 - det M.
    double tau = 0.5 * m.trace();
    Mat b = m - tau * Mat::Identity(2, 2);
    double disc = b(0, 0) * b(0, 0) + b(0, 1) * b(1, 0);  // = -det B
    double ch, shs;  // cosh(s), sinh(s)/s
    if (disc > 0) {
      double s = std::sqrt(disc);
      ch = std::cosh(s);
      shs = std::sinh(s) / s;
    } else if (disc < 0) {
      double s = std::sqrt(-disc);
      ch = std::cos(s);
      shs = std::sin(s) / s;
    } else {
      ch = 1.0;
      shs = 1.0;
    }
    return std::exp(tau) * (ch * Mat::Identity(2, 2) + shs * b);
  }
  return m.exp();
}

// ---------------------------------------------------------------------------
// CocycleAccumulator

CocycleAccumulator::CocycleAccumulator(int d, int qr_interval)
    : d_(d),
      qr_interval_(std::max(1, qr_interval)),
      q_(Mat::Identity(d, d)),
      ptil_(Mat::Identity(d, d)),
      pending_(Mat::Identity(d, d)) {}

void CocycleAccumulator::apply(const Mat& e) {
  pending_ = e * pending_;
  if (++pending_count_ >= qr_interval_) flush();
}

void CocycleAccumulator::flush() {
  if (pending_count_ == 0) return;
  Mat m = pending_ * q_;
  Eigen::HouseholderQR<Mat> qr(m);
  Mat qfull = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Positive diagonal convention.
  for (int i = 0; i < d_; ++i) {
    if (r(i, i) < 0) {
      r.row(i) = -r.row(i);
      qfull.col(i) = -qfull.col(i);
    }
    if (r(i, i) <= 0.0 || !std::isfinite(r(i, i)))
      throw DegenerateCocycle("vanishing R diagonal in QR accumulation");
    logabsdet_.add(std::log(r(i, i)));
  }
  q_ = qfull;
  ptil_ = r * ptil_;
  double scale = ptil_.cwiseAbs().maxCoeff();
  if (scale > 0) {
    logscale_ += std::log(scale);
    ptil_ /= scale;
  }
  pending_ = Mat::Identity(d_, d_);
  pending_count_ = 0;
}

int CocycleAccumulator::det_sign() const {
  double dq = q_.determinant();
  return dq >= 0 ? sign_ : -sign_;
}

Vec CocycleAccumulator::stretching_logs(const Mat* metric_sqrt_T,
                                        const Mat* metric_inv_sqrt_0) const {
  Mat b = q_ * ptil_;
  if (metric_sqrt_T) b = (*metric_sqrt_T) * b;
  if (metric_inv_sqrt_0) b = b * (*metric_inv_sqrt_0);
  Eigen::JacobiSVD<Mat> svd(b);
  Vec rho(d_);
  for (int i = 0; i < d_; ++i) {
    double s = svd.singularValues()[i];
    if (s <= 0.0 || !std::isfinite(s))
      throw DegenerateCocycle("singular value underflow in stretching exponents");
    rho[i] = logscale_ + std::log(s);
  }
  return rho;  // Jacobi SVD returns non-increasing order
}

Mat CocycleAccumulator::dense() const {
  return std::exp(logscale_) * (q_ * ptil_);
}

// ---------------------------------------------------------------------------
// Tangent integration

namespace {

// Noise-field Jacobian increment N = sqrt(h) d_x [L(x) xi] by columns.
void noise_jacobian_fd(const ProcessSpec& spec, double t, const Vec& x,
                       const double* normals, double sqrt_h, Mat& out) {
  int d = spec.dim;
  Eigen::Map<const Vec> xi(normals, d);
  Mat dm(d, d);
  Vec xp = x;
  for (int j = 0; j < d; ++j) {
    double hj = fd_step(x[j]);
    xp[j] = x[j] + hj;
    spec.diffusion(t, xp, dm);
    Vec vp = psd_factor(dm) * xi;
    xp[j] = x[j] - hj;
    spec.diffusion(t, xp, dm);
    Vec vm = psd_factor(dm) * xi;
    xp[j] = x[j];
    out.col(j) = sqrt_h * (vp - vm) / (2.0 * hj);
  }
}

}  // namespace

TangentTrajectory evolve_tangent(const ProcessSpec& spec, const Vec& x0, double h,
                                 RngStream stream, const TangentOptions& opt) {
  double T = spec.horizon;
  int N = static_cast<int>(std::llround(T / h));
  if (N < 1) N = 1;
  double sqrt_h = std::sqrt(h);

  bool kr = spec.kraichnan.has_value();
  int cdim = kr ? spec.kraichnan->flow_dim : spec.dim;

  TangentTrajectory tan{Trajectory{}, CocycleAccumulator(cdim, opt.qr_interval)};
  tan.horizon = h * N;
  tan.base.step = h;
  tan.base.seed = stream.seed();
  tan.base.index = stream.index();

  if (opt.x0_cocycle.size() > 0) tan.cocycle.apply(opt.x0_cocycle);

  if (kr) {
    const KraichnanTensor& K = *spec.kraichnan;
    int npr = K.normals_per_step();
    if (opt.record_noise) tan.base.noise_record.resize(npr, N);
    std::vector<double> xi(npr);
    Mat B = K.strat_drift();
    double btr = B(0, 0);  // isotropic: B = btr * I
    Mat e(cdim, cdim);
    for (int k = 0; k < N; ++k) {
      for (int i = 0; i < npr; ++i) xi[i] = stream.normal();
      if (opt.record_noise)
        for (int i = 0; i < npr; ++i) tan.base.noise_record(i, k) = xi[i];
      Mat n = K.sample_noise(sqrt_h, xi.data());
      e.noalias() = Mat::Identity(cdim, cdim) + n + 0.5 * (n * n);
      if (btr != 0.0) e *= std::exp(h * btr);
      tan.cocycle.apply(e);
    }
    tan.cocycle.flush();
    return tan;
  }

  // General case: integrate the base path and the linearized flow together.
  if (opt.store_base_states) tan.base.states.resize(spec.dim, N + 1);
  int npr = normals_per_step(spec);
  if (npr > 0) tan.base.noise_record.resize(npr, N);

  Vec x = x0, u(spec.dim), corr(spec.dim);
  std::vector<double> xi(std::max(1, npr));
  Mat A(spec.dim, spec.dim), e(spec.dim, spec.dim), n(spec.dim, spec.dim);
  Mat dmat(spec.dim, spec.dim);
  bool state_noise = spec.has_noise() && !spec.additive_noise;
  if (opt.store_base_states) tan.base.states.col(0) = x;

  Mat Lconst;
  if (spec.has_noise() && spec.additive_noise) {
    spec.diffusion(0.0, x, dmat);
    Lconst = psd_factor(dmat);
  }

  for (int k = 0; k < N; ++k) {
    double t = k * h;
    for (int i = 0; i < npr; ++i) xi[i] = stream.normal();
    if (npr > 0)
      for (int i = 0; i < npr; ++i) tan.base.noise_record(i, k) = xi[i];

    spec.jacobian(t, x, A);
    e = small_expm(h * A);
    if (state_noise) {
      noise_jacobian_fd(spec, t, x, xi.data(), sqrt_h, n);
      e = e * (Mat::Identity(spec.dim, spec.dim) + n + 0.5 * (n * n));
    }
    tan.cocycle.apply(e);

    spec.drift(t, x, u);
    if (state_noise) {
      spec.ito_correction(t, x, corr);
      u += corr;
    }
    Vec xn = x + h * u;
    if (spec.has_noise()) {
      Eigen::Map<const Vec> xiv(xi.data(), spec.dim);
      if (spec.additive_noise) {
        xn.noalias() += sqrt_h * (Lconst * xiv);
      } else {
        spec.diffusion(t, x, dmat);
        xn.noalias() += sqrt_h * (psd_factor(dmat) * xiv);
      }
    }
    if (!xn.allFinite() || xn.cwiseAbs().maxCoeff() > spec.blowup_guard) {
      tan.escaped = true;
      tan.base.escaped = true;
      tan.base.escape_step = k;
      break;
    }
    x = xn;
    if (opt.store_base_states) tan.base.states.col(k + 1) = x;
  }
  tan.cocycle.flush();
  return tan;
}

double contraction_identity_residual(const TangentTrajectory& tan,
                                     const ProcessSpec& spec) {
  double h = tan.base.step;
  KahanSum target;

  if (spec.kraichnan) {
    const KraichnanTensor& K = *spec.kraichnan;
    double btr = K.strat_drift().trace();
    int N = static_cast<int>(tan.base.noise_record.cols());
    double sqrt_h = std::sqrt(h);
    for (int k = 0; k < N; ++k) {
      Mat s = K.sample_noise(sqrt_h, tan.base.noise_record.col(k).data());
      target.add(h * btr + s.trace());
    }
    return std::abs(tan.cocycle.log_abs_det() - target.value());
  }

  if (tan.base.states.size() == 0)
    throw Error("contraction check needs stored base states");
  int N = tan.base.steps();
  double sqrt_h = std::sqrt(h);
  bool state_noise = spec.has_noise() && !spec.additive_noise;
  Mat n(spec.dim, spec.dim);
  for (int k = 0; k < N; ++k) {
    double tm = tan.base.time(k) + 0.5 * h;
    Vec xm = 0.5 * (tan.base.states.col(k) + tan.base.states.col(k + 1));
    double div = spec.divergence_plus(tm, xm) + spec.divergence_minus(tm, xm);
    double term = h * div;
    if (state_noise) {
      noise_jacobian_fd(spec, tm, xm, tan.base.noise_record.col(k).data(), sqrt_h, n);
      term += n.trace();
    }
    target.add(term);
  }
  return std::abs(tan.cocycle.log_abs_det() - target.value());
}

MultiplicativeHistogramReport multiplicative_fr_histogram(
    const std::vector<Vec>& forward, const std::vector<Vec>& backward, int bins,
    int min_count) {
  if (forward.empty() || backward.empty())
    throw InsufficientOverlap("empty spectra ensembles");
  int d = static_cast<int>(forward[0].size());

  // Leading exponent of the forward samples; the mirror of rho~ under
  // negation-and-reversal has leading component -rho_d.
  double lo = 1e300, hi = -1e300;
  for (const auto& r : forward) {
    lo = std::min(lo, r[0]);
    hi = std::max(hi, r[0]);
  }
  for (const auto& r : backward) {
    lo = std::min(lo, -r[d - 1]);
    hi = std::max(hi, -r[d - 1]);
  }
  double pad = (hi - lo) * 1e-9 + 1e-12;
  hi += pad;

  std::vector<double> cf(bins, 0.0), wf_sum(bins, 0.0), wf_sq(bins, 0.0);
  std::vector<double> cb(bins, 0.0);
  auto bin_of = [&](double v) {
    if (v < lo || v >= hi) return -1;
    return std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
  };
  for (const auto& r : forward) {
    int b = bin_of(r[0]);
    if (b < 0) continue;
    double w = std::exp(r.sum());
    cf[b] += 1.0;
    wf_sum[b] += w;
    wf_sq[b] += w * w;
  }
  for (const auto& r : backward) {
    int b = bin_of(-r[d - 1]);
    if (b >= 0) cb[b] += 1.0;
  }

  MultiplicativeHistogramReport rep;
  double nf = static_cast<double>(forward.size());
  double nb = static_cast<double>(backward.size());
  for (int b = 0; b < bins; ++b) {
    if (cf[b] < min_count || cb[b] < min_count) continue;
    double m1 = wf_sum[b] / nf;                      // E_f[e^{sum rho} 1_bin]
    double v1 = (wf_sq[b] / nf - m1 * m1) / nf;
    double p2 = cb[b] / nb;                          // P_b(mirrored bin)
    double v2 = p2 * (1.0 - p2) / nb;
    double z = std::abs(m1 - p2) / std::sqrt(std::max(v1 + v2, 1e-300));
    rep.max_z = std::max(rep.max_z, z);
    ++rep.cells;
  }
  if (rep.cells < 1) throw InsufficientOverlap("no bins with enough counts");
  rep.pass = rep.max_z < 4.0;
  return rep;
}

StretchingSpectrum stretching_exponents(const TangentTrajectory& tan,
                                        const Mat* metric_T, const Mat* metric_0) {
  StretchingSpectrum s;
  s.horizon = tan.horizon;
  if (metric_T || metric_0) {
    Mat mt, m0i;
    const Mat* a = nullptr;
    const Mat* b = nullptr;
    if (metric_T) {
      Eigen::SelfAdjointEigenSolver<Mat> es(*metric_T);
      mt = es.operatorSqrt();
      a = &mt;
    }
    if (metric_0) {
      Eigen::SelfAdjointEigenSolver<Mat> es(*metric_0);
      m0i = es.operatorInverseSqrt();
      b = &m0i;
    }
    s.rho = tan.cocycle.stretching_logs(a, b);
  } else {
    s.rho = tan.cocycle.stretching_logs();
  }
  return s;
}

}  // namespace fluctrel
