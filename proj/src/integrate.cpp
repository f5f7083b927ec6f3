#include "fluctrel/integrate.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace fluctrel {

int normals_per_step(const ProcessSpec& spec) {
  if (spec.kraichnan) return spec.kraichnan->normals_per_step();
  return spec.has_noise() ? spec.dim : 0;
}

namespace {

// Per-step noise increment from raw normals.  Additive-noise factorizations
// are cached by the caller.
struct NoiseApplier {
  const ProcessSpec& spec;
  double sqrt_h;
  Mat factor;          // cached L for additive noise
  bool cached = false;
  Mat dwork;

  explicit NoiseApplier(const ProcessSpec& s, double sqh)
      : spec(s), sqrt_h(sqh), dwork(s.dim, s.dim) {
    if (spec.additive_noise && spec.has_noise() && !spec.kraichnan) {
      spec.diffusion(0.0, Vec::Zero(spec.dim), dwork);
      factor = psd_factor(dwork);
      cached = true;
    }
  }

  void add(double t, const Vec& x, const double* normals, Vec& out) {
    if (spec.kraichnan) {
      int d = spec.kraichnan->flow_dim;
      Eigen::Map<const Mat> X(x.data(), d, d);
      Mat s = spec.kraichnan->sample_noise(sqrt_h, normals);
      Mat incr = s * X;
      out += Eigen::Map<const Vec>(incr.data(), spec.dim);
      return;
    }
    if (!spec.has_noise()) return;
    Eigen::Map<const Vec> xi(normals, spec.dim);
    if (cached) {
      out.noalias() += sqrt_h * (factor * xi);
      return;
    }
    spec.diffusion(t, x, dwork);
    Mat L = psd_factor(dwork);
    out.noalias() += sqrt_h * (L * xi);
  }
};

}  // namespace

Trajectory sample_path(const ProcessSpec& spec, const Vec& x0, double h,
                       RngStream stream, const IntegrateOptions& opt) {
  if (h <= 0.0) throw Error("sample_path: step must be positive");
  double T = opt.horizon < 0.0 ? spec.horizon : opt.horizon;
  int N = static_cast<int>(std::llround(T / h));
  if (N < 1) N = 1;

  Trajectory traj;
  traj.step = h;
  traj.t0 = opt.t0;
  traj.seed = stream.seed();
  traj.index = stream.index();
  traj.states.resize(spec.dim, N + 1);
  int npr = normals_per_step(spec);
  if (opt.record_noise && npr > 0) traj.noise_record.resize(npr, N);

  double sqrt_h = std::sqrt(h);
  NoiseApplier noise(spec, sqrt_h);

  Vec x = x0, u(spec.dim), corr(spec.dim);
  std::vector<double> xi(npr);
  traj.states.col(0) = x;

  for (int k = 0; k < N; ++k) {
    double t = traj.time(k);
    for (int i = 0; i < npr; ++i) xi[i] = stream.normal();
    if (opt.record_noise && npr > 0)
      for (int i = 0; i < npr; ++i) traj.noise_record(i, k) = xi[i];

    if (traj.escaped) {
      traj.states.col(k + 1) = x;
      continue;
    }

    spec.drift(t, x, u);
    if (!spec.additive_noise && spec.has_noise()) {
      spec.ito_correction(t, x, corr);
      u += corr;
    }
    Vec xn = x + h * u;
    noise.add(t, x, xi.data(), xn);

    if (spec.reinject) spec.reinject(xn);
    if (!xn.allFinite() || xn.cwiseAbs().maxCoeff() > spec.blowup_guard) {
      traj.escaped = true;
      traj.escape_step = k;
      traj.states.col(k + 1) = x;
      continue;
    }
    x = xn;
    traj.states.col(k + 1) = x;
  }
  return traj;
}

Vec noise_increment(const ProcessSpec& spec, const Trajectory& traj, int k) {
  if (traj.noise_record.size() == 0)
    throw MissingNoiseRecord("trajectory was integrated without noise record");
  double sqrt_h = std::sqrt(traj.step);
  NoiseApplier noise(spec, sqrt_h);
  Vec out = Vec::Zero(spec.dim);
  Vec xk = traj.states.col(k);
  std::vector<double> xi(traj.noise_record.rows());
  for (int i = 0; i < traj.noise_record.rows(); ++i) xi[i] = traj.noise_record(i, k);
  noise.add(traj.time(k), xk, xi.data(), out);
  return out;
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int nw = std::min<std::size_t>(workers, n);
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
}

std::vector<double> ensemble_map(
    std::size_t n, int workers,
    const std::function<double(std::size_t)>& per_trajectory) {
  std::vector<double> out(n);
  parallel_for(n, workers, [&](std::size_t i) { out[i] = per_trajectory(i); });
  return out;
}

}  // namespace fluctrel
