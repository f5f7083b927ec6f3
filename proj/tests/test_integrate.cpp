#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fluctrel/catalog.hpp"
#include "fluctrel/integrate.hpp"
#include "fluctrel/oracles.hpp"
#include "fluctrel/stats.hpp"

using namespace fluctrel;

TEST_CASE("zero drift, zero noise: constant path") {
  ProcessSpec s;
  s.dim = 2;
  s.horizon = 1.0;
  Vec x0(2);
  x0 << 0.3, -1.2;
  Trajectory t = sample_path(s, x0, 1e-2, RngStream(1, 0));
  CHECK((t.state(t.steps()) - x0).norm() == 0.0);
  CHECK(t.steps() == 100);
}

TEST_CASE("OU ensemble mean matches e^{-T} x0 within 3 SE") {
  ProcessSpec s = make_ou({});
  double h = 1e-3, x0v = 1.0;
  std::size_t n = 20000;
  Vec x0(1);
  x0[0] = x0v;
  std::vector<double> xT(n);
  parallel_for(n, 1, [&](std::size_t i) {
    Trajectory t = sample_path(s, x0, h, RngStream(99, i),
                               IntegrateOptions{false, 0.0, -1.0});
    xT[i] = t.state(t.steps())[0];
  });
  MeanSE m = mean_se(xT);
  double target = std::exp(-1.0) * x0v;
  CHECK(std::abs(m.mean - target) < 3.0 * m.std_error + 1e-3);
}

TEST_CASE("linear 2-d ensemble covariance matches the C_t oracle") {
  ProcessSpec s = make_linear2d({{"T", 0.5}});
  Mat M(2, 2);
  s.jacobian(0.0, Vec::Zero(2), M);
  Mat Ct = ct_integral(M, Mat::Identity(2, 2), 0.5);

  std::size_t n = 40000;
  Mat acc = Mat::Zero(2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    Trajectory t = sample_path(s, Vec::Zero(2), 1e-3, RngStream(7, i),
                               IntegrateOptions{false, 0.0, -1.0});
    Vec x = t.state(t.steps());
    acc += x * x.transpose();
  }
  acc /= static_cast<double>(n);
  // entrywise 3-sigma-ish bound for second moments at this n
  double tol = 3.0 * 1.5 / std::sqrt(static_cast<double>(n));
  CHECK((acc - Ct).cwiseAbs().maxCoeff() < tol);
}

TEST_CASE("identical (seed, index, h) is bitwise reproducible; workers irrelevant") {
  ProcessSpec s = make_breathing_ou({});
  Vec x0(1);
  x0[0] = 0.5;
  auto run = [&](int workers) {
    std::vector<double> endpoints(64);
    parallel_for(64, workers, [&](std::size_t i) {
      Trajectory t = sample_path(s, x0, 1e-3, RngStream(5, i));
      endpoints[i] = t.state(t.steps())[0];
    });
    return endpoints;
  };
  auto a = run(1), b = run(4);
  for (int i = 0; i < 64; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("weak convergence: OU mean error scales O(h)") {
  // beta large kills the noise contribution to the mean error; the bias of
  // the Euler scheme on the mean is deterministic and O(h).
  std::size_t n = 20000;
  double x0v = 3.0;
  std::vector<double> hs = {8e-3, 4e-3, 2e-3};
  std::vector<double> errs;
  for (double h : hs) {
    ProcessSpec s = make_ou({{"beta", 100.0}});
    Vec x0(1);
    x0[0] = x0v;
    std::vector<double> xT(n);
    parallel_for(n, 1, [&](std::size_t i) {
      Trajectory t = sample_path(s, x0, h, RngStream(31, i),
                                 IntegrateOptions{false, 0.0, -1.0});
      xT[i] = t.state(t.steps())[0];
    });
    errs.push_back(std::abs(mean_se(xT).mean - std::exp(-1.0) * x0v));
  }
  double slope1 = std::log2(errs[0] / errs[1]);
  double slope2 = std::log2(errs[1] / errs[2]);
  CHECK(slope1 > 0.7);
  CHECK(slope1 < 1.3);
  CHECK(slope2 > 0.7);
  CHECK(slope2 < 1.3);
}

TEST_CASE("blowup guard flags escaping paths instead of aborting") {
  ProcessSpec s;
  s.dim = 1;
  s.horizon = 10.0;
  s.family_tag = "explosive";
  s.drift_plus = [](double, const Vec& x, Vec& o) { o[0] = x[0] * x[0] * x[0]; };
  s.blowup_guard = 1e6;
  Vec x0(1);
  x0[0] = 1.5;
  Trajectory t = sample_path(s, x0, 1e-3, RngStream(0, 0));
  CHECK(t.escaped);
  CHECK(t.escape_step >= 0);
  CHECK(t.states.allFinite());
}

TEST_CASE("flux1d re-injection keeps the path alive") {
  ProcessSpec s = make_flux1d({{"T", 20.0}});
  Vec x0(1);
  x0[0] = 0.0;
  Trajectory t = sample_path(s, x0, 1e-3, RngStream(3, 1),
                             IntegrateOptions{false, 0.0, -1.0});
  CHECK(!t.escaped);
  // the path should visit the re-entry side at least once over T = 20
  double mn = t.states.minCoeff(), mx = t.states.maxCoeff();
  CHECK(mn < -5.0);
  CHECK(mx > 5.0);
}

TEST_CASE("noise increments reconstruct the update exactly") {
  ProcessSpec s = make_linear2d({});
  Vec x0(2);
  x0 << 0.2, -0.1;
  double h = 1e-2;
  Trajectory t = sample_path(s, x0, h, RngStream(17, 0));
  for (int k = 0; k < 5; ++k) {
    Vec u(2);
    s.drift(t.time(k), t.state(k), u);
    Vec pred = t.state(k) + h * u + noise_increment(s, t, k);
    CHECK((pred - t.state(k + 1)).norm() < 1e-14);
  }
}
