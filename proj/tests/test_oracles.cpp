#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "fluctrel/oracles.hpp"
#include "fluctrel/rng.hpp"
#include "fluctrel/stats.hpp"

using namespace fluctrel;

TEST_CASE("scalar C_t = 1 - e^{-2t} and C_inf = 1") {
  Mat M(1, 1), G(1, 1);
  M << -1.0;
  G << 1.0;
  for (double t : {0.1, 0.5, 2.0}) {
    Mat Ct = ct_integral(M, G, t);
    CHECK(Ct(0, 0) == doctest::Approx(1.0 - std::exp(-2.0 * t)).epsilon(1e-9));
  }
  CHECK(ct_integral(M, G, std::numeric_limits<double>::infinity())(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ct_integral(M, G, 0.0).norm() == 0.0);
}

TEST_CASE("rotation-generator model: M C + C M^T = -2 Gamma with C = I") {
  Mat G = Mat::Identity(2, 2);
  Mat J(2, 2);
  J << 0, 1, -1, 0;
  LinearModel m = LinearModel::from_gpc(G, J, Mat::Identity(2, 2));
  CHECK((m.M - (-(G - J))).norm() < 1e-14);
  Mat C = lyapunov_stationary(m.M, G);
  CHECK((C - Mat::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("round trip: Pi from (M, Gamma), then M from (Gamma, Pi, C)") {
  Mat M(2, 2), G(2, 2);
  M << -1.0, 0.4, -0.3, -1.5;
  G << 1.0, 0.2, 0.2, 0.8;
  LinearModel a = LinearModel::from_mgamma(M, G);
  LinearModel b = LinearModel::from_gpc(G, a.pi, a.C);
  CHECK((b.M - M).norm() < 1e-10);
}

TEST_CASE("random (Gamma>0, Pi antisym, C>0) triples give stable drifts") {
  RngStream rng(2024, 0);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 2 + (trial % 3);
    Mat A(d, d), B(d, d), S(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        A(i, j) = rng.normal();
        B(i, j) = rng.normal();
        S(i, j) = rng.normal();
      }
    Mat gamma = A * A.transpose() + 0.1 * Mat::Identity(d, d);
    Mat pi = 0.5 * (B - B.transpose());
    Mat C = S * S.transpose() + 0.1 * Mat::Identity(d, d);
    // from_gpc validates Re spec(M) < 0 internally
    LinearModel m = LinearModel::from_gpc(gamma, pi, C);
    CHECK((m.M * C + C * m.M.transpose() + 2.0 * gamma).norm() < 1e-10 * gamma.norm());
  }
}

TEST_CASE("gaussian kernels: scalar OU and Chapman-Kolmogorov") {
  Mat M(1, 1), G(1, 1);
  M << -1.0;
  G << 1.0;
  LinearModel m = LinearModel::from_mgamma(M, G, 1.0);
  Vec x(1);
  x[0] = 2.0;
  GaussianKernel k = gaussian_kernel(m, 0.7, x);
  CHECK(k.mean[0] == doctest::Approx(2.0 * std::exp(-0.7)));
  CHECK(k.cov(0, 0) == doctest::Approx(1.0 - std::exp(-1.4)).epsilon(1e-9));

  // kernel(t1) o kernel(t2) = kernel(t1 + t2) moments
  double t1 = 0.4, t2 = 0.9;
  GaussianKernel k1 = gaussian_kernel(m, t1, x);
  Mat e2 = ((t2 * M).exp());
  Vec mean12 = e2 * k1.mean;
  Mat cov12 = e2 * k1.cov * e2.transpose() + gaussian_kernel(m, t2, x).cov -
              e2 * gaussian_kernel(m, 0.0, x).cov * e2.transpose();
  GaussianKernel k12 = gaussian_kernel(m, t1 + t2, x);
  CHECK((mean12 - k12.mean).norm() < 1e-10);
  CHECK((cov12 - k12.cov).norm() < 1e-10);
}

TEST_CASE("stationary entropy rate") {
  Mat G = Mat::Identity(2, 2);
  Mat J(2, 2);
  J << 0, 1, -1, 0;
  CHECK(stationary_entropy_rate(LinearModel::from_gpc(G, Mat::Zero(2, 2),
                                                      Mat::Identity(2, 2))) ==
        doctest::Approx(0.0));
  for (double alpha : {0.5, 1.0}) {
    LinearModel m = LinearModel::from_gpc(G, alpha * J, Mat::Identity(2, 2));
    CHECK(stationary_entropy_rate(m) == doctest::Approx(2.0 * alpha * alpha));
  }
  Mat sing = Mat::Zero(2, 2);
  LinearModel bad = LinearModel::from_gpc(G, J, Mat::Identity(2, 2));
  bad.gamma = sing;
  CHECK_THROWS_AS(stationary_entropy_rate(bad), SingularGamma);
}

TEST_CASE("flux density: normalization, tails, current, and stationarity") {
  FluxModel m = FluxModel::cubic(1.0 / 3.0, 0.0, 1.0);
  FluxDensity f = flux_invariant_density(m);

  // density integrates to 1 over the window by construction
  double mass = 0.0;
  for (std::size_t i = 1; i < f.grid.size(); ++i)
    mass += 0.5 * (f.grid[i] - f.grid[i - 1]) * (f.density[i] + f.density[i - 1]);
  CHECK(mass < 1.0);
  CHECK(mass > 0.9);  // window holds the bulk; tails carry the rest

  // current is negative (escape to -inf) and j = -1/(beta N)
  CHECK(f.current < 0.0);
  CHECK(f.current == doctest::Approx(-1.0 / f.normalization));

  // tails fall off like x^{-2} (k = 3)
  double r1 = f.rho(60.0), r2 = f.rho(120.0);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.1));
  double l1 = f.rho(-60.0), l2 = f.rho(-120.0);
  CHECK(l1 / l2 == doctest::Approx(4.0).epsilon(0.1));

  // interior stationarity: L^dag rho = -(d/dx) j = 0 via the current form
  // j(x) = -H' rho - beta^-1 rho': finite differences on the table.
  double worst = 0.0;
  for (double x : {-3.0, -1.0, 0.0, 0.5, 2.0, 4.0}) {
    double d = 1e-4;
    double rp = f.rho(x + d), rm = f.rho(x - d);
    double j = -m.Hp(x) * f.rho(x) - (rp - rm) / (2.0 * d);
    worst = std::max(worst, std::abs(j - f.current) / std::abs(f.current));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("inertial-particle exponent: limits and substitution identity") {
  double c = 2.0;
  // tau -> infinity approaches the E = 0 Anderson value
  double big_tau = lyapunov_inertial(1e7, c);
  double anderson0 = lyapunov_anderson(0.0, c);
  CHECK(big_tau == doctest::Approx(anderson0).epsilon(1e-4));
  CHECK(anderson0 > 0.0);

  // substitution: lambda_inertial(tau) = lambda_anderson(-1/(4 tau^2)) - 1/(2 tau)
  for (double tau : {1.0, 2.5}) {
    double lhs = lyapunov_inertial(tau, c);
    double rhs = lyapunov_anderson(-1.0 / (4.0 * tau * tau), c) - 1.0 / (2.0 * tau);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
  }

  // small damping keeps the exponent positive; stronger damping lowers it
  CHECK(lyapunov_inertial(10.0, c) > 0.0);
  CHECK(lyapunov_inertial(10.0, c) > lyapunov_inertial(0.8, c));
}

TEST_CASE("wrong parity raises") {
  FluxModel even;
  even.H_coeffs = {0.0, 0.0, 0.0, 0.0, 0.25};
  CHECK_THROWS_AS(flux_invariant_density(even), WrongParity);
}
