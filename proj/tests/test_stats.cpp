#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fluctrel/stats.hpp"

using namespace fluctrel;

TEST_CASE("mean and standard error") {
  std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  MeanSE m = mean_se(xs);
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.sample_std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("histogram binning and totals") {
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(i / 1000.0);
  Histogram h = make_histogram(xs, 10, 0.0, 1.0);
  CHECK(h.total == 1000);
  double sum = 0;
  for (double c : h.counts) sum += c;
  CHECK(sum == 1000);
  CHECK(h.find_bin(0.05) == 0);
  CHECK(h.find_bin(0.95) == 9);
  CHECK(h.find_bin(-1.0) == -1);
}

TEST_CASE("weighted linear fit recovers a line") {
  std::vector<double> x, y, s;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(3.0 + 2.0 * i);
    s.push_back(1.0);
  }
  LinearFit f = weighted_linear_fit(x, y, s);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(3.0));
}

TEST_CASE("log-mean-exp is stable for large exponents") {
  std::vector<double> v = {1000.0, 1000.0 + std::log(2.0)};
  CHECK(log_mean_exp(v) == doctest::Approx(1000.0 + std::log(1.5)));
  CHECK(exp_weight_ess(v) == doctest::Approx(9.0 / 5.0));
}

TEST_CASE("quantile edges split mass roughly evenly") {
  std::vector<double> xs;
  RngStream rng(5, 0);
  for (int i = 0; i < 20000; ++i) xs.push_back(rng.normal());
  auto e = quantile_edges(xs, 10);
  REQUIRE(e.size() == 11);
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] > e[i - 1]);
  int c = 0;
  for (double x : xs)
    if (x >= e[4] && x < e[5]) ++c;
  CHECK(c == doctest::Approx(2000).epsilon(0.05));
}

TEST_CASE("gauss panels integrate polynomials and exponentials") {
  auto f = [](double x) { return x * x * x - 2 * x + 1; };
  CHECK(gauss15(f, -1, 2) == doctest::Approx(0.75 * (16 - 1) / 3.0 - (4 - 1) + 3).epsilon(1e-12));
  auto g = [](double x) { return -x; };
  CHECK(log_gauss15(g, 0, 1) == doctest::Approx(std::log(1.0 - std::exp(-1.0))));
}

TEST_CASE("bootstrap statistic spread shrinks with n") {
  RngStream data_rng(7, 0);
  auto spread_at = [&](std::size_t n) {
    std::vector<double> xs(n);
    for (auto& x : xs) x = data_rng.normal();
    RngStream rng(11, 1, RngDomain::bootstrap);
    auto reps = bootstrap_statistic(xs, 64, rng,
                                    [](const std::vector<double>& v) { return mean_se(v).mean; });
    return mean_se(reps).sample_std;
  };
  double s1 = spread_at(500), s2 = spread_at(8000);
  CHECK(s2 < s1);
}
