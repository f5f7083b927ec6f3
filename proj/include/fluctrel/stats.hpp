#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fluctrel/rng.hpp"

namespace fluctrel {

// Compensated (Kahan) accumulator.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

struct MeanSE {
  double mean = 0.0;
  double std_error = 0.0;
  double sample_std = 0.0;
  std::size_t n = 0;
};

MeanSE mean_se(const std::vector<double>& xs);

// Mean/SE after discarding `trim_fraction` of the mass at each tail.
MeanSE trimmed_mean_se(std::vector<double> xs, double trim_fraction);

struct Histogram {
  std::vector<double> edges;   // size bins+1
  std::vector<double> counts;  // size bins
  std::size_t total = 0;       // number of in-range samples

  int find_bin(double x) const;
  double width(int b) const { return edges[b + 1] - edges[b]; }
  double center(int b) const { return 0.5 * (edges[b] + edges[b + 1]); }
};

Histogram make_histogram(const std::vector<double>& xs, int bins);
Histogram make_histogram(const std::vector<double>& xs, int bins, double lo, double hi);

// Bin edges with (approximately) equal empirical mass per bin.
std::vector<double> quantile_edges(std::vector<double> xs, int bins);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

// Weighted least squares y ~ a + b x with per-point standard deviations.
LinearFit weighted_linear_fit(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma);

// log( mean_i exp(v_i) ) computed stably.
double log_mean_exp(const std::vector<double>& v);

// Effective sample size of the weights exp(v_i - max v).
double exp_weight_ess(const std::vector<double>& v);

// Jackknife-bias-corrected log-mean-exp over `blocks` contiguous blocks.
double log_mean_exp_jackknife(const std::vector<double>& v, int blocks = 20);

// Statistic over bootstrap resamples; returns per-replicate values.
std::vector<double> bootstrap_statistic(
    const std::vector<double>& xs, int replicates, RngStream& rng,
    const std::function<double(const std::vector<double>&)>& stat);

// Halton sequence point in [0,1)^dim (quasi-random probe grids).
std::vector<double> halton_point(std::uint64_t i, int dim);

// 15-point Gauss-Legendre panel integrals, plain and in log space.
double gauss15(const std::function<double(double)>& f, double a, double b);
double log_gauss15(const std::function<double(double)>& g, double a, double b);
double log_add_exp(double a, double b);

}  // namespace fluctrel
