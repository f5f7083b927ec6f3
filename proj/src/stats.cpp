#include "fluctrel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fluctrel/errors.hpp"

namespace fluctrel {

MeanSE mean_se(const std::vector<double>& xs) {
  MeanSE r;
  r.n = xs.size();
  if (r.n == 0) return r;
  KahanSum s;
  for (double x : xs) s.add(x);
  r.mean = s.value() / static_cast<double>(r.n);
  if (r.n < 2) return r;
  KahanSum q;
  for (double x : xs) q.add((x - r.mean) * (x - r.mean));
  r.sample_std = std::sqrt(q.value() / static_cast<double>(r.n - 1));
  r.std_error = r.sample_std / std::sqrt(static_cast<double>(r.n));
  return r;
}

MeanSE trimmed_mean_se(std::vector<double> xs, double trim_fraction) {
  std::sort(xs.begin(), xs.end());
  std::size_t k = static_cast<std::size_t>(trim_fraction * xs.size());
  if (2 * k >= xs.size()) return MeanSE{};
  std::vector<double> mid(xs.begin() + k, xs.end() - k);
  return mean_se(mid);
}

int Histogram::find_bin(double x) const {
  if (edges.empty() || x < edges.front() || x >= edges.back()) return -1;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return static_cast<int>(it - edges.begin()) - 1;
}

Histogram make_histogram(const std::vector<double>& xs, int bins, double lo,
                         double hi) {
  Histogram h;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / bins;
  h.counts.assign(bins, 0.0);
  for (double x : xs) {
    int b = h.find_bin(x);
    if (b >= 0) {
      h.counts[b] += 1.0;
      ++h.total;
    }
  }
  return h;
}

Histogram make_histogram(const std::vector<double>& xs, int bins) {
  if (xs.empty()) return Histogram{};
  auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  double lo = *mn, hi = *mx;
  double pad = (hi - lo) * 1e-9 + 1e-300;
  return make_histogram(xs, bins, lo, hi + pad);
}

std::vector<double> quantile_edges(std::vector<double> xs, int bins) {
  std::sort(xs.begin(), xs.end());
  std::vector<double> edges(bins + 1);
  std::size_t n = xs.size();
  for (int i = 0; i <= bins; ++i) {
    std::size_t idx = std::min<std::size_t>(n - 1, (i * n) / bins);
    edges[i] = (i == bins) ? xs.back() + 1e-12 * (1.0 + std::abs(xs.back()))
                           : xs[idx];
  }
  return edges;
}

LinearFit weighted_linear_fit(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma) {
  if (x.size() != y.size() || x.size() != sigma.size() || x.size() < 2)
    throw InsufficientSamples("weighted_linear_fit needs >= 2 points");
  double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double w = 1.0 / (sigma[i] * sigma[i]);
    S += w;
    Sx += w * x[i];
    Sy += w * y[i];
    Sxx += w * x[i] * x[i];
    Sxy += w * x[i] * y[i];
  }
  double det = S * Sxx - Sx * Sx;
  LinearFit f;
  f.slope = (S * Sxy - Sx * Sy) / det;
  f.intercept = (Sxx * Sy - Sx * Sxy) / det;
  f.slope_se = std::sqrt(S / det);
  f.intercept_se = std::sqrt(Sxx / det);
  return f;
}

double log_mean_exp(const std::vector<double>& v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(v.begin(), v.end());
  KahanSum s;
  for (double x : v) s.add(std::exp(x - m));
  return m + std::log(s.value() / static_cast<double>(v.size()));
}

double exp_weight_ess(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double m = *std::max_element(v.begin(), v.end());
  KahanSum s1, s2;
  for (double x : v) {
    double w = std::exp(x - m);
    s1.add(w);
    s2.add(w * w);
  }
  return s1.value() * s1.value() / s2.value();
}

double log_mean_exp_jackknife(const std::vector<double>& v, int blocks) {
  std::size_t n = v.size();
  if (n < static_cast<std::size_t>(2 * blocks))
    return log_mean_exp(v);
  double full = log_mean_exp(v);
  // Leave-one-block-out estimates.
  double m = 0.0;
  for (int b = 0; b < blocks; ++b) {
    std::vector<double> rest;
    rest.reserve(n);
    std::size_t lo = (b * n) / blocks, hi = ((b + 1) * n) / blocks;
    for (std::size_t i = 0; i < n; ++i)
      if (i < lo || i >= hi) rest.push_back(v[i]);
    m += log_mean_exp(rest);
  }
  m /= blocks;
  return blocks * full - (blocks - 1) * m;
}

std::vector<double> bootstrap_statistic(
    const std::vector<double>& xs, int replicates, RngStream& rng,
    const std::function<double(const std::vector<double>&)>& stat) {
  std::vector<double> out(replicates);
  std::vector<double> re(xs.size());
  for (int r = 0; r < replicates; ++r) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      auto j = static_cast<std::size_t>(rng.uniform() * xs.size());
      if (j >= xs.size()) j = xs.size() - 1;
      re[i] = xs[j];
    }
    out[r] = stat(re);
  }
  return out;
}

namespace {

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

}  // namespace

double gauss15(const std::function<double(double)>& f, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < kGL; ++i) s += kGLw[i] * f(mid + half * kGLx[i]);
  return s * half;
}

double log_gauss15(const std::function<double(double)>& g, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double vals[kGL];
  double vmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGL; ++i) {
    vals[i] = g(mid + half * kGLx[i]);
    vmax = std::max(vmax, vals[i]);
  }
  if (!std::isfinite(vmax)) return vmax;
  double s = 0.0;
  for (int i = 0; i < kGL; ++i) s += kGLw[i] * std::exp(vals[i] - vmax);
  return vmax + std::log(s * half);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

std::vector<double> halton_point(std::uint64_t i, int dim) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  std::vector<double> p(dim);
  for (int d = 0; d < dim; ++d) {
    int base = primes[d % 10];
    double f = 1.0, r = 0.0;
    std::uint64_t k = i + 1;
    while (k > 0) {
      f /= base;
      r += f * static_cast<double>(k % base);
      k /= base;
    }
    p[d] = r;
  }
  return p;
}

}  // namespace fluctrel
