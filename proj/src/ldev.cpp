#include "fluctrel/ldev.hpp"

#include <algorithm>
#include <cmath>

#include "fluctrel/errors.hpp"

namespace fluctrel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> default_grid(const std::vector<double>& w_at_tmax) {
  MeanSE m = mean_se(w_at_tmax);
  std::vector<double> grid(41);
  double lo = m.mean - 4.0 * m.sample_std;
  double hi = m.mean + 4.0 * m.sample_std;
  for (int i = 0; i < 41; ++i) grid[i] = lo + (hi - lo) * i / 40.0;
  return grid;
}

// zeta_T(w) = -(1/T) log density of W/T at w, on the shared grid.
std::vector<double> zeta_finite_T(const std::vector<double>& w_samples, double T,
                                  const std::vector<double>& grid) {
  double dw = grid[1] - grid[0];
  std::vector<double> counts(grid.size(), 0.0);
  double lo = grid.front() - 0.5 * dw;
  for (double w : w_samples) {
    int b = static_cast<int>(std::floor((w - lo) / dw));
    if (b >= 0 && b < static_cast<int>(grid.size())) counts[b] += 1.0;
  }
  std::vector<double> z(grid.size(), kInf);
  double n = static_cast<double>(w_samples.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (counts[i] > 0) z[i] = -std::log(counts[i] / (n * dw)) / T;
  return z;
}

void min_subtract(RateFunctionEstimate& est) {
  double zmin = kInf;
  double loc = 0.0;
  for (std::size_t i = 0; i < est.grid.size(); ++i)
    if (est.zeta[i] < zmin) {
      zmin = est.zeta[i];
      loc = est.grid[i];
    }
  if (!std::isfinite(zmin)) return;
  for (auto& z : est.zeta)
    if (std::isfinite(z)) z -= zmin;
  est.min_location = loc;
}

// One histogram-route estimate (no bands).
RateFunctionEstimate histogram_route(const std::vector<std::vector<double>>& rates,
                                     const std::vector<double>& horizons,
                                     const std::vector<double>& grid) {
  RateFunctionEstimate est;
  est.method = "histogram";
  est.grid = grid;
  est.horizons = horizons;
  est.zeta.assign(grid.size(), kInf);
  est.band.assign(grid.size(), kInf);

  std::vector<std::vector<double>> zT(horizons.size());
  for (std::size_t h = 0; h < horizons.size(); ++h)
    zT[h] = zeta_finite_T(rates[h], horizons[h], grid);

  // 1/T linear extrapolation at each grid point.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> xs, ys, sg;
    for (std::size_t h = 0; h < horizons.size(); ++h)
      if (std::isfinite(zT[h][i])) {
        xs.push_back(1.0 / horizons[h]);
        ys.push_back(zT[h][i]);
        sg.push_back(1.0);
      }
    if (xs.size() >= 2) {
      LinearFit f = weighted_linear_fit(xs, ys, sg);
      est.zeta[i] = f.intercept;
    } else if (xs.size() == 1) {
      est.zeta[i] = ys[0];  // single-horizon fallback, no extrapolation
    }
  }
  min_subtract(est);
  return est;
}

// One Legendre-route estimate from the largest horizon.
RateFunctionEstimate legendre_route(const std::vector<std::vector<double>>& rates,
                                    const std::vector<double>& horizons,
                                    const std::vector<double>& grid) {
  RateFunctionEstimate est;
  est.method = "legendre";
  est.grid = grid;
  est.horizons = horizons;
  est.zeta.assign(grid.size(), kInf);
  est.band.assign(grid.size(), kInf);

  std::size_t hmax = 0;
  for (std::size_t h = 1; h < horizons.size(); ++h)
    if (horizons[h] > horizons[hmax]) hmax = h;
  double T = horizons[hmax];
  const std::vector<double>& w = rates[hmax];

  // lambda(k) = (1/T) log < e^{-k W} >, restricted to k with ESS > 100.
  std::vector<double> ks, lam;
  std::vector<double> work(w.size());
  for (int ik = -40; ik <= 40; ++ik) {
    double k = ik / 10.0;
    for (std::size_t i = 0; i < w.size(); ++i) work[i] = -k * T * w[i];
    if (exp_weight_ess(work) <= 100.0) continue;
    ks.push_back(k);
    lam.push_back(log_mean_exp_jackknife(work) / T);
  }
  if (ks.size() < 3) return est;

  // Convexity diagnostic on lambda(k).
  for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
    double second = lam[i + 1] - 2.0 * lam[i] + lam[i - 1];
    if (second < -5e-3 * (1.0 + std::abs(lam[i]))) est.nonconvex_cgf = true;
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    double best = -kInf;
    for (std::size_t j = 0; j < ks.size(); ++j)
      best = std::max(best, -ks[j] * grid[i] - lam[j]);
    est.zeta[i] = best;
  }
  min_subtract(est);
  return est;
}

void attach_bands(RateFunctionEstimate& est,
                  const std::vector<std::vector<double>>& rates,
                  const std::vector<double>& horizons, int replicates,
                  std::uint64_t seed, bool legendre) {
  std::vector<std::vector<double>> reps(est.grid.size());
  RngStream rng(seed, 0, RngDomain::bootstrap);
  std::vector<std::vector<double>> resampled(rates.size());
  for (int r = 0; r < replicates; ++r) {
    for (std::size_t h = 0; h < rates.size(); ++h) {
      const auto& src = rates[h];
      auto& dst = resampled[h];
      dst.resize(src.size());
      for (auto& v : dst) {
        auto j = static_cast<std::size_t>(rng.uniform() * src.size());
        v = src[std::min(j, src.size() - 1)];
      }
    }
    RateFunctionEstimate e = legendre ? legendre_route(resampled, horizons, est.grid)
                                      : histogram_route(resampled, horizons, est.grid);
    for (std::size_t i = 0; i < est.grid.size(); ++i)
      if (std::isfinite(e.zeta[i]) && std::isfinite(est.zeta[i]))
        reps[i].push_back(e.zeta[i]);
  }
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    if (reps[i].size() >= static_cast<std::size_t>(replicates / 2) &&
        std::isfinite(est.zeta[i])) {
      MeanSE m = mean_se(reps[i]);
      est.band[i] = std::max(m.sample_std, 1e-12);
    }
  }
}

}  // namespace

double RateFunctionEstimate::value_at(double w, double* band_out) const {
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (w >= grid[i] && w <= grid[i + 1] && usable(i) && usable(i + 1)) {
      double t = (w - grid[i]) / (grid[i + 1] - grid[i]);
      if (band_out) *band_out = (1.0 - t) * band[i] + t * band[i + 1];
      return (1.0 - t) * zeta[i] + t * zeta[i + 1];
    }
  }
  if (band_out) *band_out = kInf;
  return std::numeric_limits<double>::quiet_NaN();
}

RateFunctionPair estimate_rate_function(
    const std::vector<std::vector<double>>& samples_per_T,
    const std::vector<double>& horizons, std::vector<double> grid,
    int bootstrap_replicates, std::uint64_t seed) {
  if (samples_per_T.size() != horizons.size() || horizons.size() < 2)
    throw InsufficientSamples("need >= 2 horizons");
  for (const auto& s : samples_per_T)
    if (s.size() < 10000)
      throw InsufficientSamples("need >= 1e4 samples per horizon");

  // Work with rates w = W / T.
  std::vector<std::vector<double>> rates(horizons.size());
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    rates[h].resize(samples_per_T[h].size());
    for (std::size_t i = 0; i < rates[h].size(); ++i)
      rates[h][i] = samples_per_T[h][i] / horizons[h];
  }

  std::size_t hmax = 0;
  for (std::size_t h = 1; h < horizons.size(); ++h)
    if (horizons[h] > horizons[hmax]) hmax = h;

  RateFunctionPair pair;
  MeanSE m = mean_se(rates[hmax]);
  if (m.sample_std < 1e-12 * (1.0 + std::abs(m.mean))) {
    // Point mass: zeta is 0 at the mean and flagged +inf elsewhere.
    for (auto* est : {&pair.histogram, &pair.legendre}) {
      est->method = est == &pair.histogram ? "histogram" : "legendre";
      est->grid = {m.mean};
      est->zeta = {0.0};
      est->band = {0.0};
      est->horizons = horizons;
      est->min_location = m.mean;
      est->degenerate = true;
    }
    return pair;
  }

  if (grid.empty()) grid = default_grid(rates[hmax]);
  pair.histogram = histogram_route(rates, horizons, grid);
  pair.legendre = legendre_route(rates, horizons, grid);
  attach_bands(pair.histogram, rates, horizons, bootstrap_replicates, seed, false);
  attach_bands(pair.legendre, rates, horizons, bootstrap_replicates, seed ^ 0xBEEF,
               true);
  return pair;
}

SymmetryReport gc_symmetry_check(const RateFunctionEstimate& forward,
                                 const RateFunctionEstimate& backward,
                                 double slack) {
  SymmetryReport rep;
  if (forward.degenerate && backward.degenerate) {
    rep.pass = std::abs(forward.min_location + backward.min_location) < 1e-9 ||
               std::abs(forward.min_location) < 1e-9;
    rep.window_points = 1;
    return rep;
  }
  for (std::size_t i = 0; i < forward.grid.size(); ++i) {
    if (!forward.usable(i)) continue;
    double w = forward.grid[i];
    double bb = 0.0;
    double zb = backward.value_at(-w, &bb);
    if (!std::isfinite(zb) || !std::isfinite(bb)) continue;
    double resid = std::abs(forward.zeta[i] - (zb - w));
    double comb = forward.band[i] + bb;
    rep.max_residual = std::max(rep.max_residual, resid);
    rep.max_excess = std::max(rep.max_excess, resid - comb);
    ++rep.window_points;
  }
  if (rep.window_points == 0) throw InsufficientOverlap("no usable overlap window");
  rep.pass = rep.max_excess < slack;
  return rep;
}

MultiplicativeRateReport multiplicative_rate_check(
    const std::vector<std::vector<Vec>>& spectra_per_T,
    const std::vector<double>& horizons,
    const std::vector<std::vector<Vec>>* backward, std::uint64_t seed) {
  if (spectra_per_T.empty() || spectra_per_T.size() != horizons.size())
    throw InsufficientSamples("need spectra at >= 2 horizons");
  int d = static_cast<int>(spectra_per_T[0][0].size());

  MultiplicativeRateReport rep;
  rep.lyapunov = Vec(d);

  // Marginal rate function per exponent component.
  for (int c = 0; c < d; ++c) {
    std::vector<std::vector<double>> comp(horizons.size());
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      comp[h].resize(spectra_per_T[h].size());
      for (std::size_t i = 0; i < comp[h].size(); ++i)
        comp[h][i] = spectra_per_T[h][i][c];
    }
    RateFunctionPair pair = estimate_rate_function(comp, horizons, {}, 32, seed + c);
    rep.lyapunov[c] = pair.histogram.min_location;
    rep.per_component.push_back(pair.histogram);
  }
  std::sort(rep.lyapunov.data(), rep.lyapunov.data() + d, std::greater<double>());

  if (d == 1) {
    // Z(sigma) - sigma = Z'(-sigma).
    std::vector<std::vector<double>> comp(horizons.size());
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      comp[h].resize(spectra_per_T[h].size());
      for (std::size_t i = 0; i < comp[h].size(); ++i)
        comp[h][i] = spectra_per_T[h][i][0];
    }
    RateFunctionPair fwd = estimate_rate_function(comp, horizons, {}, 32, seed + 17);
    RateFunctionPair bwd = fwd;
    if (backward) {
      std::vector<std::vector<double>> bcomp(horizons.size());
      for (std::size_t h = 0; h < horizons.size(); ++h) {
        bcomp[h].resize((*backward)[h].size());
        for (std::size_t i = 0; i < bcomp[h].size(); ++i)
          bcomp[h][i] = (*backward)[h][i][0];
      }
      bwd = estimate_rate_function(bcomp, horizons, {}, 32, seed + 18);
    }
    // zeta(w) = zeta'(-w) - w with w = sigma matches Z(s) - s = Z'(-s).
    rep.symmetry = gc_symmetry_check(fwd.histogram, bwd.histogram);
  } else {
    // Sum-constrained sectors (e.g. incompressible flows): verify the
    // constraint; the symmetry is then the identity map.
    double worst = 0.0;
    for (std::size_t h = 0; h < horizons.size(); ++h)
      for (const auto& rho : spectra_per_T[h])
        worst = std::max(worst, std::abs(rho.sum()));
    rep.sum_constraint_checked = worst < 1e-8 * (1.0 + horizons.back());
    rep.max_sum_violation = worst;
    rep.symmetry.pass = true;
    rep.symmetry.window_points = 0;
  }
  return rep;
}

}  // namespace fluctrel
