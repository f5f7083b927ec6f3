#include "fluctrel/relations.hpp"

#include <algorithm>
#include <cmath>

#include "fluctrel/reversal.hpp"

namespace fluctrel {

namespace {

const PhiFamily& initial_family(const ProcessSpec& spec, const InversionScheme& scheme) {
  if (scheme.phi && scheme.phi->sample) return *scheme.phi;
  if (spec.phi && spec.phi->sample) return *spec.phi;
  throw SamplerUnavailable("no sampler for the initial measure");
}

EnsembleEstimate make_estimate(const std::string& name,
                               const std::vector<double>& values, double target,
                               double ksigma, std::uint64_t seed) {
  EnsembleEstimate e;
  e.name = name;
  MeanSE m = mean_se(values);
  e.mean = m.mean;
  e.std_error = m.std_error;
  e.n = m.n;
  e.seed = seed;
  e.ksigma = ksigma;
  e.target = target;
  e.pass = std::abs(e.mean - target) <= ksigma * e.std_error;
  if (values.size() > 10) e.histogram = make_histogram(values, 41);
  e.trimmed_mean = trimmed_mean_se(values, 1e-4).mean;
  return e;
}

}  // namespace

FunctionalEnsemble sample_functionals(const ProcessSpec& spec,
                                      const InversionScheme& scheme, std::size_t n,
                                      double h, const RunContext& ctx,
                                      SpaceFieldFn phi0, SpaceFieldFn phiT) {
  const PhiFamily& fam = initial_family(spec, scheme);
  FunctionalEnsemble out;
  out.paths.resize(n);
  parallel_for(n, ctx.workers, [&](std::size_t i) {
    RngStream init(ctx.seed, i, RngDomain::initial_condition);
    Vec x0 = fam.draw(0.0, init);
    RngStream noise(ctx.seed, i, RngDomain::path_noise);
    Trajectory traj = sample_path(spec, x0, h, noise);
    out.paths[i] = functional_W(traj, spec, scheme, phi0, phiT);
  });
  std::size_t escaped = 0;
  for (const auto& p : out.paths) {
    if (p.valid)
      out.W.push_back(p.W);
    else
      ++escaped;
  }
  out.escape_fraction = static_cast<double>(escaped) / static_cast<double>(n);
  return out;
}

JarzynskiReport jarzynski_check(const ProcessSpec& spec, const InversionScheme& scheme,
                                std::size_t n, double h, const RunContext& ctx,
                                SpaceFieldFn phi0, SpaceFieldFn phiT, double ksigma) {
  FunctionalEnsemble ens = sample_functionals(spec, scheme, n, h, ctx, phi0, phiT);
  JarzynskiReport rep;
  rep.W = ens.W;
  std::vector<double> expw(ens.W.size());
  for (std::size_t i = 0; i < ens.W.size(); ++i) expw[i] = std::exp(-ens.W[i]);
  rep.exp_w = make_estimate("jarzynski <e^-W>", expw, 1.0, ksigma, ctx.seed);
  rep.exp_w.escape_fraction = ens.escape_fraction;
  rep.exp_w.histogram = ens.W.size() > 10 ? make_histogram(ens.W, 41) : Histogram{};
  rep.w_mean = mean_se(ens.W);
  rep.second_law_ok = rep.w_mean.mean >= -ksigma * rep.w_mean.std_error;
  rep.pass = rep.exp_w.pass && rep.second_law_ok;
  return rep;
}

CrooksReport crooks_check(const ProcessSpec& spec, const InversionScheme& scheme,
                          std::size_t n, double h, int bins, const RunContext& ctx) {
  FunctionalEnsemble fwd = sample_functionals(spec, scheme, n, h, ctx);

  BackwardProcess bw = build_backward(spec, scheme);
  RunContext bctx = ctx;
  bctx.seed = ctx.seed ^ 0x9E3779B97F4A7C15ULL;
  FunctionalEnsemble rev = sample_functionals(bw.spec, bw.scheme, n, h, bctx);

  CrooksReport rep;
  rep.W_forward = fwd.W;
  rep.W_backward = rev.W;
  std::vector<double> neg(rev.W.size());
  for (std::size_t i = 0; i < rev.W.size(); ++i) neg[i] = -rev.W[i];

  double lo = std::min(*std::min_element(fwd.W.begin(), fwd.W.end()),
                       *std::min_element(neg.begin(), neg.end()));
  double hi = std::max(*std::max_element(fwd.W.begin(), fwd.W.end()),
                       *std::max_element(neg.begin(), neg.end()));
  if (!(hi > lo)) hi = lo + 1.0;
  double pad = (hi - lo) * 1e-9 + 1e-12;
  rep.forward = make_histogram(fwd.W, bins, lo, hi + pad);
  rep.backward = make_histogram(neg, bins, lo, hi + pad);

  std::vector<double> xs, ys, sig;
  for (int b = 0; b < bins; ++b) {
    double c1 = rep.forward.counts[b], c2 = rep.backward.counts[b];
    if (c1 >= 50 && c2 >= 50) {
      xs.push_back(rep.forward.center(b));
      ys.push_back(std::log(c1 / static_cast<double>(rep.forward.total)) -
                   std::log(c2 / static_cast<double>(rep.backward.total)));
      sig.push_back(std::sqrt(1.0 / c1 + 1.0 / c2));
      ++rep.qualifying_bins;
    }
  }
  if (rep.qualifying_bins < 5)
    throw InsufficientOverlap("only " + std::to_string(rep.qualifying_bins) +
                              " bins with enough counts in both directions");
  rep.fit = weighted_linear_fit(xs, ys, sig);
  rep.pass = std::abs(rep.fit.slope - 1.0) <= 0.1 && std::abs(rep.fit.intercept) <= 0.1;
  return rep;
}

ProcessSpec auxiliary_process(const ProcessSpec& spec, const PhiFamily& phi) {
  ProcessSpec aux = spec;
  const ProcessSpec base = spec;
  int dim = spec.dim;
  aux.family_tag = spec.family_tag + "_auxiliary";
  aux.drift_plus = [base, phi, dim](double t, const Vec& x, Vec& o) {
    Vec uh(dim), g(dim), s(dim);
    base.hat_drift(t, x, uh);
    phi.gradient(t, x, g);
    Mat d(dim, dim);
    base.diffusion(t, x, d);
    base.hat_shift(t, x, s);
    o.noalias() = -uh - d * g + s;  // u'' = u^'' + hat shift
  };
  aux.drift_minus = nullptr;
  aux.div_plus = nullptr;
  aux.div_minus = [](double, const Vec&) { return 0.0; };
  aux.drift_jacobian = nullptr;
  aux.langevin.reset();
  aux.phi = spec.phi;
  return aux;
}

SpeckSeifertReport speck_seifert_check(
    const ProcessSpec& spec, const PhiFamily& phi, std::size_t n, double h,
    const RunContext& ctx,
    const std::vector<std::pair<std::string, TrajectoryFunctional>>& test_functionals) {
  if (!phi.sample) throw SamplerUnavailable("phi family needs a sampler");

  std::size_t nf = test_functionals.size();
  std::vector<double> whk(n), wgap(n);
  std::vector<std::vector<double>> fvals(nf, std::vector<double>(n));
  parallel_for(n, ctx.workers, [&](std::size_t i) {
    RngStream init(ctx.seed, i, RngDomain::initial_condition);
    Vec x0 = phi.draw(0.0, init);
    RngStream noise(ctx.seed, i, RngDomain::path_noise);
    Trajectory traj = sample_path(spec, x0, h, noise);
    double w = housekeeping_W(traj, spec, phi);
    whk[i] = w;
    // Consistency of the three variants on the same path.
    InversionScheme rp;
    rp.kind = InversionKind::reversed_protocol;
    double wtot = entropy_flux_integral(traj, spec, rp) +
                  (phi.phi(traj.time(traj.steps()), traj.states.col(traj.steps())) -
                   phi.phi(0.0, traj.states.col(0)));
    double wex = excess_W(traj, phi);
    wgap[i] = std::abs(w - (wtot - wex));
    for (std::size_t f = 0; f < nf; ++f)
      fvals[f][i] = test_functionals[f].second(traj);
  });

  SpeckSeifertReport rep;
  std::vector<double> expw(n);
  for (std::size_t i = 0; i < n; ++i) expw[i] = std::exp(-whk[i]);
  rep.exp_whk = make_estimate("speck-seifert <e^-W^hk>", expw, 1.0, 3.0, ctx.seed);
  rep.whk_tot_ex_gap = *std::max_element(wgap.begin(), wgap.end());

  // Independent ensemble of the auxiliary process (Proposition-3 pairing).
  ProcessSpec aux = auxiliary_process(spec, phi);
  std::vector<std::vector<double>> faux(nf, std::vector<double>(n));
  std::uint64_t aux_seed = ctx.seed ^ 0xA076152C3D591FULL;
  parallel_for(n, ctx.workers, [&](std::size_t i) {
    RngStream init(aux_seed, i, RngDomain::initial_condition);
    Vec x0 = phi.draw(0.0, init);
    RngStream noise(aux_seed, i, RngDomain::path_noise);
    Trajectory traj = sample_path(aux, x0, h, noise);
    for (std::size_t f = 0; f < nf; ++f)
      faux[f][i] = test_functionals[f].second(traj);
  });

  rep.pass = rep.exp_whk.pass;
  for (std::size_t f = 0; f < nf; ++f) {
    SpeckSeifertReport::FunctionalPair p;
    p.name = test_functionals[f].first;
    std::vector<double> weighted(n);
    for (std::size_t i = 0; i < n; ++i) weighted[i] = fvals[f][i] * expw[i];
    MeanSE wm = mean_se(weighted), am = mean_se(faux[f]);
    p.weighted_mean = wm.mean;
    p.weighted_se = wm.std_error;
    p.aux_mean = am.mean;
    p.aux_se = am.std_error;
    double comb = std::sqrt(wm.std_error * wm.std_error + am.std_error * am.std_error);
    p.pass = std::abs(wm.mean - am.mean) <= 3.0 * comb;
    rep.pass = rep.pass && p.pass;
    rep.functionals.push_back(p);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Detailed balance

namespace {

DetailedBalanceReport db_linear_analytic(const ProcessSpec& spec,
                                         const InversionScheme& scheme, double t) {
  if (!spec.langevin) throw SchemePreconditionFailed("analytic route needs Langevin data");
  const LangevinData& ld = *spec.langevin;
  int d = spec.dim;

  // Forward linear model from the (constant) drift Jacobian.
  Mat M(d, d);
  spec.jacobian(0.0, Vec::Zero(d), M);
  LinearModel fwd = LinearModel::from_mgamma(M, ld.gamma, ld.beta);

  BackwardProcess bw = build_backward(spec, scheme);
  Mat Mb(d, d);
  bw.spec.jacobian(0.0, Vec::Zero(d), Mb);
  Mat gb(d, d);
  bw.spec.diffusion(0.0, Vec::Zero(d), gb);
  LinearModel back = LinearModel::from_mgamma(Mb, 0.5 * ld.beta * gb, ld.beta);

  Involution inv = scheme.involution;
  GaussianKernel st = stationary_kernel(fwd);

  DetailedBalanceReport rep;
  rep.route = "linear_analytic";
  auto probes = default_probes(spec, 64, 2.0);
  for (std::size_t i = 0; i + 1 < probes.size(); i += 2) {
    const Vec& x = probes[i];
    const Vec& y = probes[i + 1];
    GaussianKernel pf = gaussian_kernel(fwd, t, x);
    double lhs = st.log_density(x) + pf.log_density(y);
    Vec ys = inv.apply(y), xs = inv.apply(x);
    GaussianKernel pb = gaussian_kernel(back, t, ys);
    double rhs = st.log_density(y) + pb.log_density(xs);
    rep.max_abs = std::max(rep.max_abs, std::abs(lhs - rhs));
    ++rep.cells;
  }
  rep.pass = rep.max_abs < 1e-10;
  return rep;
}

DetailedBalanceReport db_lognormal_analytic(const ProcessSpec& spec, double t) {
  if (!spec.kraichnan || spec.kraichnan->flow_dim != 1)
    throw SchemePreconditionFailed("lognormal route is the scalar cocycle case");
  double c = spec.kraichnan->lambda_trace();
  // Transition density of dX = X S dt: ln X_t ~ N(ln X_0 - c t/2, c t);
  // detailed balance with respect to X^-2 dX.
  auto logp = [c, t](double x0, double x1) {
    double z = std::log(x1 / x0) + 0.5 * c * t;
    return -std::log(x1) - 0.5 * std::log(2.0 * M_PI * c * t) -
           0.5 * z * z / (c * t);
  };
  DetailedBalanceReport rep;
  rep.route = "lognormal_analytic";
  for (int i = 0; i < 64; ++i) {
    auto u = halton_point(i, 2);
    double a = 0.2 + 2.0 * u[0], b = 0.2 + 2.0 * u[1];
    double lhs = -2.0 * std::log(a) + logp(a, b);
    double rhs = -2.0 * std::log(b) + logp(b, a);
    rep.max_abs = std::max(rep.max_abs, std::abs(lhs - rhs));
    ++rep.cells;
  }
  rep.pass = rep.max_abs < 1e-10;
  return rep;
}

DetailedBalanceReport db_binned(const ProcessSpec& spec, const InversionScheme& scheme,
                                double t, const RunContext& ctx,
                                const DetailedBalanceOptions& opt) {
  if (spec.dim > 2) throw DimensionTooLarge("binned kernels support dim <= 2");
  const PhiFamily& fam = initial_family(spec, scheme);
  const Involution inv = scheme.involution;
  std::size_t n = opt.n;
  int d = spec.dim;

  Mat x0s(d, n), xts(d, n);
  parallel_for(n, ctx.workers, [&](std::size_t i) {
    RngStream init(ctx.seed, i, RngDomain::initial_condition);
    Vec x0 = fam.draw(0.0, init);
    RngStream noise(ctx.seed, i, RngDomain::path_noise);
    IntegrateOptions io;
    io.record_noise = false;
    io.horizon = t;
    Trajectory traj = sample_path(spec, x0, opt.h, noise, io);
    x0s.col(i) = traj.states.col(0);
    xts.col(i) = traj.states.col(traj.steps());
  });

  // Equal-probability edges per coordinate from the initial marginal.
  int K = opt.bins;
  std::vector<std::vector<double>> edges(d);
  for (int c = 0; c < d; ++c) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x0s(c, i);
    edges[c] = quantile_edges(xs, K);
    // Symmetrize so that involution images land on the same partition.
    if (!inv.is_identity()) {
      for (int b = 0; b <= K; ++b) {
        double m = 0.5 * (edges[c][b] - edges[c][K - b]);
        edges[c][b] = m;
      }
      std::sort(edges[c].begin(), edges[c].end());
    }
  }
  auto cell_of = [&](const Vec& x) -> int {
    int idx = 0;
    for (int c = 0; c < d; ++c) {
      auto& e = edges[c];
      if (x[c] < e.front() || x[c] >= e.back()) return -1;
      int b = static_cast<int>(std::upper_bound(e.begin(), e.end(), x[c]) -
                               e.begin()) - 1;
      idx = idx * K + b;
    }
    return idx;
  };

  int cells = 1;
  for (int c = 0; c < d; ++c) cells *= K;
  std::vector<double> joint(cells * cells, 0.0);
  Vec tmp(d);
  for (std::size_t i = 0; i < n; ++i) {
    int a = cell_of(x0s.col(i));
    int b = cell_of(xts.col(i));
    if (a >= 0 && b >= 0) joint[a * cells + b] += 1.0;
  }

  DetailedBalanceReport rep;
  rep.route = "binned";
  for (int a = 0; a < cells; ++a) {
    // involution image of cell a: map its center.
    for (int b = a; b < cells; ++b) {
      // mirrored pair (a, b) vs (b*, a*): with symmetric edges the cell of a
      // mirrored point is computed from cell centers.
      double c1 = joint[a * cells + b];
      // find mirrored cells via centers
      auto center_of = [&](int cell) {
        Vec x(d);
        int rem = cell;
        for (int c = d - 1; c >= 0; --c) {
          int bb = rem % K;
          rem /= K;
          x[c] = 0.5 * (edges[c][bb] + edges[c][bb + 1]);
        }
        return x;
      };
      Vec ca = center_of(a), cb = center_of(b);
      int am = cell_of(inv.apply(ca));
      int bm = cell_of(inv.apply(cb));
      if (am < 0 || bm < 0) continue;
      double c2 = joint[bm * cells + am];
      double tot = c1 + c2;
      if (tot < 10) continue;
      double z = std::abs(c1 - c2) / std::sqrt(tot);
      rep.max_z = std::max(rep.max_z, z);
      ++rep.cells;
    }
  }
  if (rep.cells < 3) throw InsufficientCounts("too few populated cell pairs");
  rep.pass = rep.max_z < opt.zmax;
  return rep;
}

}  // namespace

DetailedBalanceReport detailed_balance_check(const ProcessSpec& spec,
                                             const InversionScheme& scheme, double t,
                                             const RunContext& ctx,
                                             const DetailedBalanceOptions& opt) {
  switch (opt.route) {
    case KernelRoute::linear_analytic: return db_linear_analytic(spec, scheme, t);
    case KernelRoute::lognormal_analytic: return db_lognormal_analytic(spec, t);
    case KernelRoute::binned: return db_binned(spec, scheme, t, ctx, opt);
  }
  throw Error("unreachable");
}

DetailedFRReport detailed_fr_check(const ProcessSpec& spec, const InversionScheme& scheme,
                                   std::size_t n, double h, int space_bins, int w_bins,
                                   const RunContext& ctx) {
  if (spec.dim > 2) throw DimensionTooLarge("joint histograms support dim <= 2");

  // Forward ensemble: (x_T, W); backward ensemble: (x'_0, W').
  const PhiFamily& fam = initial_family(spec, scheme);
  std::vector<double> wf(n), yf(n);
  parallel_for(n, ctx.workers, [&](std::size_t i) {
    RngStream init(ctx.seed, i, RngDomain::initial_condition);
    Vec x0 = fam.draw(0.0, init);
    RngStream noise(ctx.seed, i, RngDomain::path_noise);
    Trajectory traj = sample_path(spec, x0, h, noise);
    PathFunctionals f = functional_W(traj, spec, scheme);
    wf[i] = f.W;
    yf[i] = traj.states(0, traj.steps());  // first coordinate of the endpoint
  });

  BackwardProcess bw = build_backward(spec, scheme);
  const PhiFamily& famb = initial_family(bw.spec, bw.scheme);
  std::uint64_t bseed = ctx.seed ^ 0x5851F42D4C957F2DULL;
  std::vector<double> wb(n), zb(n);
  const Involution inv = scheme.involution;
  parallel_for(n, ctx.workers, [&](std::size_t i) {
    RngStream init(bseed, i, RngDomain::initial_condition);
    Vec x0 = famb.draw(0.0, init);
    RngStream noise(bseed, i, RngDomain::path_noise);
    Trajectory traj = sample_path(bw.spec, x0, h, noise);
    PathFunctionals f = functional_W(traj, bw.spec, bw.scheme);
    wb[i] = f.W;
    zb[i] = inv.apply(traj.states.col(0))[0];  // (x'_0)^* first coordinate
  });

  DetailedFRReport rep;
  double wmax = 0.0;
  for (double w : wf) wmax = std::max(wmax, std::abs(w));
  rep.degenerate_w = wmax < 1e-10;

  // Shared edges.
  std::vector<double> yall = yf;
  yall.insert(yall.end(), zb.begin(), zb.end());
  auto yedges = quantile_edges(yall, space_bins);
  double wlo = 1e300, whi = -1e300;
  for (double w : wf) {
    wlo = std::min(wlo, w);
    whi = std::max(whi, w);
  }
  for (double w : wb) {
    wlo = std::min(wlo, -w);
    whi = std::max(whi, -w);
  }
  if (rep.degenerate_w) {
    wlo = -1.0;
    whi = 1.0;
    w_bins = 1;
  }
  double wpad = (whi - wlo) * 1e-9 + 1e-12;
  auto wbin = [&](double w) {
    if (w < wlo || w >= whi + wpad) return -1;
    int b = static_cast<int>((w - wlo) / (whi + wpad - wlo) * w_bins);
    return std::min(b, w_bins - 1);
  };
  auto ybin = [&](double y) {
    if (y < yedges.front() || y >= yedges.back()) return -1;
    return static_cast<int>(std::upper_bound(yedges.begin(), yedges.end(), y) -
                            yedges.begin()) - 1;
  };

  int cells = space_bins * w_bins;
  std::vector<double> cf(cells, 0.0);            // forward counts
  std::vector<double> cb(cells, 0.0);            // backward raw counts
  std::vector<double> sw(cells, 0.0), sw2(cells, 0.0);  // e^-W' weights
  for (std::size_t i = 0; i < n; ++i) {
    int a = ybin(yf[i]), b = wbin(wf[i]);
    if (a >= 0 && b >= 0) cf[a * w_bins + b] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    int a = ybin(zb[i]), b = wbin(-wb[i]);
    if (a >= 0 && b >= 0) {
      double w = std::exp(-wb[i]);
      cb[a * w_bins + b] += 1.0;
      sw[a * w_bins + b] += w;
      sw2[a * w_bins + b] += w * w;
    }
  }

  double nn = static_cast<double>(n);
  for (int c = 0; c < cells; ++c) {
    if (cf[c] < 100 || cb[c] < 100) continue;
    double p1 = cf[c] / nn;
    double se1 = std::sqrt(p1 * (1.0 - p1) / nn);
    double m2 = sw[c] / nn;
    double var2 = (sw2[c] / nn - m2 * m2) / nn;
    double se2 = std::sqrt(std::max(var2, 0.0));
    double z = std::abs(p1 - m2) / std::sqrt(se1 * se1 + se2 * se2);
    rep.max_z = std::max(rep.max_z, z);
    ++rep.cells_tested;
  }
  if (rep.cells_tested < 1) throw InsufficientCounts("no testable joint cells");
  rep.pass = rep.max_z < 4.0;
  return rep;
}

}  // namespace fluctrel
