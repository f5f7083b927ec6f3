#include "fluctrel/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <json.hpp>

#include "fluctrel/catalog.hpp"
#include "fluctrel/functionals.hpp"
#include "fluctrel/ldev.hpp"
#include "fluctrel/relations.hpp"
#include "fluctrel/response.hpp"
#include "fluctrel/tangent.hpp"

namespace fluctrel {

const char* kVersion = "0.1.0";

ProcessSpec process_from_config(const ExperimentConfig& cfg) {
  Params p = cfg.process_params;
  if (cfg.T > 0) p["T"] = cfg.T;
  return make_process(cfg.process, p);
}

InversionScheme scheme_from_config(const ExperimentConfig& cfg, const ProcessSpec& spec) {
  InversionScheme s = scheme_for(spec, cfg.scheme);
  if (!cfg.involution.empty()) {
    if (cfg.involution == "identity")
      s.involution = Involution::identity();
    else if (cfg.involution == "negate")
      s.involution = Involution::negate(spec.dim);
    else if (cfg.involution == "momentum_flip")
      s.involution = Involution::momentum_flip(spec.dim / 2);
  }
  return s;
}

namespace {

RunContext context_of(const ExperimentConfig& cfg) {
  return RunContext{cfg.seed, cfg.workers};
}

EstimateRecord record(const std::string& name, double mean, double se, std::size_t n,
                      bool pass) {
  EstimateRecord r;
  r.name = name;
  r.mean = mean;
  r.std_error = se;
  r.n = n;
  r.pass = pass;
  return r;
}

SampleTable functional_table(const std::vector<PathFunctionals>& paths, bool langevin) {
  SampleTable t;
  t.columns = {"trajectory_index", "W"};
  if (langevin) {
    t.columns.push_back("Q");
    t.columns.push_back("work");
    t.columns.push_back("deltaU");
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!paths[i].valid) continue;
    std::vector<double> row{static_cast<double>(i), paths[i].W};
    if (langevin) {
      row.push_back(paths[i].Q);
      row.push_back(paths[i].work);
      row.push_back(paths[i].delta_U);
    }
    t.add_row(row);
  }
  return t;
}

// ---- individual checks ----------------------------------------------------

CheckOutputs check_jarzynski(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  InversionScheme scheme = scheme_from_config(cfg, spec);
  FunctionalEnsemble ens = sample_functionals(spec, scheme, cfg.n, cfg.h, context_of(cfg));
  std::vector<double> expw(ens.W.size());
  for (std::size_t i = 0; i < ens.W.size(); ++i) expw[i] = std::exp(-ens.W[i]);
  MeanSE m = mean_se(expw), wm = mean_se(ens.W);

  CheckOutputs out;
  bool jpass = std::abs(m.mean - 1.0) <= 3.0 * m.std_error;
  bool spass = wm.mean >= -3.0 * wm.std_error;
  EstimateRecord r = record("jarzynski_exp_w", m.mean, m.std_error, m.n, jpass);
  r.extra["target"] = 1.0;
  r.extra["trimmed_mean"] = trimmed_mean_se(expw, 1e-4).mean;
  r.extra["escape_fraction"] = ens.escape_fraction;
  out.estimates.push_back(r);
  out.estimates.push_back(record("second_law_mean_w", wm.mean, wm.std_error, wm.n, spass));
  out.pass = jpass && spass;
  bool lgv = spec.langevin.has_value() && scheme.kind == InversionKind::canonical;
  out.tables["samples"] = functional_table(ens.paths, lgv);
  return out;
}

CheckOutputs check_crooks(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  InversionScheme scheme = scheme_from_config(cfg, spec);
  CrooksReport rep = crooks_check(spec, scheme, cfg.n, cfg.h, 41, context_of(cfg));
  CheckOutputs out;
  EstimateRecord r = record("crooks_slope", rep.fit.slope, rep.fit.slope_se, cfg.n,
                            std::abs(rep.fit.slope - 1.0) <= 0.1);
  r.extra["intercept"] = rep.fit.intercept;
  r.extra["intercept_se"] = rep.fit.intercept_se;
  r.extra["qualifying_bins"] = rep.qualifying_bins;
  out.estimates.push_back(r);
  out.pass = rep.pass;
  SampleTable t;
  t.columns = {"trajectory_index", "W"};
  for (std::size_t i = 0; i < rep.W_forward.size(); ++i)
    t.add_row({static_cast<double>(i), rep.W_forward[i]});
  out.tables["samples"] = t;
  SampleTable tb;
  tb.columns = {"trajectory_index", "W"};
  for (std::size_t i = 0; i < rep.W_backward.size(); ++i)
    tb.add_row({static_cast<double>(i), rep.W_backward[i]});
  out.tables["samples_backward"] = tb;
  return out;
}

CheckOutputs check_speck_seifert(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  if (!spec.phi) throw SchemePreconditionFailed("process has no phi family");
  std::vector<std::pair<std::string, TrajectoryFunctional>> fns = {
      {"xT1_sq",
       [](const Trajectory& t) {
         double v = t.states(0, t.steps());
         return v * v;
       }},
      {"exp_neg_xT_sq",
       [](const Trajectory& t) {
         return std::exp(-t.states.col(t.steps()).squaredNorm());
       }},
  };
  SpeckSeifertReport rep =
      speck_seifert_check(spec, *spec.phi, cfg.n, cfg.h, context_of(cfg), fns);
  CheckOutputs out;
  out.estimates.push_back(record("speck_seifert_exp_whk", rep.exp_whk.mean,
                                 rep.exp_whk.std_error, rep.exp_whk.n,
                                 rep.exp_whk.pass));
  for (const auto& p : rep.functionals) {
    EstimateRecord r = record("speck_seifert_" + p.name, p.weighted_mean,
                              p.weighted_se, cfg.n, p.pass);
    r.extra["auxiliary_mean"] = p.aux_mean;
    r.extra["auxiliary_se"] = p.aux_se;
    out.estimates.push_back(r);
  }
  out.pass = rep.pass;
  return out;
}

CheckOutputs check_detailed_balance(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  InversionScheme scheme = scheme_from_config(cfg, spec);
  DetailedBalanceOptions opt;
  opt.n = cfg.n;
  opt.h = cfg.h;
  if (spec.family_tag == "linear")
    opt.route = KernelRoute::linear_analytic;
  else if (spec.family_tag == "kraichnan_tangent")
    opt.route = KernelRoute::lognormal_analytic;
  double t = cfg.T > 0 ? cfg.T : 0.5;
  DetailedBalanceReport rep = detailed_balance_check(spec, scheme, t, context_of(cfg), opt);
  CheckOutputs out;
  EstimateRecord r = record("detailed_balance_" + rep.route,
                            rep.route == "binned" ? rep.max_z : rep.max_abs, 0.0,
                            cfg.n, rep.pass);
  r.extra["cells"] = rep.cells;
  out.estimates.push_back(r);
  out.pass = rep.pass;
  return out;
}

CheckOutputs check_detailed_fr(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  InversionScheme scheme = scheme_from_config(cfg, spec);
  DetailedFRReport rep =
      detailed_fr_check(spec, scheme, cfg.n, cfg.h, 8, 8, context_of(cfg));
  CheckOutputs out;
  EstimateRecord r = record("detailed_fr_max_z", rep.max_z, 0.0, cfg.n, rep.pass);
  r.extra["cells_tested"] = rep.cells_tested;
  r.extra["degenerate_w"] = rep.degenerate_w ? 1.0 : 0.0;
  out.estimates.push_back(r);
  out.pass = rep.pass;
  return out;
}

CheckOutputs check_entropy_rate(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  if (!spec.langevin) throw SchemePreconditionFailed("needs a Langevin-family process");
  const LangevinData& ld = *spec.langevin;
  Mat M(spec.dim, spec.dim);
  spec.jacobian(0.0, Vec::Zero(spec.dim), M);
  LinearModel model = LinearModel::from_mgamma(M, ld.gamma, ld.beta);
  double analytic = stationary_entropy_rate(model);

  InversionScheme rp = scheme_for(spec, InversionKind::reversed_protocol);
  FunctionalEnsemble ens = sample_functionals(spec, rp, cfg.n, cfg.h, context_of(cfg));
  double T = spec.horizon;
  std::vector<double> rate(ens.W.size());
  for (std::size_t i = 0; i < rate.size(); ++i) rate[i] = ens.W[i] / T;
  MeanSE m = mean_se(rate);
  bool pass = std::abs(m.mean - analytic) <= 3.0 * m.std_error;

  CheckOutputs out;
  EstimateRecord r = record("entropy_rate_wtot", m.mean, m.std_error, m.n, pass);
  r.extra["analytic"] = analytic;
  out.estimates.push_back(r);
  out.pass = pass;
  bool lgv = false;
  out.tables["samples"] = functional_table(ens.paths, lgv);
  return out;
}

ForceField constant_force(int dim, int axis) {
  ForceField f;
  f.name = "e" + std::to_string(axis);
  f.field = [dim, axis](double, const Vec&, Vec& o) {
    o.setZero(dim);
    o[axis] = 1.0;
  };
  f.divergence = [](double, const Vec&) { return 0.0; };
  return f;
}

ForceField localized_force(int dim, int axis) {
  ForceField f;
  f.name = "bump" + std::to_string(axis);
  f.field = [dim, axis](double, const Vec& x, Vec& o) {
    o.setZero(dim);
    o[axis] = std::exp(-0.5 * x.squaredNorm());
  };
  f.divergence = [axis](double, const Vec& x) {
    return -x[axis] * std::exp(-0.5 * x.squaredNorm());
  };
  return f;
}

CheckOutputs check_green_kubo(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  ResponseExperiment exp;
  exp.h = cfg.h;
  exp.n_paths = std::max<std::size_t>(64, cfg.n / 100);
  ForceField g = constant_force(spec.dim, 0);
  GreenKuboReport rep = green_kubo_check(spec, g, g, exp, context_of(cfg));
  CheckOutputs out;
  EstimateRecord r = record("green_kubo_response", rep.response_side, rep.response_se,
                            exp.n_paths, rep.pass);
  r.extra["correlation_side"] = rep.correlation_side;
  r.extra["correlation_se"] = rep.correlation_se;
  r.extra["window"] = rep.window;
  r.extra["equilibrium_flux_mean"] = rep.equilibrium_flux_mean;
  out.estimates.push_back(r);
  out.pass = rep.pass;
  return out;
}

CheckOutputs check_onsager(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  ResponseExperiment exp;
  exp.h = cfg.h;
  exp.n_paths = std::max<std::size_t>(64, cfg.n / 100);
  OnsagerReport rep = onsager_check(spec, localized_force(spec.dim, 0),
                                    localized_force(spec.dim, spec.dim > 1 ? 1 : 0),
                                    exp, context_of(cfg));
  CheckOutputs out;
  EstimateRecord r = record("onsager_t_ab", rep.t_ab, rep.t_ab_se, exp.n_paths, rep.pass);
  r.extra["t_ba"] = rep.t_ba;
  r.extra["t_ba_se"] = rep.t_ba_se;
  r.extra["skipped"] = rep.skipped ? 1.0 : 0.0;
  out.estimates.push_back(r);
  if (rep.skipped) out.notes.push_back("onsager: " + rep.warning);
  out.pass = rep.pass;
  return out;
}

CheckOutputs check_fdt(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  ResponseExperiment exp;
  exp.h = cfg.h;
  exp.n_paths = std::max<std::size_t>(64, cfg.n / 100);
  Observable o;
  o.name = "x1";
  o.value = [](const Vec& x) { return x[0]; };
  o.gradient = [](const Vec& x, Vec& g) {
    g.setZero(x.size());
    g[0] = 1.0;
  };
  FdtReport rep = fdt_check(spec, o, o, exp, context_of(cfg));
  CheckOutputs out;
  SampleTable t;
  t.columns = {"lag", "minus_dC", "minus_dC_se", "response", "response_se"};
  for (std::size_t i = 0; i < rep.lags.size(); ++i)
    t.add_row({rep.lags[i], rep.minus_dC[i], rep.minus_dC_se[i], rep.response[i],
               rep.response_se[i]});
  out.tables["fdt"] = t;
  out.estimates.push_back(record("fdt_lagwise", 0.0, 0.0, exp.n_paths, rep.pass));
  out.pass = rep.pass;
  return out;
}

CheckOutputs check_deformed_fdt(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  double a3 = param(cfg.process_params, "a3", 1.0 / 3.0);
  double a2 = param(cfg.process_params, "a2", 0.0);
  double beta = param(cfg.process_params, "beta", 1.0);
  FluxModel model = FluxModel::cubic(a3, a2, beta);
  FluxDensity flux = flux_invariant_density(model);
  ResponseExperiment exp;
  exp.h = cfg.h;
  exp.n_paths = std::max<std::size_t>(64, cfg.n / 500);
  exp.lag_grid = {0.1, 0.2, 0.4, 0.6};
  Observable o = bump_observable(0.0, 1.0);
  FdtReport rep = deformed_fdt_check(flux, o, exp, context_of(cfg));
  CheckOutputs out;
  SampleTable t;
  t.columns = {"lag", "minus_dC", "response", "correction", "residual"};
  for (std::size_t i = 0; i < rep.lags.size(); ++i)
    t.add_row({rep.lags[i], rep.minus_dC[i], rep.response[i], rep.correction[i],
               rep.minus_dC[i] - rep.response[i] - rep.correction[i]});
  out.tables["deformed_fdt"] = t;
  out.estimates.push_back(record("deformed_fdt_lagwise", 0.0, 0.0, exp.n_paths, rep.pass));
  out.pass = rep.pass;
  (void)spec;
  return out;
}

std::vector<Vec> stretching_ensemble(const ProcessSpec& spec, std::size_t n, double h,
                                     const RunContext& ctx) {
  std::vector<Vec> rho(n);
  Vec x0 = Vec::Zero(spec.dim);
  if (spec.kraichnan) {
    int d = spec.kraichnan->flow_dim;
    Mat id = Mat::Identity(d, d);
    x0 = Eigen::Map<const Vec>(id.data(), d * d);
  }
  parallel_for(n, ctx.workers, [&](std::size_t i) {
    RngStream noise(ctx.seed, i, RngDomain::path_noise);
    Vec start = x0;
    if (!spec.kraichnan && spec.phi) {
      RngStream init(ctx.seed, i, RngDomain::initial_condition);
      start = spec.phi->draw(0.0, init);
    }
    TangentOptions topt;
    topt.store_base_states = false;
    TangentTrajectory tan = evolve_tangent(spec, start, h, noise, topt);
    rho[i] = stretching_exponents(tan).rho;
  });
  return rho;
}

CheckOutputs check_multiplicative_fr(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  auto rho = stretching_ensemble(spec, cfg.n, cfg.h, context_of(cfg));
  // Stationary Kraichnan dynamics is time-reversible under the reversed
  // protocol: the backward ensemble has the same law.
  RunContext bctx = context_of(cfg);
  bctx.seed ^= 0x77777777ULL;
  auto rho_b = stretching_ensemble(spec, cfg.n, cfg.h, bctx);
  MultiplicativeHistogramReport rep = multiplicative_fr_histogram(rho, rho_b, 31);
  CheckOutputs out;
  EstimateRecord r = record("multiplicative_fr_max_z", rep.max_z, 0.0, cfg.n, rep.pass);
  r.extra["cells"] = rep.cells;
  out.estimates.push_back(r);
  out.pass = rep.pass;
  SampleTable t;
  int d = static_cast<int>(rho[0].size());
  t.columns = {"trajectory_index"};
  for (int c = 1; c <= d; ++c) t.columns.push_back("rho_" + std::to_string(c));
  for (std::size_t i = 0; i < rho.size(); ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (int c = 0; c < d; ++c) row.push_back(rho[i][c]);
    t.add_row(row);
  }
  out.tables["samples"] = t;
  return out;
}

CheckOutputs check_rate_function(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  std::vector<double> horizons = cfg.horizons;
  if (horizons.empty()) horizons = {5.0, 10.0, 20.0};
  InversionScheme rp = scheme_for(spec, InversionKind::reversed_protocol);

  std::vector<std::vector<double>> fwd(horizons.size()), bwd(horizons.size());
  for (std::size_t hzi = 0; hzi < horizons.size(); ++hzi) {
    ProcessSpec s = spec;
    s.horizon = horizons[hzi];
    RunContext ctx = context_of(cfg);
    ctx.seed += hzi * 1000003ULL;
    fwd[hzi] = sample_functionals(s, rp, cfg.n, cfg.h, ctx).W;
    BackwardProcess bw = build_backward(s, rp);
    ctx.seed ^= 0xF0F0F0F0ULL;
    bwd[hzi] = sample_functionals(bw.spec, bw.scheme, cfg.n, cfg.h, ctx).W;
  }
  RateFunctionPair fpair = estimate_rate_function(fwd, horizons, {}, 32, cfg.seed);
  RateFunctionPair bpair = estimate_rate_function(bwd, horizons, {}, 32, cfg.seed + 1);
  SymmetryReport sym = gc_symmetry_check(fpair.histogram, bpair.histogram);

  CheckOutputs out;
  EstimateRecord r = record("gc_symmetry_max_excess", sym.max_excess, 0.0, cfg.n, sym.pass);
  r.extra["max_residual"] = sym.max_residual;
  r.extra["window_points"] = sym.window_points;
  out.estimates.push_back(r);
  out.pass = sym.pass;
  SampleTable t;
  t.columns = {"w", "zeta", "band", "zeta_legendre", "band_legendre"};
  for (std::size_t i = 0; i < fpair.histogram.grid.size(); ++i)
    t.add_row({fpair.histogram.grid[i], fpair.histogram.zeta[i], fpair.histogram.band[i],
               fpair.legendre.zeta[i], fpair.legendre.band[i]});
  out.tables["rate_function"] = t;
  return out;
}

CheckOutputs check_contraction(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  std::size_t n = std::min<std::size_t>(cfg.n, 256);
  std::vector<double> resid(n);
  RunContext ctx = context_of(cfg);
  parallel_for(n, ctx.workers, [&](std::size_t i) {
    RngStream noise(ctx.seed, i, RngDomain::path_noise);
    Vec x0;
    if (spec.kraichnan) {
      int d = spec.kraichnan->flow_dim;
      Mat id = Mat::Identity(d, d);
      x0 = Eigen::Map<const Vec>(id.data(), d * d);
    } else if (spec.phi) {
      RngStream init(ctx.seed, i, RngDomain::initial_condition);
      x0 = spec.phi->draw(0.0, init);
    } else {
      x0 = Vec::Zero(spec.dim);
    }
    TangentTrajectory tan = evolve_tangent(spec, x0, cfg.h, noise);
    resid[i] = contraction_identity_residual(tan, spec);
  });
  double worst = *std::max_element(resid.begin(), resid.end());
  bool pass = worst < 1e-3 * spec.horizon;
  CheckOutputs out;
  out.estimates.push_back(record("contraction_max_residual", worst, 0.0, n, pass));
  out.pass = pass;
  return out;
}

CheckOutputs check_stretching(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  auto rho = stretching_ensemble(spec, cfg.n, cfg.h, context_of(cfg));
  int d = static_cast<int>(rho[0].size());
  CheckOutputs out;
  SampleTable t;
  t.columns = {"trajectory_index"};
  for (int c = 1; c <= d; ++c) t.columns.push_back("rho_" + std::to_string(c));
  for (std::size_t i = 0; i < rho.size(); ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (int c = 0; c < d; ++c) row.push_back(rho[i][c]);
    t.add_row(row);
  }
  out.tables["samples"] = t;
  for (int c = 0; c < d; ++c) {
    std::vector<double> comp(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) comp[i] = rho[i][c];
    MeanSE m = mean_se(comp);
    out.estimates.push_back(
        record("rho_" + std::to_string(c + 1) + "_mean", m.mean, m.std_error, m.n, true));
  }
  return out;
}

CheckOutputs check_involutivity(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  InversionScheme scheme = scheme_from_config(cfg, spec);
  ResidualReport rep = check_involutive(spec, scheme);
  CheckOutputs out;
  out.estimates.push_back(
      record("involutivity_residual", rep.max_residual, 0.0, 256, rep.pass));
  out.pass = rep.pass;
  return out;
}

CheckOutputs check_split_gen(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  InversionScheme scheme = scheme_from_config(cfg, spec);
  std::vector<ScalarProbe> fns;
  ScalarProbe f1;
  f1.f = [](const Vec& x) { return x.squaredNorm(); };
  ScalarProbe f2;
  f2.f = [](const Vec& x) { return std::sin(x[0]) + 0.5 * x.sum(); };
  fns.push_back(f1);
  fns.push_back(f2);
  ResidualReport rep = check_split_generator(spec, scheme, fns);
  CheckOutputs out;
  out.estimates.push_back(
      record("split_generator_residual", rep.max_residual, 0.0, 64, rep.pass));
  out.pass = rep.pass;
  return out;
}

CheckOutputs check_time_rev(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  InversionScheme scheme = scheme_from_config(cfg, spec);
  ResidualReport rep = check_time_reversible(spec, scheme);
  CheckOutputs out;
  out.estimates.push_back(
      record("time_reversibility_residual", rep.max_residual, 0.0, 256, rep.pass));
  out.pass = rep.pass;
  return out;
}

CheckOutputs check_first_law(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  if (!spec.langevin) throw SchemePreconditionFailed("needs a Langevin-family process");
  InversionScheme scheme = scheme_for(spec, InversionKind::canonical);
  FunctionalEnsemble ens = sample_functionals(spec, scheme, cfg.n, cfg.h, context_of(cfg));
  double worst = 0.0;
  for (const auto& p : ens.paths) {
    if (!p.valid) continue;
    double denom = std::abs(p.delta_U) + std::abs(p.Q) + std::abs(p.work);
    worst = std::max(worst, std::abs(p.first_law_residual) / std::max(denom, 1e-300));
  }
  bool pass = worst <= 5e-3;
  CheckOutputs out;
  out.estimates.push_back(record("first_law_max_relative_residual", worst, 0.0,
                                 cfg.n, pass));
  out.pass = pass;
  out.tables["samples"] = functional_table(ens.paths, true);
  return out;
}

CheckOutputs check_w_antisymmetry(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  InversionScheme scheme = scheme_from_config(cfg, spec);
  BackwardProcess bw = build_backward(spec, scheme);
  const PhiFamily& fam = scheme.phi                ? *scheme.phi
                         : spec.phi                ? *spec.phi
                                                   : throw SamplerUnavailable("no phi");
  RunContext ctx = context_of(cfg);
  std::size_t n = std::min<std::size_t>(cfg.n, 1000);
  std::vector<double> dev(n);
  parallel_for(n, ctx.workers, [&](std::size_t i) {
    RngStream init(ctx.seed, i, RngDomain::initial_condition);
    Vec x0 = fam.draw(0.0, init);
    RngStream noise(ctx.seed, i, RngDomain::path_noise);
    Trajectory traj = sample_path(spec, x0, cfg.h, noise);
    PathFunctionals f = functional_W(traj, spec, scheme);
    Trajectory rev = reverse_path(traj, scheme.involution);
    PathFunctionals fb = functional_W(rev, bw.spec, bw.scheme);
    dev[i] = std::abs(fb.W + f.W) / std::max(1.0, std::abs(f.W));
  });
  double worst = *std::max_element(dev.begin(), dev.end());
  bool pass = worst < 1e-8;
  CheckOutputs out;
  out.estimates.push_back(record("w_antisymmetry_max_relative", worst, 0.0, n, pass));
  out.pass = pass;
  return out;
}

CheckOutputs check_simulate(const ExperimentConfig& cfg) {
  ProcessSpec spec = process_from_config(cfg);
  RunContext ctx = context_of(cfg);
  std::size_t n = cfg.n;
  CheckOutputs out;
  SampleTable t;
  t.columns = {"trajectory_index", "step", "t"};
  for (int c = 1; c <= spec.dim; ++c) t.columns.push_back("x_" + std::to_string(c));
  std::vector<Trajectory> trajs(n);
  parallel_for(n, ctx.workers, [&](std::size_t i) {
    Vec x0 = Vec::Zero(spec.dim);
    if (spec.kraichnan) {
      int d = spec.kraichnan->flow_dim;
      Mat id = Mat::Identity(d, d);
      x0 = Eigen::Map<const Vec>(id.data(), d * d);
    } else if (spec.phi) {
      RngStream init(ctx.seed, i, RngDomain::initial_condition);
      x0 = spec.phi->draw(0.0, init);
    }
    RngStream noise(ctx.seed, i, RngDomain::path_noise);
    IntegrateOptions io;
    io.record_noise = false;
    trajs[i] = sample_path(spec, x0, cfg.h, noise, io);
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k <= trajs[i].steps(); ++k) {
      std::vector<double> row{static_cast<double>(i), static_cast<double>(k),
                              trajs[i].time(k)};
      for (int c = 0; c < spec.dim; ++c) row.push_back(trajs[i].states(c, k));
      t.add_row(row);
    }
  }
  out.tables["paths"] = t;
  return out;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& check_registry() {
  static const std::vector<std::pair<std::string, std::string>> reg = {
      {"jarzynski", "<e^-W> = 1 for the chosen process x scheme"},
      {"crooks", "log-ratio regression of forward/backward W histograms"},
      {"speck_seifert", "<e^-W^hk> = 1 and the auxiliary-process pairing"},
      {"detailed_balance", "kernel symmetry (binned or analytic route)"},
      {"detailed_fr", "joint (endpoint, W) histogram identity"},
      {"entropy_rate", "<W^tot>/T against -tr(Pi Gamma^-1 M)"},
      {"green_kubo", "transport coefficient vs flux autocorrelation integral"},
      {"onsager", "reciprocity of the transport matrix"},
      {"fdt", "lag-wise fluctuation-dissipation equality"},
      {"deformed_fdt", "flux-model FDT with the current correction term"},
      {"multiplicative_fr", "stretching-exponent histogram symmetry"},
      {"rate_function", "zeta(w) estimation and the stationary symmetry"},
      {"contraction", "pathwise phase-space contraction identity"},
      {"stretching", "stretching-exponent ensemble to CSV"},
      {"involutivity", "double time inversion returns the forward process"},
      {"split_generator", "L'_{t,+-} = +-R L_{t*,+-} R on probe functions"},
      {"time_reversibility", "forward and backward processes coincide"},
      {"first_law", "pathwise Delta U = -Q + W residual bound"},
      {"w_antisymmetry", "pathwise W' = -W~ under time reversal"},
      {"simulate", "raw sample paths to CSV"},
  };
  return reg;
}

CheckOutputs run_check(const ExperimentConfig& cfg) {
  const std::string& c = cfg.check;
  if (c == "jarzynski") return check_jarzynski(cfg);
  if (c == "crooks") return check_crooks(cfg);
  if (c == "speck_seifert") return check_speck_seifert(cfg);
  if (c == "detailed_balance") return check_detailed_balance(cfg);
  if (c == "detailed_fr") return check_detailed_fr(cfg);
  if (c == "entropy_rate") return check_entropy_rate(cfg);
  if (c == "green_kubo") return check_green_kubo(cfg);
  if (c == "onsager") return check_onsager(cfg);
  if (c == "fdt") return check_fdt(cfg);
  if (c == "deformed_fdt") return check_deformed_fdt(cfg);
  if (c == "multiplicative_fr") return check_multiplicative_fr(cfg);
  if (c == "rate_function") return check_rate_function(cfg);
  if (c == "contraction") return check_contraction(cfg);
  if (c == "stretching") return check_stretching(cfg);
  if (c == "involutivity") return check_involutivity(cfg);
  if (c == "split_generator") return check_split_gen(cfg);
  if (c == "time_reversibility") return check_time_rev(cfg);
  if (c == "first_law") return check_first_law(cfg);
  if (c == "w_antisymmetry") return check_w_antisymmetry(cfg);
  if (c == "simulate") return check_simulate(cfg);
  throw ConfigInvalid("check: unknown name '" + c + "'");
}

int run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  CheckOutputs out = run_check(cfg);
  auto t1 = std::chrono::steady_clock::now();

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out);
  for (const auto& [name, table] : out.tables)
    table.write_csv(cfg.out + "/" + name + ".csv");
  write_jsonl(cfg.out + "/estimates.jsonl", out.estimates);

  nlohmann::json manifest;
  manifest["config"] = nlohmann::json::parse(cfg.to_json_text());
  manifest["code_version"] = kVersion;
  manifest["seed"] = cfg.seed;
  manifest["wall_time_s"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0;
  nlohmann::json verdicts = nlohmann::json::object();
  for (const auto& e : out.estimates) verdicts[e.name] = e.pass ? "pass" : "fail";
  manifest["verdicts"] = verdicts;
  manifest["pass"] = out.pass;
  if (!out.notes.empty()) manifest["notes"] = out.notes;
  write_text_file(cfg.out + "/manifest.json", manifest.dump(2) + "\n");

  return out.pass ? 0 : 1;
}

std::string catalog_text(bool json_mode) {
  if (json_mode) {
    nlohmann::json j;
    for (const auto& e : process_catalog()) {
      nlohmann::json p;
      p["name"] = e.name;
      p["summary"] = e.summary;
      p["defaults"] = e.defaults;
      p["schemes"] = e.schemes;
      j["processes"].push_back(p);
    }
    for (const auto& [name, desc] : check_registry())
      j["checks"].push_back({{"name", name}, {"summary", desc}});
    return j.dump(2) + "\n";
  }
  std::string s;
  s += "processes:\n";
  for (const auto& e : process_catalog()) {
    s += "  " + e.name + " - " + e.summary + "\n    params:";
    for (const auto& [k, v] : e.defaults) s += " " + k + "=" + format_double(v);
    s += "\n    schemes:";
    for (const auto& sch : e.schemes) s += " " + sch;
    s += "\n";
  }
  s += "checks:\n";
  for (const auto& [name, desc] : check_registry())
    s += "  " + name + " - " + desc + "\n";
  return s;
}

}  // namespace fluctrel
