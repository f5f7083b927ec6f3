#include "fluctrel/reversal.hpp"

#include <cmath>

#include "fluctrel/stats.hpp"

namespace fluctrel {

InversionKind parse_inversion(const std::string& name) {
  if (name == "natural") return InversionKind::natural;
  if (name == "hat_plus_zero") return InversionKind::hat_plus_zero;
  if (name == "canonical") return InversionKind::canonical;
  if (name == "reversed_protocol") return InversionKind::reversed_protocol;
  if (name == "current_reversal") return InversionKind::current_reversal;
  if (name == "complete_reversal") return InversionKind::complete_reversal;
  throw ConfigInvalid("unknown inversion scheme: " + name);
}

std::string to_string(InversionKind kind) {
  switch (kind) {
    case InversionKind::natural: return "natural";
    case InversionKind::hat_plus_zero: return "hat_plus_zero";
    case InversionKind::canonical: return "canonical";
    case InversionKind::reversed_protocol: return "reversed_protocol";
    case InversionKind::current_reversal: return "current_reversal";
    case InversionKind::complete_reversal: return "complete_reversal";
  }
  return "?";
}

InversionScheme scheme_for(const ProcessSpec& spec, InversionKind kind) {
  InversionScheme s;
  s.kind = kind;
  if (kind == InversionKind::canonical && !spec.involution.is_identity())
    s.involution = spec.involution;  // e.g. momentum flip for Kramers
  if (kind == InversionKind::current_reversal) s.phi = spec.phi;
  if (kind == InversionKind::complete_reversal)
    s.phi = spec.phi_evolving ? spec.phi_evolving : spec.phi;
  return s;
}

InversionScheme scheme_for(const ProcessSpec& spec, const std::string& kind) {
  return scheme_for(spec, parse_inversion(kind));
}

// ---------------------------------------------------------------------------
// Splitting dictated by the scheme

ProcessSpec resplit(const ProcessSpec& spec, const InversionScheme& scheme) {
  ProcessSpec out = spec;
  const ProcessSpec base = spec;  // capture by value in closures

  auto total_div = [base](double t, const Vec& x) {
    return base.divergence_plus(t, x) + base.divergence_minus(t, x);
  };

  switch (scheme.kind) {
    case InversionKind::natural: {
      out.drift_plus = nullptr;
      out.drift_minus = [base](double t, const Vec& x, Vec& o) { base.drift(t, x, o); };
      out.div_plus = [](double, const Vec&) { return 0.0; };
      out.div_minus = total_div;
      break;
    }
    case InversionKind::hat_plus_zero: {
      out.drift_plus = [base](double t, const Vec& x, Vec& o) { base.hat_shift(t, x, o); };
      out.drift_minus = [base](double t, const Vec& x, Vec& o) { base.hat_drift(t, x, o); };
      out.div_plus = nullptr;
      if (spec.additive_noise || !spec.has_noise())
        out.div_minus = total_div;
      else
        out.div_minus = nullptr;  // finite differences on the composite
      break;
    }
    case InversionKind::canonical: {
      if (!spec.langevin)
        throw SchemePreconditionFailed("canonical inversion needs a Langevin-family spec");
      const LangevinData ld = *spec.langevin;
      int dim = spec.dim;
      Mat gam = ld.gamma, pim = ld.pi;
      out.drift_plus = [ld, gam, dim](double t, const Vec& x, Vec& o) {
        Vec g(dim);
        ld.gradH(t, x, g);
        o.noalias() = -gam * g;
      };
      out.drift_minus = [ld, pim, dim](double t, const Vec& x, Vec& o) {
        Vec g(dim);
        ld.gradH(t, x, g);
        o.noalias() = pim * g;
        if (ld.G) {
          Vec f(dim);
          ld.G(t, x, f);
          o += f;
        }
      };
      out.div_plus = nullptr;
      // div(Pi grad H) = 0 identically; only the extra force contributes.
      if (ld.divG)
        out.div_minus = [ld](double t, const Vec& x) { return ld.divG(t, x); };
      else if (!ld.G)
        out.div_minus = [](double, const Vec&) { return 0.0; };
      else
        out.div_minus = nullptr;
      break;
    }
    case InversionKind::reversed_protocol: {
      out.drift_plus = [base](double t, const Vec& x, Vec& o) { base.drift(t, x, o); };
      out.drift_minus = nullptr;
      out.div_plus = total_div;
      out.div_minus = [](double, const Vec&) { return 0.0; };
      break;
    }
    case InversionKind::current_reversal:
    case InversionKind::complete_reversal: {
      if (!scheme.phi)
        throw SchemePreconditionFailed("current/complete reversal needs a phi family");
      const PhiFamily phi = *scheme.phi;
      int dim = spec.dim;
      out.drift_plus = [base, phi, dim](double t, const Vec& x, Vec& o) {
        Vec g(dim), s(dim);
        phi.gradient(t, x, g);
        Mat d(dim, dim);
        base.diffusion(t, x, d);
        base.hat_shift(t, x, s);
        o.noalias() = s - 0.5 * (d * g);
      };
      const DriftFn plus = out.drift_plus;
      out.drift_minus = [base, plus, dim](double t, const Vec& x, Vec& o) {
        Vec p(dim);
        plus(t, x, p);
        base.drift(t, x, o);
        o -= p;
      };
      out.div_plus = nullptr;
      out.div_minus = nullptr;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Preconditions

void check_scheme_preconditions(const ProcessSpec& spec, const InversionScheme& scheme,
                                const std::vector<Vec>& probes) {
  if (scheme.kind == InversionKind::canonical) {
    if (!spec.langevin)
      throw SchemePreconditionFailed("canonical inversion needs a Langevin-family spec");
    Mat r;
    if (scheme.involution.is_identity())
      r = Mat::Identity(spec.dim, spec.dim);
    else if (scheme.involution.linear)
      r = *scheme.involution.linear;
    else
      throw InvolutionIncompatible("canonical inversion needs a linear involution");
    const Mat& g = spec.langevin->gamma;
    const Mat& pi = spec.langevin->pi;
    double sg = (r * g * r.transpose() - g).norm();
    double sp = (r * pi * r.transpose() + pi).norm();
    double scale = std::max(1.0, std::max(g.norm(), pi.norm()));
    if (sg > 1e-10 * scale || sp > 1e-10 * scale)
      throw InvolutionIncompatible("involution violates r Gamma r^T = Gamma, r Pi r^T = -Pi");
    return;
  }

  if (scheme.kind == InversionKind::current_reversal ||
      scheme.kind == InversionKind::complete_reversal) {
    if (!scheme.phi)
      throw SchemePreconditionFailed("missing phi family");
    const PhiFamily& phi = *scheme.phi;
    double T = spec.horizon;
    for (double t : {0.0, 0.5 * T, T}) {
      double scale = 0.0, worst = 0.0;
      for (const Vec& x : probes) {
        ScalarProbe rho;
        rho.f = [&phi, t](const Vec& y) { return std::exp(-phi.phi(t, y)); };
        double lhs = generator_apply(spec, t, rho, x, /*adjoint=*/true);
        double r = std::exp(-phi.phi(t, x));
        scale = std::max(scale, r);
        double resid = lhs;
        if (scheme.kind == InversionKind::complete_reversal)
          resid -= r * (-phi.time_derivative(t, x));  // d_t e^-phi
        worst = std::max(worst, std::abs(resid));
      }
      if (worst > 1e-4 * std::max(scale, 1e-300))
        throw SchemePreconditionFailed(
            "phi family residual " + std::to_string(worst) + " at t=" + std::to_string(t));
    }
  }
}

// ---------------------------------------------------------------------------
// Backward construction

namespace {

PhiFamily primed_phi(const PhiFamily& phi, const Involution& inv, double T) {
  PhiFamily out;
  out.value = [phi, inv, T](double t, const Vec& x) {
    Vec xs = inv.apply(x);
    return phi.phi(T - t, xs) + inv.log_sigma(xs);
  };
  out.grad = [phi, inv, T](double t, const Vec& x, Vec& o) {
    Vec xs = inv.apply(x);
    Vec g(x.size());
    phi.gradient(T - t, xs, g);
    if (inv.is_identity()) {
      o = g;
    } else {
      Mat J(x.size(), x.size());
      inv.jac(x, J);
      o.noalias() = J.transpose() * g;
      if (!inv.linear) {
        // grad of log sigma term by finite differences
        Vec xp = x;
        for (int i = 0; i < x.size(); ++i) {
          double hi = fd_step(x[i]);
          xp[i] = x[i] + hi;
          double vp = inv.log_sigma(inv.apply(xp));
          xp[i] = x[i] - hi;
          double vm = inv.log_sigma(inv.apply(xp));
          xp[i] = x[i];
          o[i] += (vp - vm) / (2.0 * hi);
        }
      }
    }
  };
  out.dt = [phi, inv, T](double t, const Vec& x) {
    return -phi.time_derivative(T - t, inv.apply(x));
  };
  if (phi.sample)
    out.sample = [phi, inv, T](double t, RngStream& rng) {
      return inv.apply(phi.draw(T - t, rng));
    };
  return out;
}

}  // namespace

BackwardProcess build_backward(const ProcessSpec& spec, const InversionScheme& scheme) {
  check_scheme_preconditions(spec, scheme, default_probes(spec, 64));
  ProcessSpec fwd = resplit(spec, scheme);
  const Involution inv = scheme.involution;
  const double T = spec.horizon;
  const int dim = spec.dim;
  const bool lin = inv.is_identity() || inv.linear.has_value();

  BackwardProcess bw;
  bw.spec = fwd;  // copy bookkeeping; closures replaced below
  bw.spec.family_tag = spec.family_tag + "_backward";
  bw.log_sigma_const = 0.0;

  auto pushforward = [inv, dim](const Vec& xs, const Vec& v, Vec& o) {
    if (inv.is_identity()) {
      o = v;
      return;
    }
    Mat J(dim, dim);
    inv.jac(xs, J);
    o.noalias() = J * v;
  };

  const ProcessSpec fw = fwd;
  bw.spec.drift_plus = [fw, inv, T, pushforward, dim](double t, const Vec& x, Vec& o) {
    Vec xs = inv.apply(x), u(dim);
    fw.dplus(T - t, xs, u);
    pushforward(xs, u, o);
  };
  bw.spec.drift_minus = [fw, inv, T, pushforward, dim](double t, const Vec& x, Vec& o) {
    Vec xs = inv.apply(x), u(dim);
    fw.dminus(T - t, xs, u);
    pushforward(xs, u, o);
    o = -o;
  };
  if (fw.covariance) {
    if (inv.is_identity()) {
      CovarianceFn cov = fw.covariance;
      bw.spec.covariance = [cov, T](double t, const Vec& x, const Vec& y, Mat& o) {
        cov(T - t, x, y, o);
      };
    } else {
      CovarianceFn cov = fw.covariance;
      bw.spec.covariance = [cov, inv, T, dim](double t, const Vec& x, const Vec& y, Mat& o) {
        Vec xs = inv.apply(x), ys = inv.apply(y);
        Mat Jx(dim, dim), Jy(dim, dim), D(dim, dim);
        inv.jac(xs, Jx);
        inv.jac(ys, Jy);
        cov(T - t, xs, ys, D);
        o = Jx * D * Jy.transpose();
      };
    }
  }
  bw.spec.additive_noise = fw.additive_noise && lin;

  // Analytic divergences and corrections transform cleanly for linear
  // involutions with r^2 = 1; otherwise fall back to finite differences.
  if (lin) {
    if (fw.div_plus) {
      ScalarFieldFn dp = fw.div_plus;
      bw.spec.div_plus = [dp, inv, T](double t, const Vec& x) {
        return dp(T - t, inv.apply(x));
      };
    } else {
      bw.spec.div_plus = nullptr;
    }
    if (fw.div_minus) {
      ScalarFieldFn dm = fw.div_minus;
      bw.spec.div_minus = [dm, inv, T](double t, const Vec& x) {
        return -dm(T - t, inv.apply(x));
      };
    } else {
      bw.spec.div_minus = nullptr;
    }
    DriftFn hsf = fw.hat_shift_fn;
    if (hsf) {
      bw.spec.hat_shift_fn = [hsf, inv, pushforward, T, dim](double t, const Vec& x, Vec& o) {
        Vec xs = inv.apply(x), v(dim);
        hsf(T - t, xs, v);
        pushforward(xs, v, o);
      };
    } else {
      bw.spec.hat_shift_fn = nullptr;
    }
    DriftFn icf = fw.ito_correction_fn;
    if (icf) {
      bw.spec.ito_correction_fn = [icf, inv, pushforward, T, dim](double t, const Vec& x, Vec& o) {
        Vec xs = inv.apply(x), v(dim);
        icf(T - t, xs, v);
        pushforward(xs, v, o);
      };
    } else {
      bw.spec.ito_correction_fn = nullptr;
    }
  } else {
    bw.spec.div_plus = nullptr;
    bw.spec.div_minus = nullptr;
    bw.spec.hat_shift_fn = nullptr;
    bw.spec.ito_correction_fn = nullptr;
  }

  // Full-drift Jacobian when one side of the splitting vanishes.
  bw.spec.drift_jacobian = nullptr;
  if (lin && fw.drift_jacobian &&
      (scheme.kind == InversionKind::natural ||
       scheme.kind == InversionKind::reversed_protocol)) {
    double sign = scheme.kind == InversionKind::natural ? -1.0 : 1.0;
    JacobianFn jac = fw.drift_jacobian;
    Mat r = inv.is_identity() ? Mat::Identity(dim, dim) : *inv.linear;
    bw.spec.drift_jacobian = [jac, inv, r, T, sign, dim](double t, const Vec& x, Mat& o) {
      Mat A(dim, dim);
      jac(T - t, inv.apply(x), A);
      o = sign * (r * A * r);
    };
  }

  // Langevin structure of the backward process.
  if (fw.langevin && lin) {
    Mat r = inv.is_identity() ? Mat::Identity(dim, dim) : *inv.linear;
    const LangevinData ld = *fw.langevin;
    LangevinData lb;
    lb.beta = ld.beta;
    lb.gamma = r * ld.gamma * r.transpose();
    lb.pi = -r * ld.pi * r.transpose();
    lb.H = [ld, r, T](double t, const Vec& x) { return ld.H(T - t, r * x); };
    DriftFn gh = ld.gradH;
    lb.gradH = [gh, r, T, dim](double t, const Vec& x, Vec& o) {
      Vec g(dim);
      gh(T - t, r * x, g);
      o.noalias() = r.transpose() * g;
    };
    if (ld.dtH) {
      ScalarFieldFn dtH = ld.dtH;
      lb.dtH = [dtH, r, T](double t, const Vec& x) { return -dtH(T - t, r * x); };
    }
    if (ld.G) {
      DriftFn Gf = ld.G;
      lb.G = [Gf, r, T, dim](double t, const Vec& x, Vec& o) {
        Vec f(dim);
        Gf(T - t, r * x, f);
        o.noalias() = -(r * f);
      };
      if (ld.divG) {
        ScalarFieldFn dG = ld.divG;
        lb.divG = [dG, r, T](double t, const Vec& x) { return -dG(T - t, r * x); };
      }
    }
    if (ld.free_energy) {
      auto fe = ld.free_energy;
      lb.free_energy = [fe, T](double t) { return fe(T - t); };
    }
    bw.spec.langevin = lb;
  } else if (!lin) {
    bw.spec.langevin.reset();
  }

  // kraichnan block survives untouched only for the identity involution.
  if (fw.kraichnan && !inv.is_identity()) bw.spec.kraichnan.reset();

  // Primed phi families.
  if (fw.phi) bw.spec.phi = primed_phi(*fw.phi, inv, T);
  if (fw.phi_evolving) bw.spec.phi_evolving = primed_phi(*fw.phi_evolving, inv, T);

  bw.scheme = scheme;
  if (scheme.phi) bw.scheme.phi = primed_phi(*scheme.phi, inv, T);
  // Re-derive the split from the scheme on the primed process.  For the
  // u^+ = 0 inversion the transformed split already carries the
  // (1/2) d' grad ln sigma term of the backward drift and must be kept.
  if (scheme.kind != InversionKind::hat_plus_zero)
    bw.spec = resplit(bw.spec, bw.scheme);
  return bw;
}

// ---------------------------------------------------------------------------
// Structural checks

std::vector<Vec> default_probes(const ProcessSpec& spec, int count, double box) {
  std::vector<Vec> probes;
  probes.reserve(count);
  bool matrix_state = spec.kraichnan.has_value() ||
                      spec.family_tag.rfind("kraichnan_tangent", 0) == 0;
  for (int i = 0; i < count; ++i) {
    auto h = halton_point(i, spec.dim);
    Vec x(spec.dim);
    for (int k = 0; k < spec.dim; ++k) x[k] = box * (2.0 * h[k] - 1.0);
    if (matrix_state && spec.kraichnan) {
      // keep the cocycle near the identity with positive determinant
      int d = spec.kraichnan->flow_dim;
      Eigen::Map<Mat> X(x.data(), d, d);
      X = Mat::Identity(d, d) + 0.3 / box * X;
    }
    probes.push_back(x);
  }
  return probes;
}

namespace {

double rel_dev(const Vec& a, const Vec& b) {
  double s = std::max(1.0, std::max(a.norm(), b.norm()));
  return (a - b).norm() / s;
}

double spec_deviation(const ProcessSpec& a, const ProcessSpec& b, double t,
                      const Vec& x) {
  Vec ua(a.dim), ub(a.dim);
  double worst = 0.0;
  a.dplus(t, x, ua);
  b.dplus(t, x, ub);
  worst = std::max(worst, rel_dev(ua, ub));
  a.dminus(t, x, ua);
  b.dminus(t, x, ub);
  worst = std::max(worst, rel_dev(ua, ub));
  Mat da(a.dim, a.dim), db(a.dim, a.dim);
  a.diffusion(t, x, da);
  b.diffusion(t, x, db);
  double s = std::max(1.0, std::max(da.norm(), db.norm()));
  worst = std::max(worst, (da - db).norm() / s);
  return worst;
}

}  // namespace

ResidualReport check_involutive(const ProcessSpec& spec, const InversionScheme& scheme,
                                const std::vector<Vec>& probes_in) {
  auto probes = probes_in.empty() ? default_probes(spec) : probes_in;
  BackwardProcess bw = build_backward(spec, scheme);
  BackwardProcess fwd2 = build_backward(bw.spec, bw.scheme);
  ProcessSpec orig = resplit(spec, scheme);

  ResidualReport rep;
  for (double frac : {0.1, 0.5, 0.9}) {
    double t = frac * spec.horizon;
    for (const Vec& x : probes)
      rep.max_residual = std::max(rep.max_residual,
                                  spec_deviation(orig, fwd2.spec, t, x));
  }
  rep.pass = rep.max_residual < 1e-8;
  rep.detail = "double inversion vs original";
  return rep;
}

ResidualReport check_split_generator(const ProcessSpec& spec,
                                     const InversionScheme& scheme,
                                     const std::vector<ScalarProbe>& probe_fns,
                                     const std::vector<Vec>& probes_in) {
  auto probes = probes_in.empty() ? default_probes(spec, 64) : probes_in;
  BackwardProcess bw = build_backward(spec, scheme);
  ProcessSpec fwd = resplit(spec, scheme);
  const Involution inv = scheme.involution;
  double T = spec.horizon;

  ResidualReport rep;
  for (const auto& f : probe_fns) {
    SpaceFieldFn base = f.f;
    ScalarProbe rf;  // (R f)(x) = f(x*)
    rf.f = [base, inv](const Vec& x) { return base(inv.apply(x)); };
    for (double frac : {0.25, 0.75}) {
      double t = frac * T;
      for (const Vec& x : probes) {
        for (auto part : {GeneratorPart::plus, GeneratorPart::minus}) {
          double sign = part == GeneratorPart::plus ? 1.0 : -1.0;
          double lhs = generator_apply(bw.spec, t, f, x, false, part);
          // sign * (R L_{t*,part} R f)(x) = sign * (L_{t*,part} (R f))(x*)
          double rhs = sign * generator_apply(fwd, T - t, rf, inv.apply(x), false, part);
          rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs));
        }
      }
    }
  }
  rep.pass = rep.max_residual < 1e-5;
  rep.detail = "split generator relation";
  return rep;
}

ResidualReport check_time_reversible(const ProcessSpec& spec,
                                     const InversionScheme& scheme,
                                     const std::vector<Vec>& probes_in) {
  auto probes = probes_in.empty() ? default_probes(spec) : probes_in;
  BackwardProcess bw = build_backward(spec, scheme);
  ProcessSpec fwd = resplit(spec, scheme);
  ResidualReport rep;
  for (double frac : {0.1, 0.5, 0.9}) {
    double t = frac * spec.horizon;
    for (const Vec& x : probes)
      rep.max_residual =
          std::max(rep.max_residual, spec_deviation(fwd, bw.spec, t, x));
  }
  rep.pass = rep.max_residual < 1e-8;
  rep.detail = "forward vs backward process";
  return rep;
}

ResidualReport check_current_reversal_identity(const ProcessSpec& spec,
                                               const InversionScheme& scheme,
                                               const std::vector<Vec>& probes_in) {
  if (!scheme.phi) throw SchemePreconditionFailed("needs a phi family");
  auto probes = probes_in.empty() ? default_probes(spec) : probes_in;
  BackwardProcess bw = build_backward(spec, scheme);
  const Involution inv = scheme.involution;
  double T = spec.horizon;
  int dim = spec.dim;

  auto current = [dim](const ProcessSpec& s, const PhiFamily& phi, double t,
                       const Vec& x) {
    Vec uh(dim), g(dim);
    s.hat_drift(t, x, uh);
    phi.gradient(t, x, g);
    Mat d(dim, dim);
    s.diffusion(t, x, d);
    Vec j = uh + 0.5 * (d * g);
    return Vec(j * std::exp(-phi.phi(t, x)));
  };

  ResidualReport rep;
  for (double frac : {0.25, 0.5, 0.75}) {
    double t = frac * T;
    for (const Vec& x : probes) {
      Vec xs = inv.apply(x);
      Vec jf = current(spec, *scheme.phi, T - t, xs);
      Vec jb = current(bw.spec, *bw.scheme.phi, t, x);
      Mat J(dim, dim);
      inv.jac(xs, J);
      double sigma = std::exp(-inv.log_sigma(xs));  // sigma(x) = 1/sigma(x*)
      Vec rhs = -(J * jf) * sigma;
      rep.max_residual = std::max(rep.max_residual, (jb - rhs).norm());
    }
  }
  rep.pass = rep.max_residual < 1e-6;
  rep.detail = "backward current identity";
  return rep;
}

}  // namespace fluctrel
