#include "fluctrel/functionals.hpp"

#include <cmath>

#include "fluctrel/stats.hpp"

namespace fluctrel {

namespace {

struct StepView {
  double t_mid;
  Vec x_lo, x_hi, x_mid, dx;
};

// Generic Stratonovich-midpoint accumulation of Lemma-2's density.
double generic_J(const Trajectory& traj, const ProcessSpec& split, bool needs_dinv,
                 int first, int last) {
  int d = split.dim;
  KahanSum acc;
  Vec up(d), um(d), w(d);
  Mat dmat(d, d);
  for (int k = first; k < last; ++k) {
    double tm = traj.time(k) + 0.5 * traj.step;
    Vec xm = 0.5 * (traj.states.col(k) + traj.states.col(k + 1));
    Vec dx = traj.states.col(k + 1) - traj.states.col(k);

    split.hat_drift_plus(tm, xm, up);
    double term = 0.0;
    if (needs_dinv) {
      split.diffusion(tm, xm, dmat);
      Mat dinv = checked_inverse(dmat);
      w.noalias() = dinv * up;
      split.dminus(tm, xm, um);
      term += 2.0 * w.dot(dx) - traj.step * 2.0 * w.dot(um);
    }
    term -= traj.step * split.divergence_minus(tm, xm);
    acc.add(term);
  }
  return acc.value();
}

// Canonical Langevin density: -beta grad H . dx + beta grad H . G dt
// - div G dt, all at Stratonovich midpoints.
double canonical_J(const Trajectory& traj, const ProcessSpec& spec, int first,
                   int last) {
  const LangevinData& ld = *spec.langevin;
  int d = spec.dim;
  KahanSum acc;
  Vec g(d), f(d);
  for (int k = first; k < last; ++k) {
    double tm = traj.time(k) + 0.5 * traj.step;
    Vec xm = 0.5 * (traj.states.col(k) + traj.states.col(k + 1));
    Vec dx = traj.states.col(k + 1) - traj.states.col(k);
    ld.gradH(tm, xm, g);
    double term = -ld.beta * g.dot(dx);
    if (ld.G) {
      ld.G(tm, xm, f);
      term += traj.step * ld.beta * g.dot(f);
      term -= traj.step * (ld.divG ? ld.divG(tm, xm) : 0.0);
    }
    acc.add(term);
  }
  return acc.value();
}

}  // namespace

double entropy_flux_integral(const Trajectory& traj, const ProcessSpec& spec,
                             const InversionScheme& scheme, int first, int last) {
  if (last < 0) last = traj.steps();

  switch (scheme.kind) {
    case InversionKind::canonical:
      if (!spec.langevin)
        throw SchemePreconditionFailed("canonical functional needs Langevin data");
      return canonical_J(traj, spec, first, last);

    case InversionKind::current_reversal: {
      if (!scheme.phi) throw SchemePreconditionFailed("missing phi family");
      // int J dt = -Delta phi + int dt phi dt  (Hatano-Sasa reduction)
      const PhiFamily& phi = *scheme.phi;
      KahanSum acc;
      for (int k = first; k < last; ++k) {
        double tm = traj.time(k) + 0.5 * traj.step;
        Vec xm = 0.5 * (traj.states.col(k) + traj.states.col(k + 1));
        acc.add(traj.step * phi.time_derivative(tm, xm));
      }
      double dphi = phi.phi(traj.time(last), traj.states.col(last)) -
                    phi.phi(traj.time(first), traj.states.col(first));
      return acc.value() - dphi;

    }
    case InversionKind::complete_reversal: {
      if (!scheme.phi) throw SchemePreconditionFailed("missing phi family");
      // J_t is a total derivative: the integral telescopes exactly.
      const PhiFamily& phi = *scheme.phi;
      return phi.phi(traj.time(first), traj.states.col(first)) -
             phi.phi(traj.time(last), traj.states.col(last));
    }

    default: {
      ProcessSpec split = resplit(spec, scheme);
      bool needs_dinv = scheme.kind != InversionKind::hat_plus_zero &&
                        !(scheme.kind == InversionKind::natural && spec.additive_noise);
      if (!spec.has_noise()) needs_dinv = false;
      return generic_J(traj, split, needs_dinv, first, last);
    }
  }
}

PathFunctionals functional_W(const Trajectory& traj, const ProcessSpec& spec,
                             const InversionScheme& scheme, SpaceFieldFn phi0,
                             SpaceFieldFn phiT) {
  PathFunctionals out;
  out.scheme = scheme.kind;
  out.valid = !traj.escaped;
  if (!out.valid) return out;

  int N = traj.steps();
  double T = traj.time(N);
  double t0 = traj.time(0);

  if (!phi0 || !phiT) {
    if (!scheme.phi && !spec.phi)
      throw SchemePreconditionFailed("no boundary functions and no phi family");
    const PhiFamily& fam = scheme.phi ? *scheme.phi : *spec.phi;
    if (!phi0) phi0 = [fam, t0](const Vec& x) { return fam.phi(t0, x); };
    if (!phiT) phiT = [fam, T](const Vec& x) { return fam.phi(T, x); };
  }

  out.delta_phi = phiT(traj.states.col(N)) - phi0(traj.states.col(0));

  if (scheme.kind == InversionKind::complete_reversal) {
    // The family's boundary terms cancel the telescoped integral exactly.
    out.J_integral = -out.delta_phi;
    out.W = out.delta_phi + out.J_integral;
    out.variant = WVariant::generic;
  } else {
    out.J_integral = entropy_flux_integral(traj, spec, scheme);
    out.W = out.delta_phi + out.J_integral;
    out.variant = scheme.kind == InversionKind::reversed_protocol ? WVariant::tot
                  : scheme.kind == InversionKind::current_reversal ? WVariant::ex
                                                                   : WVariant::generic;
  }

  if (spec.langevin && scheme.kind == InversionKind::canonical) {
    HeatWork hw = heat_work_langevin(traj, spec);
    out.Q = hw.Q;
    out.work = hw.work;
    out.delta_U = hw.delta_U;
    out.first_law_residual = hw.residual;
  }
  return out;
}

HeatWork heat_work_langevin(const Trajectory& traj, const ProcessSpec& spec) {
  if (!spec.langevin) throw SchemePreconditionFailed("not a Langevin-family spec");
  if (traj.noise_record.size() == 0)
    throw MissingNoiseRecord("heat needs the stored noise increments");
  const LangevinData& ld = *spec.langevin;
  int d = spec.dim;
  int N = traj.steps();

  KahanSum q, w;
  Vec g(d), f(d), um(d);
  for (int k = 0; k < N; ++k) {
    double tm = traj.time(k) + 0.5 * traj.step;
    Vec xm = 0.5 * (traj.states.col(k) + traj.states.col(k + 1));
    Vec dx = traj.states.col(k + 1) - traj.states.col(k);
    Vec zeta = noise_increment(spec, traj, k);

    ld.gradH(tm, xm, g);
    um.noalias() = ld.pi * g;
    double divG = 0.0;
    if (ld.G) {
      ld.G(tm, xm, f);
      um += f;
      divG = ld.divG ? ld.divG(tm, xm) : 0.0;
    }
    // Heat from Eq. (bQ): the friction term is eliminated through the
    // integrator's own update, Gamma grad H dt = -(dx - zeta - u_- dt),
    // which keeps beta Q identical to the entropy-flux integral.
    double qk = -g.dot(dx - zeta - traj.step * um) - g.dot(zeta) -
                traj.step * divG / ld.beta;
    q.add(qk);

    double wk = traj.step * (ld.dtH ? ld.dtH(tm, xm) : 0.0);
    if (ld.G) wk += traj.step * (g.dot(f) - divG / ld.beta);
    w.add(wk);
  }

  HeatWork hw;
  hw.Q = q.value();
  hw.work = w.value();
  hw.delta_U = ld.H(traj.time(N), traj.states.col(N)) -
               ld.H(traj.time(0), traj.states.col(0));
  hw.residual = hw.delta_U + hw.Q - hw.work;
  return hw;
}

double housekeeping_W(const Trajectory& traj, const ProcessSpec& spec,
                      const PhiFamily& phi) {
  int d = spec.dim;
  int N = traj.steps();
  KahanSum acc;
  Vec g(d), uh(d);
  Mat dmat(d, d);
  for (int k = 0; k < N; ++k) {
    double tm = traj.time(k) + 0.5 * traj.step;
    Vec xm = 0.5 * (traj.states.col(k) + traj.states.col(k + 1));
    Vec dx = traj.states.col(k + 1) - traj.states.col(k);
    phi.gradient(tm, xm, g);
    spec.hat_drift(tm, xm, uh);
    spec.diffusion(tm, xm, dmat);
    Mat dinv = checked_inverse(dmat);
    acc.add((g + 2.0 * (dinv * uh)).dot(dx));
  }
  return acc.value();
}

double excess_W(const Trajectory& traj, const PhiFamily& phi) {
  KahanSum acc;
  int N = traj.steps();
  for (int k = 0; k < N; ++k) {
    double tm = traj.time(k) + 0.5 * traj.step;
    Vec xm = 0.5 * (traj.states.col(k) + traj.states.col(k + 1));
    acc.add(traj.step * phi.time_derivative(tm, xm));
  }
  return acc.value();
}

Trajectory reverse_path(const Trajectory& traj, const Involution& inv) {
  Trajectory out;
  out.step = traj.step;
  out.t0 = traj.t0;
  out.seed = traj.seed;
  out.index = traj.index;
  out.escaped = traj.escaped;
  int N = traj.steps();
  out.states.resize(traj.states.rows(), N + 1);
  Vec tmp(traj.states.rows());
  for (int k = 0; k <= N; ++k) {
    inv.apply(traj.states.col(N - k), tmp);
    out.states.col(k) = tmp;
  }
  return out;
}

}  // namespace fluctrel
