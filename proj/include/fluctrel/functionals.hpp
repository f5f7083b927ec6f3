#pragma once

#include "fluctrel/integrate.hpp"
#include "fluctrel/reversal.hpp"

namespace fluctrel {

enum class WVariant { generic, tot, ex, hk };

struct PathFunctionals {
  double W = 0.0;
  double J_integral = 0.0;
  double delta_phi = 0.0;
  double Q = std::numeric_limits<double>::quiet_NaN();
  double work = std::numeric_limits<double>::quiet_NaN();
  double delta_U = std::numeric_limits<double>::quiet_NaN();
  double first_law_residual = std::numeric_limits<double>::quiet_NaN();
  WVariant variant = WVariant::generic;
  InversionKind scheme = InversionKind::natural;
  bool valid = true;  // false for escaped trajectories
};

struct HeatWork {
  double Q = 0.0;
  double work = 0.0;
  double delta_U = 0.0;
  double residual = 0.0;  // Delta U + Q - work
};

// Entropy-production density integral int_0^T J_t dt for the scheme's
// splitting: midpoint (Stratonovich) discretization of
//   2 u^_+ . d^-1 dx - [2 u^_+ . d^-1 u_- + div u_-] dt,
// with the algebraically reduced forms for the Langevin canonical and the
// current/complete reversal schemes.  `first`/`last` select a step range
// (additivity); defaults cover the whole path.
double entropy_flux_integral(const Trajectory& traj, const ProcessSpec& spec,
                             const InversionScheme& scheme, int first = 0,
                             int last = -1);

// W = Delta phi + int J dt.  phi0 / phiT default to the scheme's phi family
// at the endpoint times; supply explicit boundary functions otherwise.
PathFunctionals functional_W(const Trajectory& traj, const ProcessSpec& spec,
                             const InversionScheme& scheme,
                             SpaceFieldFn phi0 = nullptr,
                             SpaceFieldFn phiT = nullptr);

// Langevin heat/work/internal-energy decomposition.  The zeta term is
// reconstructed from the stored noise increments.
HeatWork heat_work_langevin(const Trajectory& traj, const ProcessSpec& spec);

// Housekeeping functional W^hk = int [grad phi + 2 d^-1 u^] . dx
// (Stratonovich midpoints).
double housekeeping_W(const Trajectory& traj, const ProcessSpec& spec,
                      const PhiFamily& phi);

// Excess functional W^ex = int dt phi_t dt along the path.
double excess_W(const Trajectory& traj, const PhiFamily& phi);

// Time-reversed path: x'_k = (x_{N-k})^* on the same grid.
Trajectory reverse_path(const Trajectory& traj, const Involution& inv);

}  // namespace fluctrel
