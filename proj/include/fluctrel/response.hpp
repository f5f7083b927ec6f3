#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fluctrel/oracles.hpp"
#include "fluctrel/relations.hpp"

namespace fluctrel {

// A flux observable J^a = beta grad H . G^a - div G^a attached to a force
// field G^a, or a plain observable O^a for FDT-style checks.
struct ForceField {
  std::string name;
  DriftFn field;            // G^a(t is ignored; stationary checks)
  ScalarFieldFn divergence; // div G^a
};

struct Observable {
  std::string name;
  SpaceFieldFn value;
  std::function<void(const Vec&, Vec&)> gradient;
};

struct ResponseExperiment {
  double epsilon = 0.05;
  double burn_in = 5.0;
  double run_time = 40.0;
  double h = 1e-3;
  std::size_t n_paths = 512;
  std::vector<double> lag_grid = {0.1, 0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0};
};

struct GreenKuboReport {
  double response_side = 0.0, response_se = 0.0;   // d<J^a>/dg_b at g=0
  double correlation_side = 0.0, correlation_se = 0.0;
  double window = 0.0;                             // autocorrelation window used
  double window_extended_change = 0.0;             // effect of +50% window
  double equilibrium_flux_mean = 0.0, equilibrium_flux_se = 0.0;
  double epsilon_half_shift = 0.0;                 // linearity diagnostic
  bool pass = false;
};

GreenKuboReport green_kubo_check(const ProcessSpec& spec, const ForceField& Ga,
                                 const ForceField& Gb, const ResponseExperiment& exp,
                                 const RunContext& ctx);

struct OnsagerReport {
  double t_ab = 0.0, t_ab_se = 0.0;
  double t_ba = 0.0, t_ba_se = 0.0;
  bool skipped = false;            // hypotheses not met (irreversible dynamics)
  std::string warning;
  bool pass = false;
};

OnsagerReport onsager_check(const ProcessSpec& spec, const ForceField& Ga,
                            const ForceField& Gb, const ResponseExperiment& exp,
                            const RunContext& ctx);

struct FdtReport {
  std::vector<double> lags;
  std::vector<double> minus_dC;     // -d/dt <O^a_t O^b_0>
  std::vector<double> minus_dC_se;
  std::vector<double> response;     // beta^-1 <O^a_t R^b_0>
  std::vector<double> response_se;
  std::vector<double> correction;   // deformed-FDT flux term (zero for FDT)
  std::vector<double> correction_se;
  bool pass = false;
};

FdtReport fdt_check(const ProcessSpec& spec, const Observable& Oa,
                    const Observable& Ob, const ResponseExperiment& exp,
                    const RunContext& ctx);

// Deformed FDT on the 1-d flux model.  `use_plain_O` replaces the deformed
// observable A by O itself (the Remark-3 variant).
FdtReport deformed_fdt_check(const FluxDensity& flux, const Observable& Ob,
                             const ResponseExperiment& exp, const RunContext& ctx,
                             bool use_plain_O = false);

// Compactly supported bump observable on (center-width, center+width).
Observable bump_observable(double center, double width, const std::string& name = "bump");

}  // namespace fluctrel
