#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fluctrel/functionals.hpp"
#include "fluctrel/oracles.hpp"
#include "fluctrel/stats.hpp"

namespace fluctrel {

struct RunContext {
  std::uint64_t seed = 12345;
  int workers = 1;
};

struct EnsembleEstimate {
  std::string name;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  Histogram histogram;
  std::uint64_t seed = 0;
  double ksigma = 3.0;
  bool pass = false;
  double target = 0.0;
  double trimmed_mean = std::numeric_limits<double>::quiet_NaN();
  double escape_fraction = 0.0;
  std::string detail;
};

// Ensemble of path functionals with initial points drawn from the
// scheme/process phi family at t = 0.
struct FunctionalEnsemble {
  std::vector<PathFunctionals> paths;
  std::vector<double> W;             // valid paths only, index-aligned order
  double escape_fraction = 0.0;
};

FunctionalEnsemble sample_functionals(const ProcessSpec& spec,
                                      const InversionScheme& scheme,
                                      std::size_t n, double h, const RunContext& ctx,
                                      SpaceFieldFn phi0 = nullptr,
                                      SpaceFieldFn phiT = nullptr);

struct JarzynskiReport {
  EnsembleEstimate exp_w;      // <e^-W> vs 1
  MeanSE w_mean;               // Jensen / 2nd-law side
  bool second_law_ok = false;
  bool pass = false;
  std::vector<double> W;       // samples (for downstream output)
};

JarzynskiReport jarzynski_check(const ProcessSpec& spec, const InversionScheme& scheme,
                                std::size_t n, double h, const RunContext& ctx,
                                SpaceFieldFn phi0 = nullptr, SpaceFieldFn phiT = nullptr,
                                double ksigma = 3.0);

struct CrooksReport {
  Histogram forward;           // W
  Histogram backward;          // -W'
  LinearFit fit;               // log p(W) - log p'(-W) ~ slope W + intercept
  int qualifying_bins = 0;
  bool pass = false;
  std::vector<double> W_forward, W_backward;
};

CrooksReport crooks_check(const ProcessSpec& spec, const InversionScheme& scheme,
                          std::size_t n, double h, int bins, const RunContext& ctx);

struct SpeckSeifertReport {
  EnsembleEstimate exp_whk;                    // <e^-W^hk> vs 1
  struct FunctionalPair {
    std::string name;
    double weighted_mean, weighted_se;          // <F e^-W^hk>
    double aux_mean, aux_se;                    // <F>'' on the auxiliary process
    bool pass;
  };
  std::vector<FunctionalPair> functionals;
  double whk_tot_ex_gap = 0.0;                 // max |W^hk - (W^tot - W^ex)|
  bool pass = false;
};

using TrajectoryFunctional = std::function<double(const Trajectory&)>;

SpeckSeifertReport speck_seifert_check(
    const ProcessSpec& spec, const PhiFamily& phi, std::size_t n, double h,
    const RunContext& ctx,
    const std::vector<std::pair<std::string, TrajectoryFunctional>>& test_functionals);

// Auxiliary Speck-Seifert process with u^'' = -u^ - d grad phi.
ProcessSpec auxiliary_process(const ProcessSpec& spec, const PhiFamily& phi);

enum class KernelRoute { binned, linear_analytic, lognormal_analytic };

struct DetailedBalanceReport {
  double max_z = 0.0;          // binned route
  double max_abs = 0.0;        // analytic routes
  int cells = 0;
  bool pass = false;
  std::string route;
};

struct DetailedBalanceOptions {
  KernelRoute route = KernelRoute::binned;
  std::size_t n = 1000000;
  int bins = 12;
  double h = 1e-3;
  double zmax = 4.0;
};

DetailedBalanceReport detailed_balance_check(const ProcessSpec& spec,
                                             const InversionScheme& scheme,
                                             double t, const RunContext& ctx,
                                             const DetailedBalanceOptions& opt = {});

struct DetailedFRReport {
  double max_z = 0.0;
  int cells_tested = 0;
  bool degenerate_w = false;   // complete reversal: all W at 0
  bool pass = false;
};

DetailedFRReport detailed_fr_check(const ProcessSpec& spec, const InversionScheme& scheme,
                                   std::size_t n, double h, int space_bins, int w_bins,
                                   const RunContext& ctx);

}  // namespace fluctrel
