#pragma once

#include <string>
#include <vector>

#include "fluctrel/process.hpp"
#include "fluctrel/stats.hpp"

namespace fluctrel {

struct RateFunctionEstimate {
  std::vector<double> grid;       // w (or sigma) values
  std::vector<double> zeta;       // min-subtracted estimate; inf where unset
  std::vector<double> band;       // bootstrap half-widths; inf where unset
  std::vector<double> horizons;
  std::string method;             // "histogram" or "legendre"
  double min_location = 0.0;
  bool degenerate = false;        // point mass (zero-variance samples)
  bool nonconvex_cgf = false;     // warning flag (legendre route)

  bool usable(std::size_t i) const {
    return std::isfinite(zeta[i]) && std::isfinite(band[i]);
  }
  // Linear interpolation over usable points; NaN outside.
  double value_at(double w, double* band_out = nullptr) const;
};

struct RateFunctionPair {
  RateFunctionEstimate histogram;
  RateFunctionEstimate legendre;
};

// samples_per_T[i]: W values at horizons[i] (>= 2 horizons, >= 1e4 samples
// each).  The grid defaults to 41 points spanning mean +- 4 std of W/T_max.
RateFunctionPair estimate_rate_function(
    const std::vector<std::vector<double>>& samples_per_T,
    const std::vector<double>& horizons, std::vector<double> grid = {},
    int bootstrap_replicates = 48, std::uint64_t seed = 7771);

struct SymmetryReport {
  double max_excess = 0.0;   // max over window of |residual| - combined band
  double max_residual = 0.0;
  int window_points = 0;
  bool pass = false;
};

// Gallavotti-Cohen-type symmetry zeta(w) = zeta'(-w) - w.
SymmetryReport gc_symmetry_check(const RateFunctionEstimate& forward,
                                 const RateFunctionEstimate& backward,
                                 double slack = 0.05);

struct MultiplicativeRateReport {
  std::vector<RateFunctionEstimate> per_component;  // marginal Z per exponent
  Vec lyapunov;                                     // argmin locations, sorted desc
  SymmetryReport symmetry;                          // d = 1 (or trivial)
  bool sum_constraint_checked = false;              // incompressible sector
  double max_sum_violation = 0.0;
};

// Stretching-rate rate functions and the modified Gallavotti-Cohen symmetry
// Z(sigma) - sum sigma = Z'(-sigma~).  spectra_per_T[i] holds rho vectors at
// horizons[i]; backward defaults to the forward ensembles (time-reversible).
MultiplicativeRateReport multiplicative_rate_check(
    const std::vector<std::vector<Vec>>& spectra_per_T,
    const std::vector<double>& horizons,
    const std::vector<std::vector<Vec>>* backward = nullptr,
    std::uint64_t seed = 7772);

}  // namespace fluctrel
