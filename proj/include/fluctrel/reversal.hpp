#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fluctrel/process.hpp"

namespace fluctrel {

enum class InversionKind {
  natural,            // u+ = 0, u- = u
  hat_plus_zero,      // u^+ = 0, u- = u^
  canonical,          // Langevin: u+ = -Gamma grad H, u- = Pi grad H + G
  reversed_protocol,  // u+ = u, u- = 0
  current_reversal,   // u^+ = -(1/2) d grad phi_t with L_t^dag e^-phi_t = 0
  complete_reversal,  // same splitting, phi_t evolving under the dynamics
};

enum class NoiseSign { vector, pseudo_vector };

InversionKind parse_inversion(const std::string& name);
std::string to_string(InversionKind kind);

struct InversionScheme {
  InversionKind kind = InversionKind::natural;
  Involution involution;                 // default identity
  std::optional<PhiFamily> phi;          // required by current/complete reversal
  NoiseSign noise_sign = NoiseSign::vector;  // recorded; distributions agree
};

// Scheme for a catalog process: picks the conventional involution and
// attaches the process's phi family where the scheme needs one.
InversionScheme scheme_for(const ProcessSpec& spec, InversionKind kind);
InversionScheme scheme_for(const ProcessSpec& spec, const std::string& kind);

// Copy of `spec` with drift_plus / drift_minus replaced by the splitting the
// scheme dictates (divergences and hat-corrections rewired accordingly).
ProcessSpec resplit(const ProcessSpec& spec, const InversionScheme& scheme);

struct BackwardProcess {
  ProcessSpec spec;          // the primed process (already scheme-split)
  InversionScheme scheme;    // primed scheme (same kind, primed phi family)
  double log_sigma_const = 0.0;  // ln sigma for linear involutions
};

// Scheme preconditions (phi residuals, Langevin matrix conditions); throws
// SchemePreconditionFailed / InvolutionIncompatible.
void check_scheme_preconditions(const ProcessSpec& spec, const InversionScheme& scheme,
                                const std::vector<Vec>& probes);

BackwardProcess build_backward(const ProcessSpec& spec, const InversionScheme& scheme);

struct ResidualReport {
  double max_residual = 0.0;
  bool pass = false;
  std::string detail;
};

// Default probe set: quasi-random points in [-box, box]^dim (positive
// quadrant shifted for matrix-cocycle states).
std::vector<Vec> default_probes(const ProcessSpec& spec, int count = 256,
                                double box = 2.0);

// Backward of the backward reproduces the forward process (drifts and
// covariance compared on probes; pass below 1e-8 relative).
ResidualReport check_involutive(const ProcessSpec& spec, const InversionScheme& scheme,
                                const std::vector<Vec>& probes = {});

// Lemma-style split-generator relation L'_{t,+-} = +- R L_{t*,+-} R on probe
// functions; finite-difference dominated, pass below 1e-5.
ResidualReport check_split_generator(const ProcessSpec& spec,
                                     const InversionScheme& scheme,
                                     const std::vector<ScalarProbe>& probe_fns,
                                     const std::vector<Vec>& probes = {});

// Forward and backward processes coincide (time-reversibility).
ResidualReport check_time_reversible(const ProcessSpec& spec,
                                     const InversionScheme& scheme,
                                     const std::vector<Vec>& probes = {});

// Current-reversal current identity j'(x) = -(dx*/dx)(x*) j(x*) sigma(x).
ResidualReport check_current_reversal_identity(const ProcessSpec& spec,
                                               const InversionScheme& scheme,
                                               const std::vector<Vec>& probes = {});

}  // namespace fluctrel
