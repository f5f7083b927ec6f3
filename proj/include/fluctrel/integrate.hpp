#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fluctrel/process.hpp"
#include "fluctrel/rng.hpp"

namespace fluctrel {

// Uniform-grid sample path.  states has N+1 columns; noise_record (optional)
// stores the raw standard normals per step so that increments can be
// reconstructed exactly.
struct Trajectory {
  double step = 0.0;
  double t0 = 0.0;
  Mat states;               // dim x (N+1)
  Mat noise_record;         // normals_per_step x N (empty if not stored)
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  bool escaped = false;     // hit the blowup guard
  int escape_step = -1;

  int steps() const { return static_cast<int>(states.cols()) - 1; }
  double time(int k) const { return t0 + step * k; }
  Vec state(int k) const { return states.col(k); }
};

struct IntegrateOptions {
  bool record_noise = true;
  double t0 = 0.0;
  double horizon = -1.0;    // <0: use spec.horizon
};

int normals_per_step(const ProcessSpec& spec);

// Euler-Maruyama on the Ito-corrected drift; weak order 1, bitwise
// reproducible given (seed, index, h).
Trajectory sample_path(const ProcessSpec& spec, const Vec& x0, double h,
                       RngStream stream, const IntegrateOptions& opt = {});

// Reconstruct the noise increment L(x_k) sqrt(h) xi_k the integrator added
// at step k (requires a noise record).
Vec noise_increment(const ProcessSpec& spec, const Trajectory& traj, int k);

// Deterministic parallel map: fn(i) for i in [0, n); any scheduling, same
// results.  workers <= 1 runs inline.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

// Convenience: per-trajectory reduction over an ensemble.  Produces values
// in index order regardless of worker count.
std::vector<double> ensemble_map(
    std::size_t n, int workers,
    const std::function<double(std::size_t)>& per_trajectory);

}  // namespace fluctrel
