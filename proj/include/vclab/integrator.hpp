#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "vclab/cloud.hpp"
#include "vclab/model.hpp"
#include "vclab/rng.hpp"

// Euler scheme for the reflected dynamics: the voltage is clamped back into
// [v_l, v_e] after each update and the conductance is reflected through zero
// by taking the absolute value (symmetrized scheme).

namespace vclab {

struct SimConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  int snapshot_stride = 1;
  uint64_t master_seed = 0;
};

std::vector<std::string> validate(const SimConfig& cfg);
void require_valid(const SimConfig& cfg);
// recommended-stability advisories (dt*gamma, dt*(g_l + sup G)), never fatal
std::vector<std::string> stability_warnings(const ModelParams& p,
                                            const SimConfig& cfg);

namespace detail {
// one unchecked update from an in-domain state; z is a standard normal
inline State step_raw(const ModelParams& p, const State& s, double dt,
                      double z) {
  const double v =
      s.v + (p.g_l * (p.v_l - s.v) + s.g * (p.v_e - s.v)) * dt;
  const double g = s.g + p.gamma * (eval_conductance(p.conductance, s.v) - s.g) * dt +
                   std::sqrt(2.0 * dt) * p.a * z;
  return State{std::clamp(v, p.v_l, p.v_e), std::abs(g)};
}
}  // namespace detail

// checked single step; raises domain_error off-domain, runtime_error on
// non-finite inputs
State step(const ModelParams& p, const State& s, double dt, double z);

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
};

Trajectory simulate(const ModelParams& p, const State& s0,
                    const SimConfig& cfg, uint32_t stream = 0);

// initial-condition samplers
struct PointInit {
  State s;
};
struct UniformInit {
  double v_lo, v_hi, g_lo, g_hi;
};
using InitSampler = std::variant<PointInit, UniformInit>;

State draw_init(const InitSampler& init, uint64_t seed, uint32_t stream,
                uint32_t slot = 0);

// n independent replicas; returns the cloud of end states (rows are replicas)
PointCloud ensemble(const ModelParams& p, const InitSampler& init,
                    const SimConfig& cfg, int n);

// snapshot clouds every snapshot_stride steps (first and last included)
CloudTrajectory ensemble_snapshots(const ModelParams& p,
                                   const InitSampler& init,
                                   const SimConfig& cfg, int n);

}  // namespace vclab
