#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "vclab/integrator.hpp"
#include "vclab/metric.hpp"
#include "vclab/model.hpp"

// Couplings of two copies of the dynamics driven by a shared pair of noise
// sources: the conductances receive sqrt(2) a (alpha dB +- beta dB') with
// alpha^2 + beta^2 = 1 and beta chosen from the conductance gap. Voltages are
// noiseless, so they always move synchronously.

namespace vclab {

enum class CouplingVariant { synchronous, mirror, independent };

struct CouplingKind {
  CouplingVariant variant = CouplingVariant::mirror;
  double xi = 1e-3;  // gap scale; reflection weight saturates at gap >= xi
};

std::vector<std::string> validate(const CouplingKind& kind);
void require_valid(const CouplingKind& kind);

// reflection weight as a function of the conductance gap s = |g - g'|:
// 0 below xi/2, the quintic ramp to the plateau on [xi/2, xi], plateau beyond
// (1 for mirror, 1/sqrt(2) for independent, 0 for synchronous)
double beta_profile(const CouplingKind& kind, double gap);

struct PairState {
  State z, zp;
};

struct PairTrajectory {
  std::vector<double> times;
  std::vector<PairState> states;
};

// one coupled update; zb and zbp are independent standard normals (dB, dB')
PairState coupled_step(const ModelParams& p, const PairState& s, double dt,
                       double zb, double zbp, const CouplingKind& kind);

// distance recorded along coupled runs
struct PairMonitor {
  enum class Kind { weighted_sq, rho } kind = Kind::weighted_sq;
  double weight = 1.0;                 // A in |v-v'|^2 + A |g-g'|^2
  std::optional<DistanceSpec> dist;    // required for rho
};
double monitor_value(const PairMonitor& mon, const PairState& s);

struct CoupledRun {
  PairTrajectory trajectory;
  MetricSeries series;
};
CoupledRun coupled_simulate(const ModelParams& p, const PairState& s0,
                            const SimConfig& cfg, const CouplingKind& kind,
                            const PairMonitor& mon, uint32_t stream = 0);

// pair initial conditions
struct PairPointInit {
  PairState s;
};
struct PairUniformInit {
  UniformInit z, zp;  // the two legs draw independently
};
using PairSampler = std::variant<PairPointInit, PairUniformInit>;
PairState draw_pair_init(const PairSampler& init, uint64_t seed,
                         uint32_t stream);

struct CoupledEnsemble {
  MetricSeries mean_series;  // ensemble mean of the monitor at snapshots
  PointCloud final_z, final_zp;
};
CoupledEnsemble coupled_ensemble(const ModelParams& p, const PairSampler& init,
                                 const SimConfig& cfg, const CouplingKind& kind,
                                 const PairMonitor& mon, int n_pairs);

// weighted-norm contraction constants under the sync condition
struct SyncRate {
  double weight_a;     // A in the contracted norm |x|^2 + A |y|^2
  double lambda_star;  // largest lambda with x.Q.x >= lambda ||x||_A^2
  double neg_q;        // -Q(A): positive iff the weighted form contracts
};
SyncRate sync_rate_theoretical(const ModelParams& p);

struct FitResult {
  double rate;  // decay rate of value ~ exp(-rate * t)
  double r_squared;
  int n_used;
};
// least squares on log(value) over [t_lo, t_hi]; nonpositive values are
// dropped, fewer than two usable points is an argument error
FitResult fit_decay_rate(const MetricSeries& s, double t_lo, double t_hi);

}  // namespace vclab
