#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <variant>
#include <vector>

#include "vclab/coupling.hpp"
#include "vclab/integrator.hpp"
#include "vclab/metric.hpp"
#include "vclab/model.hpp"

// Mean-field network: neuron i relaxes its conductance toward
//   G_i(v) = H0(v^i) + mean over j != i of H1(v^i, v^j)
// and the McKean-Vlasov particle approximation uses the self-inclusive mean.

namespace vclab {

struct ConstantH1 {
  double value;
};

// offset + kappa * sigma(v) * sigma(w), sigma the logistic bump
struct ProductLogisticH1 {
  double offset, kappa, steepness, center;
};

using InteractionSpec = std::variant<ConstantH1, ProductLogisticH1>;

double h1_eval(const InteractionSpec& h1, double v, double w);
double h1_sup(const InteractionSpec& h1);     // sup H1 >= 0
double h1_dw_sup(const InteractionSpec& h1);  // sup |d H1 / d w|

struct MeanFieldSpec {
  ConductanceSpec h0;
  InteractionSpec h1;
};

std::vector<std::string> validate(const MeanFieldSpec& spec,
                                  const ModelParams& p);
void require_valid(const MeanFieldSpec& spec, const ModelParams& p);

// conductance targets G_i(v); include_self switches between the network
// normalization 1/(N-1) over j != i and the particle mean 1/N over all j
Eigen::VectorXd interaction_targets(const MeanFieldSpec& spec,
                                    const Eigen::VectorXd& v,
                                    bool include_self);

// perturbation rate of the network contraction argument:
//   eta = M * gamma * e^{k r_star^2} * sup_i sum_{j != i} ||d G_i / d v^j||
// (the mean-field sum collapses to ||d H1 / d w||, independent of N)
struct EtaResult {
  double value;      // may overflow to +inf for analytically tuned constants
  double log_value;  // always finite unless the cross bound is zero
};
EtaResult eta(double cross_sum, const ModelParams& p, const DistanceSpec& d);
EtaResult eta(const MeanFieldSpec& spec, const ModelParams& p,
              const DistanceSpec& d);

struct NetworkState {
  Eigen::VectorXd v, g;
};

struct NetworkTrajectory {
  std::vector<double> times;
  std::vector<NetworkState> states;
};

NetworkState draw_network_init(const InitSampler& init, int n, uint64_t seed,
                               uint32_t stream, uint32_t slot_base = 0);

// noise for neuron i comes from counter slot slots[i] (identity by default),
// so permuting neurons together with their slots permutes the output exactly
NetworkTrajectory network_simulate(const MeanFieldSpec& spec,
                                   const ModelParams& p,
                                   const NetworkState& s0, const SimConfig& cfg,
                                   uint32_t stream = 0,
                                   const std::vector<uint32_t>* slots = nullptr);

struct NetworkCoupledResult {
  MetricSeries sum_rho;  // sum_i rho-distance of pair i
  MetricSeries sum_l1;   // sum_i |dv_i| + |dg_i|
  NetworkState final_z, final_zp;
};

// two networks advanced under per-neuron couplings driven by shared blocks
NetworkCoupledResult network_coupled_simulate(
    const MeanFieldSpec& spec, const ModelParams& p, const NetworkState& s0,
    const NetworkState& s0p, const SimConfig& cfg, const CouplingKind& kind,
    const DistanceSpec& dist, uint32_t stream = 0);

// McKean-Vlasov particle system (self-inclusive mean), snapshot clouds
CloudTrajectory mckean_simulate(const MeanFieldSpec& spec, const ModelParams& p,
                                int n_particles, const InitSampler& f0,
                                const SimConfig& cfg, uint32_t stream = 0);

// pathwise gap between the N-network and N nonlinear surrogates sharing its
// Brownian motions; the surrogate convolution is estimated from an auxiliary
// independent particle ensemble of size max(1024, 8N) refreshed every step
struct ChaosPoint {
  double error;      // sqrt( (1/N) E sum_i |z^i - z'^i|^2 ) at t_end
  double std_error;  // delta-method SE over the Monte Carlo reps
};
ChaosPoint chaos_error(const MeanFieldSpec& spec, const ModelParams& p, int n,
                       const InitSampler& f0, const SimConfig& cfg, int reps);

struct ChaosStudy {
  std::vector<int> n_values;
  std::vector<double> errors, std_errors;
  double slope, r2;  // fit of log error against log N
};
ChaosStudy chaos_study(const MeanFieldSpec& spec, const ModelParams& p,
                       const std::vector<int>& n_values, const InitSampler& f0,
                       const SimConfig& cfg, int reps);

}  // namespace vclab
