#pragma once

#include <Eigen/Core>
#include <string>
#include <variant>
#include <vector>

// Voltage-conductance model: a neuron state z = (v, g) on [v_l, v_e] x [0, inf)
// with leak pull toward v_l, synaptic pull toward v_e, and a conductance that
// relaxes toward a voltage-dependent target G(v).

namespace vclab {

struct ConstantG {
  double value;
};

// base + amplitude / (1 + exp(-steepness * (v - center)))
struct LogisticG {
  double base, amplitude, steepness, center;
};

// max(floor, slope * v + intercept)
struct AffineClampedG {
  double slope, intercept, floor;
};

using ConductanceSpec = std::variant<ConstantG, LogisticG, AffineClampedG>;

double eval_conductance(const ConductanceSpec& spec, double v);
double conductance_lipschitz(const ConductanceSpec& spec);  // sup |G'|
// exact sup of G over [v_lo, v_hi] (every family is monotone in v)
double conductance_sup(const ConductanceSpec& spec, double v_lo, double v_hi);

struct State {
  double v, g;
};

struct ModelParams {
  double v_l, v_e;  // voltage window, v_l < v_e
  double g_l;       // leak conductance, > 0
  double gamma;     // conductance relaxation rate, > 0
  double a;         // noise intensity, >= 0
  ConductanceSpec conductance;

  double conductance_at(double v) const;  // domain-checked G(v)
  double g_sup() const { return conductance_sup(conductance, v_l, v_e); }
  double g_lip() const { return conductance_lipschitz(conductance); }
};

// every problem found, empty when valid
std::vector<std::string> validate(const ModelParams& p);
void require_valid(const ModelParams& p);  // invalid_argument with full list

bool state_in_domain(const ModelParams& p, const State& s);
void require_in_domain(const ModelParams& p, const State& s);  // domain_error

// (dv/dt, dg/dt) at s; raises domain_error outside [v_l, v_e] x [0, inf)
Eigen::Vector2d drift(const ModelParams& p, const State& s);

// voltage the v-equation relaxes to at frozen conductance g
inline double nullcline_voltage(const ModelParams& p, double g) {
  return (p.g_l * p.v_l + g * p.v_e) / (p.g_l + g);
}

// (v_e - v_l) * sup|G'| < g_l ; margin = g_l - (v_e - v_l) * sup|G'|
struct SyncCondition {
  bool holds;
  double margin;
};
SyncCondition check_sync_condition(const ModelParams& p);

// local uniqueness inequality at conductance level g:
// G'(V(g)) * (v_e - V(g)) < g_l + g
bool check_uniqueness_condition(const ModelParams& p, double g);

}  // namespace vclab
