#include "vclab/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vclab {

namespace {

struct Eval {
  double v;
  double operator()(const ConstantG& g) const { return g.value; }
  double operator()(const LogisticG& g) const {
    return g.base + g.amplitude / (1.0 + std::exp(-g.steepness * (v - g.center)));
  }
  double operator()(const AffineClampedG& g) const {
    return std::max(g.floor, g.slope * v + g.intercept);
  }
};

}  // namespace

double eval_conductance(const ConductanceSpec& spec, double v) {
  return std::visit(Eval{v}, spec);
}

double conductance_lipschitz(const ConductanceSpec& spec) {
  struct {
    double operator()(const ConstantG&) const { return 0.0; }
    double operator()(const LogisticG& g) const {
      return std::abs(g.amplitude) * std::abs(g.steepness) / 4.0;
    }
    double operator()(const AffineClampedG& g) const { return std::abs(g.slope); }
  } lip;
  return std::visit(lip, spec);
}

double conductance_sup(const ConductanceSpec& spec, double v_lo, double v_hi) {
  return std::max(eval_conductance(spec, v_lo), eval_conductance(spec, v_hi));
}

double ModelParams::conductance_at(double v) const {
  if (!(v >= v_l && v <= v_e))
    throw std::domain_error("conductance evaluated outside [v_l, v_e]");
  return eval_conductance(conductance, v);
}

std::vector<std::string> validate(const ModelParams& p) {
  std::vector<std::string> errs;
  auto bad = [&](const std::string& m) { errs.push_back(m); };
  if (!(std::isfinite(p.v_l) && std::isfinite(p.v_e)))
    bad("v_l and v_e must be finite");
  else if (!(p.v_l < p.v_e))
    bad("v_l must be strictly less than v_e");
  if (!(std::isfinite(p.g_l) && p.g_l > 0)) bad("g_l must be positive");
  if (!(std::isfinite(p.gamma) && p.gamma > 0)) bad("gamma must be positive");
  if (!(std::isfinite(p.a) && p.a >= 0)) bad("a must be nonnegative");
  if (const auto* lg = std::get_if<LogisticG>(&p.conductance)) {
    if (!(std::isfinite(lg->base) && std::isfinite(lg->amplitude) &&
          std::isfinite(lg->steepness) && std::isfinite(lg->center)))
      bad("logistic conductance parameters must be finite");
  }
  if (p.v_l < p.v_e && std::isfinite(p.v_l) && std::isfinite(p.v_e)) {
    // all families are monotone in v, so endpoint positivity is sharp
    const double lo =
        std::min(eval_conductance(p.conductance, p.v_l),
                 eval_conductance(p.conductance, p.v_e));
    if (!(std::isfinite(lo) && lo > 0))
      bad("conductance target must be positive on [v_l, v_e]");
  }
  return errs;
}

void require_valid(const ModelParams& p) {
  const auto errs = validate(p);
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid model parameters:";
  for (const auto& e : errs) os << "\n  - " << e;
  throw std::invalid_argument(os.str());
}

bool state_in_domain(const ModelParams& p, const State& s) {
  return s.v >= p.v_l && s.v <= p.v_e && s.g >= 0 && std::isfinite(s.v) &&
         std::isfinite(s.g);
}

void require_in_domain(const ModelParams& p, const State& s) {
  if (!state_in_domain(p, s))
    throw std::domain_error("state outside [v_l, v_e] x [0, inf)");
}

Eigen::Vector2d drift(const ModelParams& p, const State& s) {
  require_in_domain(p, s);
  const double dv = p.g_l * (p.v_l - s.v) + s.g * (p.v_e - s.v);
  const double dg = p.gamma * (eval_conductance(p.conductance, s.v) - s.g);
  return {dv, dg};
}

SyncCondition check_sync_condition(const ModelParams& p) {
  const double margin = p.g_l - (p.v_e - p.v_l) * p.g_lip();
  return SyncCondition{margin > 0, margin};
}

namespace {

double conductance_slope(const ConductanceSpec& spec, double v) {
  struct {
    double v;
    double operator()(const ConstantG&) const { return 0.0; }
    double operator()(const LogisticG& g) const {
      const double s = 1.0 / (1.0 + std::exp(-g.steepness * (v - g.center)));
      return g.amplitude * g.steepness * s * (1.0 - s);
    }
    double operator()(const AffineClampedG& g) const {
      return g.slope * v + g.intercept >= g.floor ? g.slope : 0.0;
    }
  } d{v};
  return std::visit(d, spec);
}

}  // namespace

bool check_uniqueness_condition(const ModelParams& p, double g) {
  if (!(g >= 0)) throw std::domain_error("conductance level must be nonnegative");
  const double v = nullcline_voltage(p, g);
  return conductance_slope(p.conductance, v) * (p.v_e - v) < p.g_l + g;
}

}  // namespace vclab
