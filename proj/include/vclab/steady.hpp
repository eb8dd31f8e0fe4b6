#pragma once

#include <vector>

#include "vclab/cloud.hpp"
#include "vclab/integrator.hpp"
#include "vclab/model.hpp"

// Equilibria of the noiseless flow and invariant-measure diagnostics.

namespace vclab {

struct FixedPointInfo {
  double v_star, g_star;
  double residual;     // |g* - G(V(g*))|
  bool uniqueness;     // per-root inequality G'(V)(v_e - V) < g_l + g
};

// all roots of g = G(V(g)) on [0, sup G]: sign-change scan on a 1e4 grid,
// bisection to 1e-12
std::vector<FixedPointInfo> fixed_points(const ModelParams& p);

// stationary moments of dg = gamma (c - g) dt + sqrt(2) a dB reflected at 0:
// the zero-flux density is the Gaussian N(c, a^2/gamma) truncated to [0, inf)
struct OuMoments {
  double mean, variance;
};
OuMoments reflected_ou_moments(double c, double gamma, double a);

double default_burn_in(const ModelParams& p);  // 20 / min(gamma, g_l)

// n end states after burn_in from uniform draws over [v_l,v_e] x [0, sup G]
PointCloud sample_invariant(const ModelParams& p, const SimConfig& cfg, int n,
                            double burn_in);

// stationary second-moment bound lhs <= (A/lambda_star) a^2 around the unique
// fixed point, with lhs estimated by Monte Carlo
struct NoiseBoundReport {
  double weight_a, lambda_star;
  double lhs, lhs_std_error, rhs;
  bool holds;  // lhs <= rhs + 3 SE
};
NoiseBoundReport noise_bound_check(const ModelParams& p, SimConfig cfg, int n,
                                   double burn_in);

}  // namespace vclab
