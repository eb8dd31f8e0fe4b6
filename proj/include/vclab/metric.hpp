#pragma once

#include <optional>
#include <stdexcept>

#include "vclab/model.hpp"

// Modified distance rho(theta1(|v - v'|) + theta2(|g - g'|)) used to measure
// contraction of the mirror coupling when the plain weighted norm does not
// contract. theta1 ramps 0 -> slope 1, theta2 ramps 0 -> m -> M, and rho
// flattens a Gaussian weight exp(-k r^2) that freezes beyond r_star.

namespace vclab {

// raised when the weighted-norm analysis applies and the modified distance
// is unnecessary (no conductance slope, or M <= m)
struct DeterministicRegimeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DistanceSpec {
  double m, M, r_star, k;
  double xi;
  double ramp_end;  // end of the m -> M ramp: r_star, or r_star + 1 when
                    // r_star < 2.5 keeps the curvature bound intact
  double lambda_guaranteed;      // guaranteed contraction rate, often underflows
  double log_lambda_guaranteed;  // always finite
};

struct DistanceOverrides {
  std::optional<double> m, M, r_star, k;
};

DistanceSpec build_distance_spec(const ModelParams& p, double xi);
DistanceSpec build_distance_spec(const ModelParams& p, double xi,
                                 const DistanceOverrides& o);

double theta1(const DistanceSpec& d, double r);
double theta2(const DistanceSpec& d, double r);
double theta1_prime(const DistanceSpec& d, double r);
double theta2_prime(const DistanceSpec& d, double r);
double rho(const DistanceSpec& d, double r);
double rho_prime(const DistanceSpec& d, double r);
double rho_distance(const DistanceSpec& d, const State& z, const State& zp);

// C2 cubic ramp helpers shared with the coupling weights
inline double smoothstep3(double t) { return t * t * (3.0 - 2.0 * t); }
inline double smoothstep3_integral(double t) {  // int_0^t smoothstep3
  return t * t * t - 0.5 * t * t * t * t;
}
inline double smoothstep5(double t) {  // quintic, C2 at both ends
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

}  // namespace vclab
