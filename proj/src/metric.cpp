#include "vclab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vclab {

namespace {

constexpr double kSqrtPi = 1.7724538509055160272981674833411;

void check_spec(const DistanceSpec& d) {
  auto fail = [](const char* m) {
    throw std::invalid_argument(std::string("distance spec: ") + m);
  };
  if (!(d.xi > 0 && d.xi <= 1)) fail("xi must lie in (0, 1]");
  if (!(std::isfinite(d.m) && d.m > 0)) fail("m must be positive and finite");
  if (!(std::isfinite(d.M) && d.M > d.m)) {
    throw DeterministicRegimeError(
        "distance spec: M <= m, the weighted-norm contraction applies and the "
        "modified distance is not needed");
  }
  if (!(d.m <= 8.0 / 3.0))
    fail("m must be <= 8/3 so the lower envelope theta2 >= m r - xi holds");
  if (!(std::isfinite(d.r_star) && d.r_star >= 2 + d.xi))
    fail("r_star must be >= 2 + xi");
  if (!(std::isfinite(d.k) && d.k > 0)) fail("k must be positive and finite");
}

}  // namespace

DistanceSpec build_distance_spec(const ModelParams& p, double xi) {
  return build_distance_spec(p, xi, DistanceOverrides{});
}

DistanceSpec build_distance_spec(const ModelParams& p, double xi,
                                 const DistanceOverrides& o) {
  require_valid(p);
  if (!(p.a > 0))
    throw std::invalid_argument(
        "distance spec requires positive noise intensity a");
  if (!(xi > 0 && xi <= 1))
    throw std::invalid_argument("distance spec: xi must lie in (0, 1]");

  const double lip = p.g_lip();
  const bool full_override = o.m && o.M && o.r_star && o.k;
  if (lip == 0 && !full_override)
    throw DeterministicRegimeError(
        "conductance target has no slope: the weighted-norm contraction "
        "applies and the modified distance is not needed");

  DistanceSpec d{};
  d.xi = xi;
  const double dv = p.v_e - p.v_l;
  if (lip > 0) {
    d.m = p.g_l / (2 * p.gamma * lip);
    d.M = 4 * dv / p.gamma;
    d.r_star = std::max(2 * lip * dv, 2 + xi);
    const double mm = d.m;
    d.k = 1.0 / (8 * p.a * p.a * mm * mm) *
          (1 + (dv + 4 * p.a * p.a * (d.M - mm)) / mm + mm * p.gamma * lip);
  }
  if (o.m) d.m = *o.m;
  if (o.M) d.M = *o.M;
  if (o.r_star) d.r_star = *o.r_star;
  if (o.k) d.k = *o.k;
  check_spec(d);
  d.ramp_end = d.r_star >= 2.5 ? d.r_star : d.r_star + 1.0;

  const double pref =
      std::min({1.0, p.g_l / (2 + 2 * d.M), p.gamma / 8,
                p.gamma * d.M * d.r_star / (8 * dv)});
  d.log_lambda_guaranteed = std::log(pref) - d.k * d.r_star * d.r_star;
  d.lambda_guaranteed = std::exp(d.log_lambda_guaranteed);
  return d;
}

double theta1_prime(const DistanceSpec& d, double r) {
  const double q = d.xi / 4, e = d.xi;
  if (r <= q) return 0.0;
  if (r >= e) return 1.0;
  return smoothstep3((r - q) / (e - q));
}

double theta1(const DistanceSpec& d, double r) {
  if (!(r >= 0)) throw std::domain_error("theta1 argument must be >= 0");
  const double q = d.xi / 4, e = d.xi, w = e - q;
  if (r <= q) return 0.0;
  if (r >= e) return 0.5 * w + (r - e);
  return w * smoothstep3_integral((r - q) / w);
}

double theta2_prime(const DistanceSpec& d, double r) {
  const double q0 = d.xi / 4, q1 = d.xi / 2;
  if (r <= q0) return 0.0;
  if (r < q1) return d.m * smoothstep3((r - q0) / (q1 - q0));
  if (r <= 1.0) return d.m;
  if (r >= d.ramp_end) return d.M;
  return d.m + (d.M - d.m) * smoothstep3((r - 1.0) / (d.ramp_end - 1.0));
}

double theta2(const DistanceSpec& d, double r) {
  if (!(r >= 0)) throw std::domain_error("theta2 argument must be >= 0");
  const double q0 = d.xi / 4, q1 = d.xi / 2, w1 = q1 - q0;
  if (r <= q0) return 0.0;
  if (r < q1) return d.m * w1 * smoothstep3_integral((r - q0) / w1);
  const double at_q1 = d.m * w1 * 0.5;
  if (r <= 1.0) return at_q1 + d.m * (r - q1);
  const double at_1 = at_q1 + d.m * (1.0 - q1);
  const double w2 = d.ramp_end - 1.0;
  if (r < d.ramp_end)
    return at_1 + d.m * (r - 1.0) +
           (d.M - d.m) * w2 * smoothstep3_integral((r - 1.0) / w2);
  const double at_end = at_1 + d.m * w2 + (d.M - d.m) * w2 * 0.5;
  return at_end + d.M * (r - d.ramp_end);
}

double rho_prime(const DistanceSpec& d, double r) {
  const double s = std::min(r, d.r_star);
  return std::exp(-d.k * s * s);
}

double rho(const DistanceSpec& d, double r) {
  if (!(r >= 0)) throw std::domain_error("rho argument must be >= 0");
  // closed form of the Gaussian integral; the tail beyond r_star is linear
  // with the (possibly underflowing) frozen weight
  const double sk = std::sqrt(d.k);
  const double core = 0.5 * kSqrtPi / sk * std::erf(sk * std::min(r, d.r_star));
  if (r <= d.r_star) return core;
  return core + rho_prime(d, d.r_star) * (r - d.r_star);
}

double rho_distance(const DistanceSpec& d, const State& z, const State& zp) {
  return rho(d, theta1(d, std::abs(z.v - zp.v)) +
                    theta2(d, std::abs(z.g - zp.g)));
}

}  // namespace vclab
