#include "vclab/steady.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vclab/coupling.hpp"

namespace vclab {

namespace {

double root_gap(const ModelParams& p, double g) {
  return g - eval_conductance(p.conductance, nullcline_voltage(p, g));
}

}  // namespace

std::vector<FixedPointInfo> fixed_points(const ModelParams& p) {
  require_valid(p);
  const double g_hi = p.g_sup();
  const int grid = 10000;
  std::vector<double> roots;
  double prev_g = 0.0, prev_f = root_gap(p, 0.0);
  if (prev_f == 0.0) roots.push_back(0.0);
  for (int i = 1; i <= grid; ++i) {
    const double g = g_hi * i / grid;
    const double f = root_gap(p, g);
    if (f == 0.0) {
      roots.push_back(g);
    } else if (prev_f * f < 0) {
      double lo = prev_g, hi = g;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (root_gap(p, lo) * root_gap(p, mid) <= 0)
          hi = mid;
        else
          lo = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_g = g;
    prev_f = f;
  }
  // collapse near-duplicates from exact grid hits
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double x, double y) { return y - x < 1e-9; }),
              roots.end());
  std::vector<FixedPointInfo> out;
  for (double g : roots) {
    FixedPointInfo fp{};
    fp.g_star = g;
    fp.v_star = nullcline_voltage(p, g);
    fp.residual = std::abs(root_gap(p, g));
    fp.uniqueness = check_uniqueness_condition(p, g);
    out.push_back(fp);
  }
  return out;
}

OuMoments reflected_ou_moments(double c, double gamma, double a) {
  if (!(c >= 0)) throw std::invalid_argument("target c must be >= 0");
  if (!(gamma > 0) || !(a > 0))
    throw std::invalid_argument("gamma and a must be positive");
  const double sigma = a / std::sqrt(gamma);
  const double alpha = -c / sigma;
  // hazard of the standard normal at alpha, stable for alpha <= 0
  const double phi =
      std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * M_PI);
  const double tail = 0.5 * std::erfc(alpha / std::sqrt(2.0));
  const double h = phi / tail;
  OuMoments out{};
  out.mean = c + sigma * h;
  out.variance = sigma * sigma * (1.0 + alpha * h - h * h);
  return out;
}

double default_burn_in(const ModelParams& p) {
  return 20.0 / std::min(p.gamma, p.g_l);
}

PointCloud sample_invariant(const ModelParams& p, const SimConfig& cfg, int n,
                            double burn_in) {
  require_valid(p);
  if (!(p.a > 0))
    throw std::invalid_argument("invariant sampling requires a > 0");
  if (!(burn_in > 0)) throw std::invalid_argument("burn_in must be positive");
  SimConfig run = cfg;
  run.t_end = burn_in;
  const UniformInit init{p.v_l, p.v_e, 0.0, p.g_sup()};
  return ensemble(p, InitSampler{init}, run, n);
}

NoiseBoundReport noise_bound_check(const ModelParams& p, SimConfig cfg, int n,
                                   double burn_in) {
  const auto rate = sync_rate_theoretical(p);  // checks the sync condition
  const auto fps = fixed_points(p);
  if (fps.size() != 1)
    throw std::invalid_argument(
        "noise bound check expects a unique fixed point");
  const auto cloud = sample_invariant(p, cfg, n, burn_in);
  const double vs = fps[0].v_star, gs = fps[0].g_star, A = rate.weight_a;
  double sum = 0, sumsq = 0;
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    const double x = cloud(i, 0) - vs, y = cloud(i, 1) - gs;
    const double val = x * x + A * y * y;
    sum += val;
    sumsq += val * val;
  }
  NoiseBoundReport out{};
  out.weight_a = A;
  out.lambda_star = rate.lambda_star;
  out.lhs = sum / n;
  const double var = std::max(0.0, sumsq / n - out.lhs * out.lhs);
  out.lhs_std_error = std::sqrt(var / n);
  out.rhs = A / rate.lambda_star * p.a * p.a;
  out.holds = out.lhs <= out.rhs + 3 * out.lhs_std_error;
  return out;
}

}  // namespace vclab
