#include "vclab/network.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vclab/util.hpp"

namespace vclab {

namespace {

inline double logistic(double steepness, double center, double x) {
  return 1.0 / (1.0 + std::exp(-steepness * (x - center)));
}

}  // namespace

double h1_eval(const InteractionSpec& h1, double v, double w) {
  if (const auto* c = std::get_if<ConstantH1>(&h1)) return c->value;
  const auto& pl = std::get<ProductLogisticH1>(h1);
  return pl.offset + pl.kappa * logistic(pl.steepness, pl.center, v) *
                         logistic(pl.steepness, pl.center, w);
}

double h1_sup(const InteractionSpec& h1) {
  if (const auto* c = std::get_if<ConstantH1>(&h1)) return c->value;
  const auto& pl = std::get<ProductLogisticH1>(h1);
  return pl.offset + pl.kappa;
}

double h1_dw_sup(const InteractionSpec& h1) {
  if (std::holds_alternative<ConstantH1>(h1)) return 0.0;
  const auto& pl = std::get<ProductLogisticH1>(h1);
  return pl.kappa * std::abs(pl.steepness) / 4.0;
}

std::vector<std::string> validate(const MeanFieldSpec& spec,
                                  const ModelParams& p) {
  ModelParams q = p;
  q.conductance = spec.h0;
  auto errs = validate(q);
  if (const auto* c = std::get_if<ConstantH1>(&spec.h1)) {
    if (!(std::isfinite(c->value) && c->value >= 0))
      errs.push_back("constant interaction must be >= 0");
  } else {
    const auto& pl = std::get<ProductLogisticH1>(spec.h1);
    if (!(std::isfinite(pl.offset) && pl.offset >= 0))
      errs.push_back("interaction offset must be >= 0");
    if (!(std::isfinite(pl.kappa) && pl.kappa >= 0))
      errs.push_back("interaction kappa must be >= 0");
    if (!std::isfinite(pl.steepness) || !std::isfinite(pl.center))
      errs.push_back("interaction steepness and center must be finite");
  }
  return errs;
}

void require_valid(const MeanFieldSpec& spec, const ModelParams& p) {
  const auto errs = validate(spec, p);
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid network spec:";
  for (const auto& e : errs) os << "\n  - " << e;
  throw std::invalid_argument(os.str());
}

Eigen::VectorXd interaction_targets(const MeanFieldSpec& spec,
                                    const Eigen::VectorXd& v,
                                    bool include_self) {
  const Eigen::Index n = v.size();
  if (!include_self && n < 2)
    throw std::invalid_argument("network interaction needs at least 2 neurons");
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out[i] = eval_conductance(spec.h0, v[i]);
  if (const auto* c = std::get_if<ConstantH1>(&spec.h1)) {
    out.array() += c->value;
    return out;
  }
  const auto& pl = std::get<ProductLogisticH1>(spec.h1);
  Eigen::VectorXd sig(n);
  for (Eigen::Index i = 0; i < n; ++i)
    sig[i] = logistic(pl.steepness, pl.center, v[i]);
  const double total = sig.sum();
  if (include_self) {
    out.array() += pl.offset + pl.kappa * sig.array() * (total / n);
  } else {
    out.array() +=
        pl.offset + pl.kappa * sig.array() * (total - sig.array()) / (n - 1);
  }
  return out;
}

EtaResult eta(double cross_sum, const ModelParams& p, const DistanceSpec& d) {
  if (!(cross_sum >= 0))
    throw std::invalid_argument("cross-derivative bound must be >= 0");
  EtaResult out{};
  if (cross_sum == 0) {
    out.value = 0;
    out.log_value = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.log_value = std::log(d.M * p.gamma * cross_sum) + d.k * d.r_star * d.r_star;
  out.value = std::exp(out.log_value);
  return out;
}

EtaResult eta(const MeanFieldSpec& spec, const ModelParams& p,
              const DistanceSpec& d) {
  return eta(h1_dw_sup(spec.h1), p, d);
}

NetworkState draw_network_init(const InitSampler& init, int n, uint64_t seed,
                               uint32_t stream, uint32_t slot_base) {
  NetworkState s;
  s.v.resize(n);
  s.g.resize(n);
  for (int i = 0; i < n; ++i) {
    const State z = draw_init(init, seed, stream, slot_base + static_cast<uint32_t>(i));
    s.v[i] = z.v;
    s.g[i] = z.g;
  }
  return s;
}

namespace {

void require_network_state(const ModelParams& p, const NetworkState& s) {
  if (s.v.size() != s.g.size())
    throw std::invalid_argument("network state sizes differ");
  for (Eigen::Index i = 0; i < s.v.size(); ++i)
    require_in_domain(p, State{s.v[i], s.g[i]});
}

// symmetrized update of every neuron given precomputed targets
inline void advance(const ModelParams& p, NetworkState& s,
                    const Eigen::VectorXd& targets, double dt,
                    const Eigen::VectorXd& noise) {
  const Eigen::Index n = s.v.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v =
        s.v[i] + (p.g_l * (p.v_l - s.v[i]) + s.g[i] * (p.v_e - s.v[i])) * dt;
    s.v[i] = std::clamp(v, p.v_l, p.v_e);
    s.g[i] = std::abs(s.g[i] + p.gamma * (targets[i] - s.g[i]) * dt + noise[i]);
  }
}

}  // namespace

NetworkTrajectory network_simulate(const MeanFieldSpec& spec,
                                   const ModelParams& p, const NetworkState& s0,
                                   const SimConfig& cfg, uint32_t stream,
                                   const std::vector<uint32_t>* slots) {
  require_valid(spec, p);
  require_valid(cfg);
  require_network_state(p, s0);
  const int n = static_cast<int>(s0.v.size());
  if (n < 2) throw std::invalid_argument("network needs at least 2 neurons");
  if (slots && static_cast<int>(slots->size()) != n)
    throw std::invalid_argument("slot map size must match the network");
  const int64_t n_steps = std::llround(cfg.t_end / cfg.dt);
  const double sdt = std::sqrt(2.0 * cfg.dt) * p.a;
  NetworkTrajectory out;
  NetworkState s = s0;
  out.times.push_back(0.0);
  out.states.push_back(s);
  Eigen::VectorXd noise(n);
  for (int64_t k = 0; k < n_steps; ++k) {
    const auto targets = interaction_targets(spec, s.v, false);
    for (int i = 0; i < n; ++i) {
      const uint32_t slot = slots ? (*slots)[static_cast<size_t>(i)]
                                  : static_cast<uint32_t>(i);
      noise[i] = sdt * rng::gauss_at(cfg.master_seed, stream, k, slot);
    }
    advance(p, s, targets, cfg.dt, noise);
    if ((k + 1) % cfg.snapshot_stride == 0 || k + 1 == n_steps) {
      out.times.push_back(static_cast<double>(k + 1) * cfg.dt);
      out.states.push_back(s);
    }
  }
  return out;
}

NetworkCoupledResult network_coupled_simulate(
    const MeanFieldSpec& spec, const ModelParams& p, const NetworkState& s0,
    const NetworkState& s0p, const SimConfig& cfg, const CouplingKind& kind,
    const DistanceSpec& dist, uint32_t stream) {
  require_valid(spec, p);
  require_valid(cfg);
  require_valid(kind);
  require_network_state(p, s0);
  require_network_state(p, s0p);
  if (s0.v.size() != s0p.v.size())
    throw std::invalid_argument("coupled networks must have equal size");
  const int n = static_cast<int>(s0.v.size());
  if (n < 2) throw std::invalid_argument("network needs at least 2 neurons");
  const int64_t n_steps = std::llround(cfg.t_end / cfg.dt);
  const double sdt = std::sqrt(2.0 * cfg.dt) * p.a;

  NetworkCoupledResult out;
  NetworkState s = s0, sp = s0p;
  auto record = [&](double t) {
    double sum_rho = 0, sum_l1 = 0;
    for (int i = 0; i < n; ++i) {
      sum_rho += rho_distance(dist, State{s.v[i], s.g[i]},
                              State{sp.v[i], sp.g[i]});
      sum_l1 += std::abs(s.v[i] - sp.v[i]) + std::abs(s.g[i] - sp.g[i]);
    }
    out.sum_rho.times.push_back(t);
    out.sum_rho.values.push_back(sum_rho);
    out.sum_l1.times.push_back(t);
    out.sum_l1.values.push_back(sum_l1);
  };
  record(0.0);
  Eigen::VectorXd noise(n), noisep(n);
  for (int64_t k = 0; k < n_steps; ++k) {
    const auto targets = interaction_targets(spec, s.v, false);
    const auto targetsp = interaction_targets(spec, sp.v, false);
    for (int i = 0; i < n; ++i) {
      const auto z =
          rng::gauss_pair(cfg.master_seed, stream, k, static_cast<uint32_t>(i));
      const double beta = beta_profile(kind, std::abs(s.g[i] - sp.g[i]));
      const double alpha = std::sqrt(std::max(0.0, 1.0 - beta * beta));
      noise[i] = sdt * (alpha * z.z0 + beta * z.z1);
      noisep[i] = sdt * (alpha * z.z0 - beta * z.z1);
    }
    advance(p, s, targets, cfg.dt, noise);
    advance(p, sp, targetsp, cfg.dt, noisep);
    if ((k + 1) % cfg.snapshot_stride == 0 || k + 1 == n_steps)
      record(static_cast<double>(k + 1) * cfg.dt);
  }
  out.final_z = s;
  out.final_zp = sp;
  return out;
}

CloudTrajectory mckean_simulate(const MeanFieldSpec& spec, const ModelParams& p,
                                int n_particles, const InitSampler& f0,
                                const SimConfig& cfg, uint32_t stream) {
  require_valid(spec, p);
  require_valid(cfg);
  if (n_particles < 1)
    throw std::invalid_argument("particle count must be positive");
  const int64_t n_steps = std::llround(cfg.t_end / cfg.dt);
  const double sdt = std::sqrt(2.0 * cfg.dt) * p.a;
  NetworkState s = draw_network_init(f0, n_particles, cfg.master_seed, stream);
  require_network_state(p, s);
  CloudTrajectory out;
  auto snap = [&](double t) {
    PointCloud c(n_particles, 2);
    c.col(0) = s.v;
    c.col(1) = s.g;
    out.times.push_back(t);
    out.clouds.push_back(std::move(c));
  };
  snap(0.0);
  Eigen::VectorXd noise(n_particles);
  for (int64_t k = 0; k < n_steps; ++k) {
    const auto targets = interaction_targets(spec, s.v, true);
    for (int i = 0; i < n_particles; ++i)
      noise[i] = sdt * rng::gauss_at(cfg.master_seed, stream, k,
                                     static_cast<uint32_t>(i));
    advance(p, s, targets, cfg.dt, noise);
    if ((k + 1) % cfg.snapshot_stride == 0 || k + 1 == n_steps)
      snap(static_cast<double>(k + 1) * cfg.dt);
  }
  return out;
}

namespace {

// surrogate targets: H0(v'_i) + mean_m H1(v'_i, aux_m)
Eigen::VectorXd surrogate_targets(const MeanFieldSpec& spec,
                                  const Eigen::VectorXd& v,
                                  const Eigen::VectorXd& aux_v) {
  Eigen::VectorXd out(v.size());
  if (const auto* c = std::get_if<ConstantH1>(&spec.h1)) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      out[i] = eval_conductance(spec.h0, v[i]) + c->value;
    return out;
  }
  const auto& pl = std::get<ProductLogisticH1>(spec.h1);
  double mean_sig = 0;
  for (Eigen::Index m = 0; m < aux_v.size(); ++m)
    mean_sig += logistic(pl.steepness, pl.center, aux_v[m]);
  mean_sig /= static_cast<double>(aux_v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out[i] = eval_conductance(spec.h0, v[i]) + pl.offset +
             pl.kappa * logistic(pl.steepness, pl.center, v[i]) * mean_sig;
  return out;
}

}  // namespace

ChaosPoint chaos_error(const MeanFieldSpec& spec, const ModelParams& p, int n,
                       const InitSampler& f0, const SimConfig& cfg, int reps) {
  require_valid(spec, p);
  require_valid(cfg);
  if (n < 2) throw std::invalid_argument("network needs at least 2 neurons");
  if (reps < 2) throw std::invalid_argument("chaos error needs reps >= 2");
  const int m_aux = std::max(1024, 8 * n);
  const int64_t n_steps = std::llround(cfg.t_end / cfg.dt);
  const double sdt = std::sqrt(2.0 * cfg.dt) * p.a;

  std::vector<double> persq(static_cast<size_t>(reps), 0.0);
  parallel_for(reps, [&](int64_t lo, int64_t hi) {
    Eigen::VectorXd noise(n), aux_noise(m_aux);
    for (int64_t r = lo; r < hi; ++r) {
      const auto stream = static_cast<uint32_t>(r);
      NetworkState net = draw_network_init(f0, n, cfg.master_seed, stream);
      require_network_state(p, net);
      NetworkState sur = net;  // same initial conditions
      NetworkState aux = draw_network_init(f0, m_aux, cfg.master_seed, stream,
                                           static_cast<uint32_t>(n));
      for (int64_t k = 0; k < n_steps; ++k) {
        const auto t_net = interaction_targets(spec, net.v, false);
        const auto t_sur = surrogate_targets(spec, sur.v, aux.v);
        const auto t_aux = interaction_targets(spec, aux.v, true);
        for (int i = 0; i < n; ++i)
          noise[i] = sdt * rng::gauss_at(cfg.master_seed, stream, k,
                                         static_cast<uint32_t>(i));
        for (int m = 0; m < m_aux; ++m)
          aux_noise[m] = sdt * rng::gauss_at(cfg.master_seed, stream, k,
                                             static_cast<uint32_t>(n + m));
        advance(p, net, t_net, cfg.dt, noise);
        advance(p, sur, t_sur, cfg.dt, noise);  // shared Brownian motions
        advance(p, aux, t_aux, cfg.dt, aux_noise);
      }
      double s = 0;
      for (int i = 0; i < n; ++i) {
        const double dv = net.v[i] - sur.v[i], dg = net.g[i] - sur.g[i];
        s += dv * dv + dg * dg;
      }
      persq[static_cast<size_t>(r)] = s / n;
    }
  });
  double mean = 0;
  for (double v : persq) mean += v;
  mean /= reps;
  double var = 0;
  for (double v : persq) var += (v - mean) * (v - mean);
  var = reps > 1 ? var / (reps - 1) : 0.0;
  ChaosPoint out{};
  out.error = std::sqrt(mean);
  const double se_mean = std::sqrt(var / reps);
  out.std_error = mean > 0 ? se_mean / (2 * out.error) : 0.0;
  return out;
}

ChaosStudy chaos_study(const MeanFieldSpec& spec, const ModelParams& p,
                       const std::vector<int>& n_values, const InitSampler& f0,
                       const SimConfig& cfg, int reps) {
  if (n_values.size() < 2)
    throw std::invalid_argument("chaos study needs at least two sizes");
  ChaosStudy out;
  out.n_values = n_values;
  for (int n : n_values) {
    SimConfig run = cfg;
    // decorrelate the Monte Carlo across sizes
    run.master_seed = cfg.master_seed + 0x9e3779b97f4a7c15ull *
                                            static_cast<uint64_t>(n);
    const auto pt = chaos_error(spec, p, n, f0, run, reps);
    out.errors.push_back(pt.error);
    out.std_errors.push_back(pt.std_error);
  }
  // least squares of log error on log N
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const int n = static_cast<int>(n_values.size());
  for (int i = 0; i < n; ++i) {
    const double x = std::log(static_cast<double>(n_values[i]));
    const double y = std::log(out.errors[static_cast<size_t>(i)]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double det = n * sxx - sx * sx;
  out.slope = (n * sxy - sx * sy) / det;
  const double vy = syy - sy * sy / n;
  out.r2 = vy > 0 ? out.slope * (sxy - sx * sy / n) / vy : 1.0;
  return out;
}

}  // namespace vclab
