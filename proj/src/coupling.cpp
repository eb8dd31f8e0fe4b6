#include "vclab/coupling.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vclab/util.hpp"

namespace vclab {

std::vector<std::string> validate(const CouplingKind& kind) {
  std::vector<std::string> errs;
  if (kind.variant != CouplingVariant::synchronous &&
      !(std::isfinite(kind.xi) && kind.xi > 0 && kind.xi <= 1))
    errs.push_back("coupling xi must lie in (0, 1]");
  return errs;
}

void require_valid(const CouplingKind& kind) {
  const auto errs = validate(kind);
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid coupling:";
  for (const auto& e : errs) os << "\n  - " << e;
  throw std::invalid_argument(os.str());
}

double beta_profile(const CouplingKind& kind, double gap) {
  if (!(gap >= 0)) throw std::domain_error("conductance gap must be >= 0");
  if (kind.variant == CouplingVariant::synchronous) return 0.0;
  const double plateau =
      kind.variant == CouplingVariant::mirror ? 1.0 : 1.0 / std::sqrt(2.0);
  const double lo = kind.xi / 2, hi = kind.xi;
  if (gap <= lo) return 0.0;
  if (gap >= hi) return plateau;
  return plateau * smoothstep5((gap - lo) / (hi - lo));
}

PairState coupled_step(const ModelParams& p, const PairState& s, double dt,
                       double zb, double zbp, const CouplingKind& kind) {
  const double beta = beta_profile(kind, std::abs(s.z.g - s.zp.g));
  const double alpha = std::sqrt(std::max(0.0, 1.0 - beta * beta));
  const double sdt = std::sqrt(2.0 * dt) * p.a;
  const double nz = alpha * zb + beta * zbp;
  const double nzp = alpha * zb - beta * zbp;
  State z{std::clamp(s.z.v + (p.g_l * (p.v_l - s.z.v) + s.z.g * (p.v_e - s.z.v)) * dt,
                     p.v_l, p.v_e),
          std::abs(s.z.g +
                   p.gamma * (eval_conductance(p.conductance, s.z.v) - s.z.g) * dt +
                   sdt * nz)};
  State zp{std::clamp(
               s.zp.v + (p.g_l * (p.v_l - s.zp.v) + s.zp.g * (p.v_e - s.zp.v)) * dt,
               p.v_l, p.v_e),
           std::abs(s.zp.g +
                    p.gamma * (eval_conductance(p.conductance, s.zp.v) - s.zp.g) * dt +
                    sdt * nzp)};
  return PairState{z, zp};
}

double monitor_value(const PairMonitor& mon, const PairState& s) {
  if (mon.kind == PairMonitor::Kind::weighted_sq) {
    const double x = s.z.v - s.zp.v, y = s.z.g - s.zp.g;
    return x * x + mon.weight * y * y;
  }
  if (!mon.dist)
    throw std::invalid_argument("rho monitor needs a distance spec");
  return rho_distance(*mon.dist, s.z, s.zp);
}

CoupledRun coupled_simulate(const ModelParams& p, const PairState& s0,
                            const SimConfig& cfg, const CouplingKind& kind,
                            const PairMonitor& mon, uint32_t stream) {
  require_valid(p);
  require_valid(cfg);
  require_valid(kind);
  require_in_domain(p, s0.z);
  require_in_domain(p, s0.zp);
  const int64_t n = std::llround(cfg.t_end / cfg.dt);
  CoupledRun out;
  auto push = [&](double t, const PairState& s) {
    out.trajectory.times.push_back(t);
    out.trajectory.states.push_back(s);
    out.series.times.push_back(t);
    out.series.values.push_back(monitor_value(mon, s));
  };
  PairState s = s0;
  push(0.0, s);
  for (int64_t i = 0; i < n; ++i) {
    const auto z = rng::gauss_pair(cfg.master_seed, stream, i, 0);
    s = coupled_step(p, s, cfg.dt, z.z0, z.z1, kind);
    if ((i + 1) % cfg.snapshot_stride == 0 || i + 1 == n)
      push(static_cast<double>(i + 1) * cfg.dt, s);
  }
  return out;
}

PairState draw_pair_init(const PairSampler& init, uint64_t seed,
                         uint32_t stream) {
  if (const auto* pm = std::get_if<PairPointInit>(&init)) return pm->s;
  const auto& u = std::get<PairUniformInit>(init);
  return PairState{draw_init(InitSampler{u.z}, seed, stream, 0),
                   draw_init(InitSampler{u.zp}, seed, stream, 1)};
}

CoupledEnsemble coupled_ensemble(const ModelParams& p, const PairSampler& init,
                                 const SimConfig& cfg, const CouplingKind& kind,
                                 const PairMonitor& mon, int n_pairs) {
  require_valid(p);
  require_valid(cfg);
  require_valid(kind);
  if (n_pairs < 1) throw std::invalid_argument("n_pairs must be positive");
  const int64_t n_steps = std::llround(cfg.t_end / cfg.dt);
  std::vector<double> times;
  times.push_back(0.0);
  for (int64_t i = 0; i < n_steps; ++i)
    if ((i + 1) % cfg.snapshot_stride == 0 || i + 1 == n_steps)
      times.push_back(static_cast<double>(i + 1) * cfg.dt);

  CoupledEnsemble out;
  out.final_z.resize(n_pairs, 2);
  out.final_zp.resize(n_pairs, 2);
  // fixed-size blocks keep the reduction order independent of the worker
  // count, so the mean series is bit-identical for any thread cap
  const int64_t block = 32;
  const int64_t n_blocks = (n_pairs + block - 1) / block;
  std::vector<std::vector<double>> block_sums(
      static_cast<size_t>(n_blocks), std::vector<double>(times.size(), 0.0));
  parallel_for(n_blocks, [&](int64_t blo, int64_t bhi) {
    for (int64_t bi = blo; bi < bhi; ++bi) {
      auto& local = block_sums[static_cast<size_t>(bi)];
      const int64_t end = std::min<int64_t>((bi + 1) * block, n_pairs);
      for (int64_t i = bi * block; i < end; ++i) {
        const auto stream = static_cast<uint32_t>(i);
        PairState s = draw_pair_init(init, cfg.master_seed, stream);
        require_in_domain(p, s.z);
        require_in_domain(p, s.zp);
        size_t snap = 0;
        local[snap++] += monitor_value(mon, s);
        for (int64_t k = 0; k < n_steps; ++k) {
          const auto z = rng::gauss_pair(cfg.master_seed, stream, k, 0);
          s = coupled_step(p, s, cfg.dt, z.z0, z.z1, kind);
          if ((k + 1) % cfg.snapshot_stride == 0 || k + 1 == n_steps)
            local[snap++] += monitor_value(mon, s);
        }
        out.final_z(i, 0) = s.z.v;
        out.final_z(i, 1) = s.z.g;
        out.final_zp(i, 0) = s.zp.v;
        out.final_zp(i, 1) = s.zp.g;
      }
    }
  });
  out.mean_series.times = times;
  out.mean_series.values.assign(times.size(), 0.0);
  for (const auto& local : block_sums)
    for (size_t j = 0; j < times.size(); ++j)
      out.mean_series.values[j] += local[j];
  for (double& v : out.mean_series.values) v /= n_pairs;
  return out;
}

SyncRate sync_rate_theoretical(const ModelParams& p) {
  require_valid(p);
  const auto cond = check_sync_condition(p);
  if (!cond.holds)
    throw std::invalid_argument(
        "weighted-norm rate requires (v_e - v_l) * sup|G'| < g_l");
  const double dv = p.v_e - p.v_l;
  const double lip = p.g_lip();
  SyncRate out{};
  if (lip > 0)
    out.weight_a = (2 * p.g_l / lip - dv) / (p.gamma * lip);
  else
    out.weight_a = dv * dv / (2 * p.gamma * p.g_l);
  const double A = out.weight_a;
  const double c = dv + A * p.gamma * lip;
  out.neg_q = -(c * c - 4 * A * p.gamma * p.g_l);
  Eigen::Matrix2d Q;
  Q << p.g_l, -c / 2, -c / 2, A * p.gamma;
  Eigen::Matrix2d W = Eigen::Vector2d(1.0, A).asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(Q, W);
  out.lambda_star = es.eigenvalues().minCoeff();
  return out;
}

FitResult fit_decay_rate(const MetricSeries& s, double t_lo, double t_hi) {
  if (s.times.size() != s.values.size())
    throw std::invalid_argument("metric series lengths differ");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (size_t i = 0; i < s.times.size(); ++i) {
    const double t = s.times[i], v = s.values[i];
    if (t < t_lo || t > t_hi || !(v > 0)) continue;
    const double y = std::log(v);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    syy += y * y;
    ++n;
  }
  if (n < 2)
    throw std::invalid_argument(
        "fit window holds fewer than two positive samples");
  const double det = n * sxx - sx * sx;
  if (det <= 0)
    throw std::invalid_argument("fit window has no time spread");
  const double slope = (n * sxy - sx * sy) / det;
  FitResult out{};
  out.rate = -slope;
  out.n_used = n;
  const double vy = syy - sy * sy / n;
  const double explained = slope * (sxy - sx * sy / n);
  out.r_squared = vy > 0 ? explained / vy : 1.0;
  return out;
}

}  // namespace vclab
