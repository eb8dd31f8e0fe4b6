#include "vclab/integrator.hpp"

#include <atomic>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vclab/util.hpp"

namespace vclab {

namespace {
std::atomic<int> g_thread_cap{0};
}

void set_thread_cap(int n) { g_thread_cap.store(n); }

int thread_cap() {
  const int cap = g_thread_cap.load();
  if (cap > 0) return cap;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body) {
  const int workers =
      static_cast<int>(std::min<int64_t>(thread_cap(), std::max<int64_t>(n, 1)));
  if (workers <= 1 || n < 2) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  const int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int64_t lo = w * chunk;
    const int64_t hi = std::min<int64_t>(lo + chunk, n);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

std::vector<std::string> validate(const SimConfig& cfg) {
  std::vector<std::string> errs;
  if (!(std::isfinite(cfg.dt) && cfg.dt > 0)) errs.push_back("dt must be positive");
  if (!(std::isfinite(cfg.t_end) && cfg.t_end >= cfg.dt))
    errs.push_back("t_end must be at least dt");
  if (cfg.snapshot_stride < 1) errs.push_back("snapshot_stride must be >= 1");
  return errs;
}

void require_valid(const SimConfig& cfg) {
  const auto errs = validate(cfg);
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid simulation config:";
  for (const auto& e : errs) os << "\n  - " << e;
  throw std::invalid_argument(os.str());
}

std::vector<std::string> stability_warnings(const ModelParams& p,
                                            const SimConfig& cfg) {
  std::vector<std::string> w;
  if (cfg.dt * p.gamma >= 1)
    w.push_back("dt * gamma >= 1: conductance relaxation is under-resolved");
  if (cfg.dt * (p.g_l + p.g_sup()) >= 1)
    w.push_back("dt * (g_l + sup G) >= 1: voltage relaxation is under-resolved");
  return w;
}

State step(const ModelParams& p, const State& s, double dt, double z) {
  if (!(std::isfinite(dt) && dt > 0) || !std::isfinite(z) ||
      !std::isfinite(s.v) || !std::isfinite(s.g))
    throw std::runtime_error("non-finite input to step");
  require_in_domain(p, s);
  return detail::step_raw(p, s, dt, z);
}

namespace {

int64_t step_count(const SimConfig& cfg) {
  return std::llround(cfg.t_end / cfg.dt);
}

State run_path(const ModelParams& p, State s, const SimConfig& cfg,
               uint32_t stream, int64_t n_steps) {
  for (int64_t i = 0; i < n_steps; ++i)
    s = detail::step_raw(p, s, cfg.dt,
                         rng::gauss_at(cfg.master_seed, stream, i, 0));
  return s;
}

}  // namespace

Trajectory simulate(const ModelParams& p, const State& s0, const SimConfig& cfg,
                    uint32_t stream) {
  require_valid(p);
  require_valid(cfg);
  require_in_domain(p, s0);
  const int64_t n = step_count(cfg);
  Trajectory out;
  out.times.reserve(static_cast<size_t>(n / cfg.snapshot_stride + 2));
  out.states.reserve(out.times.capacity());
  State s = s0;
  out.times.push_back(0.0);
  out.states.push_back(s);
  for (int64_t i = 0; i < n; ++i) {
    s = detail::step_raw(p, s, cfg.dt,
                         rng::gauss_at(cfg.master_seed, stream, i, 0));
    if ((i + 1) % cfg.snapshot_stride == 0 || i + 1 == n) {
      out.times.push_back(static_cast<double>(i + 1) * cfg.dt);
      out.states.push_back(s);
    }
  }
  return out;
}

State draw_init(const InitSampler& init, uint64_t seed, uint32_t stream,
                uint32_t slot) {
  if (const auto* pm = std::get_if<PointInit>(&init)) return pm->s;
  const auto& u = std::get<UniformInit>(init);
  const auto r = rng::uniform_pair(seed, stream, rng::init_step, slot);
  return State{u.v_lo + (u.v_hi - u.v_lo) * r.u0,
               u.g_lo + (u.g_hi - u.g_lo) * r.u1};
}

PointCloud ensemble(const ModelParams& p, const InitSampler& init,
                    const SimConfig& cfg, int n) {
  require_valid(p);
  require_valid(cfg);
  if (n < 1) throw std::invalid_argument("ensemble size must be positive");
  const int64_t n_steps = step_count(cfg);
  PointCloud cloud(n, 2);
  parallel_for(n, [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) {
      const auto stream = static_cast<uint32_t>(i);
      State s = draw_init(init, cfg.master_seed, stream);
      require_in_domain(p, s);
      s = run_path(p, s, cfg, stream, n_steps);
      cloud(i, 0) = s.v;
      cloud(i, 1) = s.g;
    }
  });
  return cloud;
}

CloudTrajectory ensemble_snapshots(const ModelParams& p, const InitSampler& init,
                                   const SimConfig& cfg, int n) {
  require_valid(p);
  require_valid(cfg);
  if (n < 1) throw std::invalid_argument("ensemble size must be positive");
  const int64_t n_steps = step_count(cfg);
  CloudTrajectory out;
  out.times.push_back(0.0);
  for (int64_t i = 0; i < n_steps; ++i)
    if ((i + 1) % cfg.snapshot_stride == 0 || i + 1 == n_steps)
      out.times.push_back(static_cast<double>(i + 1) * cfg.dt);
  out.clouds.assign(out.times.size(), PointCloud(n, 2));
  parallel_for(n, [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) {
      const auto stream = static_cast<uint32_t>(i);
      State s = draw_init(init, cfg.master_seed, stream);
      require_in_domain(p, s);
      size_t snap = 0;
      out.clouds[snap](i, 0) = s.v;
      out.clouds[snap](i, 1) = s.g;
      ++snap;
      for (int64_t k = 0; k < n_steps; ++k) {
        s = detail::step_raw(p, s, cfg.dt,
                             rng::gauss_at(cfg.master_seed, stream, k, 0));
        if ((k + 1) % cfg.snapshot_stride == 0 || k + 1 == n_steps) {
          out.clouds[snap](i, 0) = s.v;
          out.clouds[snap](i, 1) = s.g;
          ++snap;
        }
      }
    }
  });
  return out;
}

}  // namespace vclab
