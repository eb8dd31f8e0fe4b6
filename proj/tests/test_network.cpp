#include <doctest.h>

#include <cmath>
#include <vclab/network.hpp>
#include <vclab/stats.hpp>

using namespace vclab;

namespace {

ModelParams base_model() {
  ModelParams p;
  p.v_l = 0.0;
  p.v_e = 1.0;
  p.g_l = 1.0;
  p.gamma = 1.0;
  p.a = 0.3;
  p.conductance = ConstantG{0.5};  // replaced by h0 in network runs
  return p;
}

MeanFieldSpec pl_spec() {
  MeanFieldSpec s;
  s.h0 = LogisticG{0.3, 0.5, 4.0, 0.5};
  s.h1 = ProductLogisticH1{0.1, 0.4, 6.0, 0.5};
  return s;
}

double sigma(double steep, double center, double x) {
  return 1.0 / (1.0 + std::exp(-steep * (x - center)));
}

DistanceSpec moderate_dist(const ModelParams& p) {
  DistanceOverrides o;
  o.m = 0.5;
  o.M = 2.0;
  o.r_star = 3.0;
  o.k = 0.01;
  return build_distance_spec(p, 0.1, o);
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("pair interaction evaluations and bounds") {
    InteractionSpec c = ConstantH1{0.3};
    CHECK(h1_eval(c, 0.1, 0.9) == 0.3);
    CHECK(h1_sup(c) == 0.3);
    CHECK(h1_dw_sup(c) == 0.0);

    InteractionSpec pl = ProductLogisticH1{0.1, 0.4, 6.0, 0.5};
    CHECK(h1_eval(pl, 0.5, 0.5) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(h1_eval(pl, 0.5, 100.0) ==
          doctest::Approx(0.1 + 0.4 * 0.5).epsilon(1e-12));
    CHECK(h1_sup(pl) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(h1_dw_sup(pl) == doctest::Approx(0.6).epsilon(1e-15));

    // slope bound dominates sampled difference quotients in w
    for (int i = 0; i < 2000; ++i) {
      auto [u0, u1] = rng::uniform_pair(41, 0, i, 0);
      const double w1 = 2.0 * u0 - 0.5, w2 = w1 + 1e-4;
      const double dq =
          std::abs(h1_eval(pl, u1, w2) - h1_eval(pl, u1, w1)) / 1e-4;
      CHECK(dq <= h1_dw_sup(pl) * (1 + 1e-6));
    }
  }

  TEST_CASE("network spec validation") {
    ModelParams p = base_model();
    MeanFieldSpec s = pl_spec();
    CHECK(validate(s, p).empty());
    s.h1 = ProductLogisticH1{-0.1, 0.4, 6.0, 0.5};
    CHECK(!validate(s, p).empty());
    s.h1 = ProductLogisticH1{0.1, -0.4, 6.0, 0.5};
    CHECK(!validate(s, p).empty());
    s.h1 = ConstantH1{-1.0};
    CHECK(!validate(s, p).empty());
    s = pl_spec();
    s.h0 = LogisticG{0.0, -0.5, 4.0, 0.5};  // h0 dips negative on the window
    CHECK(!validate(s, p).empty());
  }

  TEST_CASE("interaction targets match the direct double loop") {
    MeanFieldSpec s = pl_spec();
    const int n = 7;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng::uniform_pair(43, 0, i, 0).u0;

    const auto& pl = std::get<ProductLogisticH1>(s.h1);
    for (bool include_self : {false, true}) {
      Eigen::VectorXd got = interaction_targets(s, v, include_self);
      for (int i = 0; i < n; ++i) {
        double acc = 0;
        int cnt = 0;
        for (int j = 0; j < n; ++j) {
          if (!include_self && j == i) continue;
          acc += h1_eval(s.h1, v[i], v[j]);
          ++cnt;
        }
        const double direct = eval_conductance(s.h0, v[i]) + acc / cnt;
        CHECK(got[i] == doctest::Approx(direct).epsilon(1e-12));
      }
    }
    (void)pl;

    // constant interaction collapses exactly
    MeanFieldSpec cs;
    cs.h0 = s.h0;
    cs.h1 = ConstantH1{0.25};
    Eigen::VectorXd got = interaction_targets(cs, v, false);
    for (int i = 0; i < n; ++i)
      CHECK(got[i] == eval_conductance(cs.h0, v[i]) + 0.25);

    Eigen::VectorXd single(1);
    single << 0.5;
    CHECK_THROWS_AS(interaction_targets(s, single, false),
                    std::invalid_argument);
    CHECK_NOTHROW(interaction_targets(s, single, true));
  }

  TEST_CASE("perturbation rate eta") {
    ModelParams p = base_model();
    p.conductance = LogisticG{0.2, 2.6, 8.0, 0.5};
    DistanceSpec d = moderate_dist(p);

    EtaResult zero = eta(0.0, p, d);
    CHECK(zero.value == 0.0);
    CHECK(std::isinf(zero.log_value));
    CHECK(zero.log_value < 0);

    EtaResult one = eta(0.6, p, d);
    CHECK(one.value ==
          doctest::Approx(2.0 * 0.6 * std::exp(0.09)).epsilon(1e-13));
    CHECK(one.log_value ==
          doctest::Approx(std::log(1.2) + 0.09).epsilon(1e-13));
    EtaResult two = eta(1.2, p, d);
    CHECK(two.value == doctest::Approx(2 * one.value).epsilon(1e-13));

    // spec-driven overload collapses the mean-field sum to the H1 bound
    MeanFieldSpec s = pl_spec();
    EtaResult via_spec = eta(s, p, d);
    CHECK(via_spec.value == eta(h1_dw_sup(s.h1), p, d).value);

    // the un-overridden constants overflow the exponential but not its log
    DistanceSpec tuned = build_distance_spec(p, 1e-3);
    EtaResult big = eta(0.6, p, tuned);
    CHECK(std::isinf(big.value));
    CHECK(std::isfinite(big.log_value));
    CHECK(big.log_value ==
          doctest::Approx(std::log(4.0 * 0.6) + tuned.k * tuned.r_star *
                                                    tuned.r_star)
              .epsilon(1e-12));

    CHECK_THROWS_AS(eta(-0.5, p, d), std::invalid_argument);
  }

  TEST_CASE("constant interaction simulates as decoupled neurons") {
    ModelParams p = base_model();
    MeanFieldSpec s;
    s.h0 = LogisticG{0.3, 0.5, 4.0, 0.5};
    s.h1 = ConstantH1{0.25};
    SimConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 1.0;
    sc.master_seed = 7;
    const int n = 3;
    NetworkState s0;
    s0.v.resize(n);
    s0.g.resize(n);
    s0.v << 0.2, 0.5, 0.8;
    s0.g << 0.1, 0.6, 1.3;

    NetworkTrajectory out = network_simulate(s, p, s0, sc, 4);

    // oracle: per-neuron Euler with the shifted target, same noise slots
    const int64_t n_steps = 1000;
    const double sdt = std::sqrt(2.0 * sc.dt) * p.a;
    for (int i = 0; i < n; ++i) {
      double v = s0.v[i], g = s0.g[i];
      for (int64_t k = 0; k < n_steps; ++k) {
        const double target = eval_conductance(s.h0, v) + 0.25;
        const double z =
            rng::gauss_at(sc.master_seed, 4, k, static_cast<uint32_t>(i));
        const double nv = v + (p.g_l * (p.v_l - v) + g * (p.v_e - v)) * sc.dt;
        v = std::clamp(nv, p.v_l, p.v_e);
        g = std::abs(g + p.gamma * (target - g) * sc.dt + sdt * z);
      }
      REQUIRE(out.states.back().v[i] == v);
      REQUIRE(out.states.back().g[i] == g);
    }
  }

  TEST_CASE("neurons are exchangeable together with their noise slots") {
    ModelParams p = base_model();
    SimConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 0.5;
    sc.master_seed = 13;
    const int n = 4;
    NetworkState s0;
    s0.v.resize(n);
    s0.g.resize(n);
    s0.v << 0.2, 0.4, 0.6, 0.8;
    s0.g << 0.1, 0.5, 0.9, 1.3;
    const std::vector<uint32_t> perm = {2, 0, 3, 1};  // position -> old index

    NetworkState s0p;
    s0p.v.resize(n);
    s0p.g.resize(n);
    for (int i = 0; i < n; ++i) {
      s0p.v[i] = s0.v[perm[static_cast<size_t>(i)]];
      s0p.g[i] = s0.g[perm[static_cast<size_t>(i)]];
    }

    // constant interaction: permutation equivariance is exact in fp
    MeanFieldSpec cs;
    cs.h0 = LogisticG{0.3, 0.5, 4.0, 0.5};
    cs.h1 = ConstantH1{0.25};
    NetworkTrajectory a = network_simulate(cs, p, s0, sc, 2);
    NetworkTrajectory b = network_simulate(cs, p, s0p, sc, 2, &perm);
    for (int i = 0; i < n; ++i) {
      REQUIRE(b.states.back().v[i] ==
              a.states.back().v[perm[static_cast<size_t>(i)]]);
      REQUIRE(b.states.back().g[i] ==
              a.states.back().g[perm[static_cast<size_t>(i)]]);
    }

    // product interaction: the shared mean is summed in a different order,
    // so equivariance holds to rounding
    MeanFieldSpec s = pl_spec();
    NetworkTrajectory c = network_simulate(s, p, s0, sc, 2);
    NetworkTrajectory d = network_simulate(s, p, s0p, sc, 2, &perm);
    for (int i = 0; i < n; ++i) {
      CHECK(d.states.back().v[i] ==
            doctest::Approx(c.states.back().v[perm[static_cast<size_t>(i)]])
                .epsilon(1e-10));
      CHECK(d.states.back().g[i] ==
            doctest::Approx(c.states.back().g[perm[static_cast<size_t>(i)]])
                .epsilon(1e-10));
    }
  }

  TEST_CASE("noise-free two-neuron network matches a Runge-Kutta reference") {
    ModelParams p = base_model();
    p.a = 0.0;
    MeanFieldSpec s = pl_spec();
    SimConfig sc;
    sc.dt = 2e-5;
    sc.t_end = 2.0;
    sc.snapshot_stride = 100000;
    NetworkState s0;
    s0.v.resize(2);
    s0.g.resize(2);
    s0.v << 0.3, 0.7;
    s0.g << 0.5, 1.2;

    NetworkTrajectory out = network_simulate(s, p, s0, sc);

    // classical RK4 on the 4-dimensional coupled ODE
    auto deriv = [&](const Eigen::Vector4d& x) {
      Eigen::Vector4d dx;
      for (int i = 0; i < 2; ++i) {
        const double v = x[2 * i], g = x[2 * i + 1];
        const double vo = x[2 * (1 - i)];
        const double target = eval_conductance(s.h0, v) + h1_eval(s.h1, v, vo);
        dx[2 * i] = p.g_l * (p.v_l - v) + g * (p.v_e - v);
        dx[2 * i + 1] = p.gamma * (target - g);
      }
      return dx;
    };
    Eigen::Vector4d x(0.3, 0.5, 0.7, 1.2);
    const double h = 1e-3;
    for (int k = 0; k < 2000; ++k) {
      const Eigen::Vector4d k1 = deriv(x);
      const Eigen::Vector4d k2 = deriv(x + 0.5 * h * k1);
      const Eigen::Vector4d k3 = deriv(x + 0.5 * h * k2);
      const Eigen::Vector4d k4 = deriv(x + h * k3);
      x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    CHECK(out.states.back().v[0] == doctest::Approx(x[0]).epsilon(1e-4));
    CHECK(out.states.back().g[0] == doctest::Approx(x[1]).epsilon(1e-4));
    CHECK(out.states.back().v[1] == doctest::Approx(x[2]).epsilon(1e-4));
    CHECK(out.states.back().g[1] == doctest::Approx(x[3]).epsilon(1e-4));
  }

  TEST_CASE("coupled identical networks stay glued") {
    ModelParams p = base_model();
    MeanFieldSpec s = pl_spec();
    DistanceSpec d = moderate_dist(p);
    SimConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 0.5;
    sc.master_seed = 3;
    const int n = 4;
    NetworkState s0;
    s0.v.resize(n);
    s0.g.resize(n);
    s0.v << 0.2, 0.4, 0.6, 0.8;
    s0.g << 0.1, 0.5, 0.9, 1.3;

    for (CouplingVariant variant :
         {CouplingVariant::synchronous, CouplingVariant::mirror}) {
      CouplingKind kind{variant, 1e-3};
      NetworkCoupledResult r =
          network_coupled_simulate(s, p, s0, s0, sc, kind, d, 5);
      for (double val : r.sum_l1.values) REQUIRE(val == 0.0);
      for (double val : r.sum_rho.values) REQUIRE(val == 0.0);
    }
  }

  TEST_CASE("coupled distinct networks record sensible distances") {
    ModelParams p = base_model();
    MeanFieldSpec s = pl_spec();
    DistanceSpec d = moderate_dist(p);
    SimConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 1.0;
    sc.snapshot_stride = 200;
    sc.master_seed = 3;
    const int n = 4;
    NetworkState s0, s0p;
    s0.v.resize(n);
    s0.g.resize(n);
    s0p.v.resize(n);
    s0p.g.resize(n);
    s0.v << 0.1, 0.2, 0.3, 0.4;
    s0.g << 0.0, 0.2, 0.4, 0.6;
    s0p.v << 0.9, 0.8, 0.7, 0.6;
    s0p.g << 2.0, 1.8, 1.6, 1.4;

    CouplingKind mirror{CouplingVariant::mirror, 1e-3};
    NetworkCoupledResult r =
        network_coupled_simulate(s, p, s0, s0p, sc, mirror, d, 5);
    NetworkCoupledResult again =
        network_coupled_simulate(s, p, s0, s0p, sc, mirror, d, 5);
    REQUIRE(r.sum_rho.values.size() == r.sum_l1.values.size());
    CHECK(r.sum_rho.values.front() > 0);
    for (size_t i = 0; i < r.sum_rho.values.size(); ++i) {
      CHECK(r.sum_rho.values[i] >= 0);
      CHECK(std::isfinite(r.sum_rho.values[i]));
      CHECK(r.sum_rho.values[i] == again.sum_rho.values[i]);
    }
    for (int i = 0; i < n; ++i) {
      CHECK(state_in_domain(p, State{r.final_z.v[i], r.final_z.g[i]}));
      CHECK(state_in_domain(p, State{r.final_zp.v[i], r.final_zp.g[i]}));
    }

    NetworkState tiny;
    tiny.v.resize(1);
    tiny.g.resize(1);
    tiny.v << 0.5;
    tiny.g << 0.5;
    CHECK_THROWS_AS(
        network_coupled_simulate(s, p, tiny, tiny, sc, mirror, d, 0),
        std::invalid_argument);
  }

  TEST_CASE("single-particle mean field uses the self-inclusive target") {
    ModelParams p = base_model();
    MeanFieldSpec s = pl_spec();
    SimConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 0.5;
    sc.master_seed = 21;
    PointInit init{State{0.4, 0.6}};

    CloudTrajectory out = mckean_simulate(s, p, 1, InitSampler{init}, sc, 9);
    REQUIRE(out.clouds.back().rows() == 1);

    double v = 0.4, g = 0.6;
    const double sdt = std::sqrt(2.0 * sc.dt) * p.a;
    for (int64_t k = 0; k < 500; ++k) {
      const double target = eval_conductance(s.h0, v) + h1_eval(s.h1, v, v);
      const double z = rng::gauss_at(sc.master_seed, 9, k, 0);
      const double nv = v + (p.g_l * (p.v_l - v) + g * (p.v_e - v)) * sc.dt;
      v = std::clamp(nv, p.v_l, p.v_e);
      g = std::abs(g + p.gamma * (target - g) * sc.dt + sdt * z);
    }
    CHECK(out.clouds.back()(0, 0) == v);
    CHECK(out.clouds.back()(0, 1) == g);
    CHECK(out.times.front() == 0.0);
    CHECK(out.times.back() == doctest::Approx(0.5));
  }

  TEST_CASE("constant interaction kills the chaos gap exactly") {
    ModelParams p = base_model();
    MeanFieldSpec s;
    s.h0 = LogisticG{0.3, 0.5, 4.0, 0.5};
    s.h1 = ConstantH1{0.25};
    SimConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 0.5;
    sc.master_seed = 31;
    UniformInit f0{0.0, 1.0, 0.0, 1.0};
    ChaosPoint cp = chaos_error(s, p, 8, InitSampler{f0}, sc, 2);
    CHECK(cp.error <= 1e-12);
  }

  TEST_CASE("chaos gap shrinks with network size") {
    ModelParams p = base_model();
    MeanFieldSpec s = pl_spec();
    SimConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 1.0;
    sc.master_seed = 37;
    UniformInit f0{0.0, 1.0, 0.0, 1.0};
    ChaosPoint small = chaos_error(s, p, 4, InitSampler{f0}, sc, 8);
    ChaosPoint large = chaos_error(s, p, 64, InitSampler{f0}, sc, 8);
    CHECK(small.error > 0);
    CHECK(large.error > 0);
    CHECK(large.error < small.error);
    CHECK(small.std_error > 0);

    ChaosStudy study = chaos_study(s, p, {4, 16}, InitSampler{f0}, sc, 4);
    REQUIRE(study.n_values.size() == 2);
    REQUIRE(study.errors.size() == 2);
    CHECK(study.errors[0] > study.errors[1]);
    CHECK(study.slope < 0);
    CHECK(std::isfinite(study.r2));

    CHECK_THROWS_AS(chaos_study(s, p, {8}, InitSampler{f0}, sc, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(chaos_error(s, p, 1, InitSampler{f0}, sc, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(chaos_error(s, p, 8, InitSampler{f0}, sc, 1),
                    std::invalid_argument);
  }

  TEST_CASE("network init draws are deterministic and slot-separated") {
    UniformInit f0{0.0, 1.0, 0.0, 2.0};
    NetworkState a = draw_network_init(InitSampler{f0}, 6, 11, 3);
    NetworkState b = draw_network_init(InitSampler{f0}, 6, 11, 3);
    NetworkState c = draw_network_init(InitSampler{f0}, 6, 11, 3, 6);
    for (int i = 0; i < 6; ++i) {
      CHECK(a.v[i] == b.v[i]);
      CHECK(a.g[i] == b.g[i]);
      CHECK(a.v[i] != c.v[i]);
    }
  }
}
