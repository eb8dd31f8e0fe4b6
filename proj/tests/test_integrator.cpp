#include <doctest.h>

#include <cmath>
#include <vclab/integrator.hpp>
#include <vclab/stats.hpp>
#include <vclab/steady.hpp>
#include <vclab/util.hpp>

using namespace vclab;

namespace {

ModelParams constant_model(double c) {
  ModelParams p;
  p.v_l = 0.0;
  p.v_e = 1.0;
  p.g_l = 1.0;
  p.gamma = 1.0;
  p.a = 0.3;
  p.conductance = ConstantG{c};
  return p;
}

ModelParams logistic_model() {
  ModelParams p;
  p.v_l = 0.0;
  p.v_e = 1.0;
  p.g_l = 1.0;
  p.gamma = 1.0;
  p.a = 0.3;
  p.conductance = LogisticG{0.3, 0.5, 4.0, 0.5};
  return p;
}

}  // namespace

TEST_SUITE("integrator") {
  TEST_CASE("noise-free step holds a fixed point and matches hand Euler") {
    ModelParams p = constant_model(0.5);
    p.a = 0.0;

    // equilibrium of the constant-drive model: v* = g*/(g_l+g*), g* = c
    State fp{1.0 / 3.0, 0.5};
    State next = step(p, fp, 0.1, 0.0);
    CHECK(next.v == doctest::Approx(fp.v).epsilon(1e-15));
    CHECK(next.g == doctest::Approx(fp.g).epsilon(1e-15));

    // explicit Euler from the corner: v stays, g relaxes toward c
    State out = step(p, State{0.0, 0.0}, 0.1, 0.0);
    CHECK(out.v == doctest::Approx(0.0));
    CHECK(out.g == doctest::Approx(0.05));
  }

  TEST_CASE("reflection and clamping keep the state inside the domain") {
    ModelParams p = constant_model(0.5);
    // large negative shock drives g below zero; symmetrized scheme folds back
    State s{0.5, 0.01};
    const double dt = 1e-2, z = -5.0;
    const double raw =
        s.g + p.gamma * (0.5 - s.g) * dt + std::sqrt(2 * dt) * p.a * z;
    REQUIRE(raw < 0);
    State out = step(p, s, dt, z);
    CHECK(out.g == doctest::Approx(-raw).epsilon(1e-14));
    CHECK(out.g >= 0);

    // voltage clamp at both faces
    ModelParams q = constant_model(0.5);
    q.g_l = 300.0;  // strong leak overshoots the lower face in one step
    CHECK(step(q, State{0.01, 0.0}, 0.1, 0.0).v == q.v_l);
    q.g_l = 1e-6;
    CHECK(step(q, State{0.99, 200.0}, 0.1, 0.0).v == q.v_e);
  }

  TEST_CASE("step validates inputs") {
    ModelParams p = constant_model(0.5);
    CHECK_THROWS_AS(step(p, State{-0.1, 0.5}, 1e-3, 0.0), std::domain_error);
    CHECK_THROWS_AS(step(p, State{0.5, -0.1}, 1e-3, 0.0), std::domain_error);
    CHECK_THROWS_AS(step(p, State{0.5, 0.5}, 1e-3, std::nan("")),
                    std::runtime_error);
  }

  TEST_CASE("simulate is deterministic and confined") {
    ModelParams p = logistic_model();
    SimConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 2.0;
    sc.snapshot_stride = 100;
    sc.master_seed = 42;

    Trajectory t1 = simulate(p, State{0.2, 0.1}, sc, 7);
    Trajectory t2 = simulate(p, State{0.2, 0.1}, sc, 7);
    REQUIRE(t1.times.size() == t2.times.size());
    for (size_t i = 0; i < t1.times.size(); ++i) {
      CHECK(t1.states[i].v == t2.states[i].v);
      CHECK(t1.states[i].g == t2.states[i].g);
      CHECK(state_in_domain(p, t1.states[i]));
    }
    // snapshot grid: stride * dt spacing, first at t=0, last at t_end
    CHECK(t1.times.front() == doctest::Approx(0.0));
    CHECK(t1.times.back() == doctest::Approx(2.0));
    CHECK(t1.times[1] - t1.times[0] == doctest::Approx(0.1));

    // a different replica stream gives a different path
    Trajectory t3 = simulate(p, State{0.2, 0.1}, sc, 8);
    CHECK(t3.states.back().g != t1.states.back().g);
  }

  TEST_CASE("ensemble with one replica reproduces simulate") {
    ModelParams p = logistic_model();
    SimConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 1.0;
    sc.master_seed = 5;
    PointInit init{State{0.3, 0.2}};

    Trajectory solo = simulate(p, State{0.3, 0.2}, sc, 0);
    PointCloud cloud = ensemble(p, init, sc, 1);
    REQUIRE(cloud.rows() == 1);
    CHECK(cloud(0, 0) == solo.states.back().v);
    CHECK(cloud(0, 1) == solo.states.back().g);
  }

  TEST_CASE("ensemble is bit-identical across thread caps") {
    ModelParams p = logistic_model();
    SimConfig sc;
    sc.dt = 1e-3;
    sc.t_end = 0.5;
    sc.master_seed = 11;
    UniformInit init{0.0, 1.0, 0.0, 0.8};

    set_thread_cap(1);
    PointCloud one = ensemble(p, init, sc, 64);
    set_thread_cap(4);
    PointCloud four = ensemble(p, init, sc, 64);
    set_thread_cap(0);
    REQUIRE(one.rows() == four.rows());
    for (Eigen::Index i = 0; i < one.rows(); ++i) {
      CHECK(one(i, 0) == four(i, 0));
      CHECK(one(i, 1) == four(i, 1));
    }
  }

  TEST_CASE("uniform initial sampler respects its box") {
    ModelParams p = logistic_model();
    UniformInit init{0.1, 0.4, 0.2, 0.3};
    for (uint32_t i = 0; i < 200; ++i) {
      State s = draw_init(init, 99, i);
      CHECK(s.v >= 0.1);
      CHECK(s.v <= 0.4);
      CHECK(s.g >= 0.2);
      CHECK(s.g <= 0.3);
      REQUIRE(state_in_domain(p, s));
    }
  }

  TEST_CASE("config validation and stability warnings") {
    SimConfig sc;
    sc.dt = 0.0;
    CHECK(!validate(sc).empty());
    sc.dt = 2.0;
    sc.t_end = 1.0;
    CHECK(!validate(sc).empty());
    sc.dt = 1e-3;
    sc.t_end = 1.0;
    CHECK(validate(sc).empty());

    ModelParams stiff = constant_model(0.5);
    stiff.gamma = 2000.0;
    CHECK(!stability_warnings(stiff, sc).empty());
    CHECK(stability_warnings(constant_model(0.5), sc).empty());
  }

  TEST_CASE("halving dt roughly halves the reflection bias of the mean") {
    // weak drive keeps g near the reflecting wall, where the scheme's weak
    // error is dominated by an O(dt) boundary term that the mean resolves
    ModelParams p = constant_model(0.05);
    const double exact = reflected_ou_moments(0.05, p.gamma, p.a).mean;

    auto mean_bias = [&](double dt, uint64_t seed) {
      SimConfig sc;
      sc.dt = dt;
      sc.t_end = 20.0;
      sc.master_seed = seed;
      const int n = 400000;
      PointInit init{State{0.5, 0.05}};
      PointCloud cloud = ensemble(p, init, sc, n);
      std::vector<double> g(n);
      for (int i = 0; i < n; ++i) g[i] = cloud(i, 1);
      SampleSummary s = summarize(g);
      return std::pair<double, double>(s.mean - exact, s.std_error);
    };

    auto [b1, se1] = mean_bias(0.1, 101);
    auto [b2, se2] = mean_bias(0.05, 202);
    REQUIRE(std::abs(b1) > 5 * se1);  // coarse bias resolved
    REQUIRE(std::abs(b2) > 5 * se2);  // fine bias resolved
    const double ratio = b1 / b2;
    const double sigma = std::abs(ratio) * std::sqrt(se1 * se1 / (b1 * b1) +
                                                     se2 * se2 / (b2 * b2));
    // first-order weak convergence: ratio near 2, generous statistical band
    CHECK(ratio > 1.5 - 3 * sigma);
    CHECK(ratio < 3.0 + 3 * sigma);
  }
}
