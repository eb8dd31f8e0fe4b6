#include <doctest.h>

#include <cmath>
#include <functional>
#include <vclab/metric.hpp>
#include <vclab/rng.hpp>

using namespace vclab;

namespace {

ModelParams steep_model() {
  ModelParams p;
  p.v_l = 0.0;
  p.v_e = 1.0;
  p.g_l = 1.0;
  p.gamma = 1.0;
  p.a = 0.3;
  p.conductance = LogisticG{0.2, 2.6, 8.0, 0.5};  // sup|G'| = 5.2
  return p;
}

DistanceSpec moderate_spec(double xi = 0.1) {
  DistanceOverrides o;
  o.m = 0.5;
  o.M = 2.0;
  o.r_star = 3.0;
  o.k = 2.0;
  return build_distance_spec(steep_model(), xi, o);
}

double simpson(const std::function<double(double)>& f, double lo, double hi,
               int n) {
  if (n % 2) ++n;
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_SUITE("metric") {
  TEST_CASE("steep-logistic constants match the closed forms") {
    DistanceSpec d = build_distance_spec(steep_model(), 1e-3);
    CHECK(d.m == doctest::Approx(0.09615384615384616).epsilon(1e-14));
    CHECK(d.M == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(d.r_star == doctest::Approx(10.4).epsilon(1e-14));
    CHECK(d.k == doctest::Approx(3983.2924444444443).epsilon(1e-13));
    CHECK(d.ramp_end == doctest::Approx(10.4).epsilon(1e-14));
    CHECK(d.log_lambda_guaranteed ==
          doctest::Approx(-430835.21337620413).epsilon(1e-12));
    CHECK(d.lambda_guaranteed == 0.0);  // honest underflow; the log stays finite

    // the frozen tail weight underflows, so rho is flat beyond r_star here
    CHECK(rho(d, 10.5) == rho(d, 10.4));
  }

  TEST_CASE("regime detection and spec validation") {
    ModelParams p = steep_model();

    p.a = 0.0;
    CHECK_THROWS_AS(build_distance_spec(p, 1e-3), std::invalid_argument);
    p.a = 0.3;

    CHECK_THROWS_AS(build_distance_spec(p, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_distance_spec(p, 1.5), std::invalid_argument);

    // flat target: weighted norm already contracts
    p.conductance = ConstantG{0.5};
    CHECK_THROWS_AS(build_distance_spec(p, 1e-3), DeterministicRegimeError);

    // low slope: the formulas give m >= M, same regime
    p.conductance = LogisticG{0.2, 0.1, 4.0, 0.5};  // sup|G'| = 0.1
    CHECK_THROWS_AS(build_distance_spec(p, 1e-3), DeterministicRegimeError);

    // a fully overridden spec works even for a flat target
    p.conductance = ConstantG{0.5};
    DistanceOverrides full;
    full.m = 0.5;
    full.M = 2.0;
    full.r_star = 3.0;
    full.k = 2.0;
    CHECK_NOTHROW(build_distance_spec(p, 0.1, full));

    ModelParams q = steep_model();
    DistanceOverrides o;
    o.m = 3.0;  // breaks the lower envelope (needs m <= 8/3)
    CHECK_THROWS_AS(build_distance_spec(q, 1e-3, o), std::invalid_argument);
    o = DistanceOverrides{};
    o.r_star = 1.5;
    CHECK_THROWS_AS(build_distance_spec(q, 1e-3, o), std::invalid_argument);
    o = DistanceOverrides{};
    o.M = 0.05;  // below m = 1/10.4
    CHECK_THROWS_AS(build_distance_spec(q, 1e-3, o), DeterministicRegimeError);
    o = DistanceOverrides{};
    o.k = -1.0;
    CHECK_THROWS_AS(build_distance_spec(q, 1e-3, o), std::invalid_argument);
  }

  TEST_CASE("short r_star shifts the ramp to keep curvature bounded") {
    DistanceOverrides o;
    o.m = 0.5;
    o.M = 2.0;
    o.r_star = 2.2;
    o.k = 2.0;
    DistanceSpec d = build_distance_spec(steep_model(), 0.1, o);
    CHECK(d.ramp_end == doctest::Approx(3.2).epsilon(1e-14));
    CHECK(theta2_prime(d, 3.2) == d.M);
    CHECK(theta2_prime(d, 3.19) < d.M);

    // curvature of the ramp never exceeds M - m
    const double h = 1e-5;
    double max_curv = 0;
    for (double r = 1.0 + h; r < d.ramp_end - h; r += 1e-3) {
      double c = (theta2(d, r + h) - 2 * theta2(d, r) + theta2(d, r - h)) /
                 (h * h);
      max_curv = std::max(max_curv, c);
    }
    CHECK(max_curv <= (d.M - d.m) * (1 + 1e-6));
  }

  TEST_CASE("ramp profiles have the pinned plateaus and slopes") {
    DistanceSpec d = moderate_spec();  // xi = 0.1
    CHECK(theta1(d, 0.0) == 0.0);
    CHECK(theta1_prime(d, 0.02) == 0.0);
    CHECK(theta1_prime(d, 0.0625) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(theta1_prime(d, 0.2) == 1.0);
    CHECK(theta2_prime(d, 0.02) == 0.0);
    CHECK(theta2_prime(d, 0.5) == doctest::Approx(d.m).epsilon(1e-14));
    CHECK(theta2_prime(d, 1.0) == doctest::Approx(d.m).epsilon(1e-14));
    CHECK(theta2_prime(d, 2.0) ==
          doctest::Approx(d.m + (d.M - d.m) * 0.5).epsilon(1e-14));
    CHECK(theta2_prime(d, 3.5) == d.M);
    CHECK(rho_prime(d, 0.0) == 1.0);

    CHECK_THROWS_AS(theta1(d, -0.1), std::domain_error);
    CHECK_THROWS_AS(theta2(d, -0.1), std::domain_error);
    CHECK_THROWS_AS(rho(d, -0.1), std::domain_error);
  }

  TEST_CASE("closed-form integrals agree with quadrature") {
    DistanceSpec d = moderate_spec();
    for (double r : {0.04, 0.07, 0.5, 1.7, 2.9, 3.5}) {
      double q1 = simpson([&](double x) { return theta1_prime(d, x); }, 0.0, r,
                          40000);
      double q2 = simpson([&](double x) { return theta2_prime(d, x); }, 0.0, r,
                          40000);
      CHECK(theta1(d, r) == doctest::Approx(q1).epsilon(1e-8));
      CHECK(theta2(d, r) == doctest::Approx(q2).epsilon(1e-8));
    }
    // rho' has a kink at r_star; integrate the pieces separately
    double qa = simpson([&](double x) { return rho_prime(d, x); }, 0.0, 3.0,
                        20000);
    double qb = simpson([&](double x) { return rho_prime(d, x); }, 3.0, 4.0,
                        2000);
    CHECK(rho(d, 3.0) == doctest::Approx(qa).epsilon(1e-10));
    CHECK(rho(d, 4.0) == doctest::Approx(qa + qb).epsilon(1e-10));

    // frozen closed-form values
    CHECK(rho(d, 0.25) == doctest::Approx(0.23996260947994210814).epsilon(1e-14));
    CHECK(rho(d, 1.0) == doctest::Approx(0.59814400666130410147).epsilon(1e-14));
    CHECK(rho(d, 3.0) == doctest::Approx(0.62665706742124588238).epsilon(1e-14));
    CHECK(rho(d, 4.0) == doctest::Approx(0.62665708265122562709).epsilon(1e-14));

    // prefactor path: lambda = min(1, 1/6, 1/8, 3/4) e^{-18}
    CHECK(d.log_lambda_guaranteed ==
          doctest::Approx(std::log(0.125) - 18.0).epsilon(1e-14));
    CHECK(d.lambda_guaranteed ==
          doctest::Approx(std::exp(d.log_lambda_guaranteed)).epsilon(1e-14));
  }

  TEST_CASE("envelopes, monotonicity, and concavity hold on random points") {
    DistanceSpec specs[2] = {moderate_spec(), moderate_spec(1.0)};
    for (const DistanceSpec& d : specs) {
      double prev_rho = -1, prev_r = -1;
      for (int i = 0; i < 100000; ++i) {
        auto [u1, u2] = rng::uniform_pair(7, 0, i, 0);
        double r = 12.0 * u1;
        CHECK(theta1(d, r) <= r + 1e-12);
        CHECK(theta1(d, r) >= r - d.xi - 1e-12);
        CHECK(theta2(d, r) <= d.M * r + 1e-12);
        CHECK(theta2(d, r) >= d.m * r - d.xi - 1e-12);
        double t1p = theta1_prime(d, r), t2p = theta2_prime(d, r);
        CHECK(t1p >= 0);
        CHECK(t1p <= 1.0 + 1e-15);
        CHECK(t2p >= 0);
        CHECK(t2p <= d.M + 1e-15);
        CHECK(rho_prime(d, r) <= 1.0);
        CHECK(rho(d, r) <= r + 1e-12);
        (void)u2;
      }
      // rho increasing and concave along a grid
      for (double r = 0; r <= 6.0; r += 1e-3) {
        double v = rho(d, r);
        if (prev_r >= 0) {
          CHECK(v >= prev_rho);
          CHECK(rho_prime(d, r) <= rho_prime(d, prev_r) + 1e-15);
        }
        prev_rho = v;
        prev_r = r;
      }
    }
  }

  TEST_CASE("rho distance is a symmetric gauge of the gap") {
    DistanceSpec d = moderate_spec();
    State z{0.3, 1.2}, zp{0.8, 0.4};
    CHECK(rho_distance(d, z, z) == 0.0);
    CHECK(rho_distance(d, z, zp) == rho_distance(d, zp, z));
    double expect = rho(d, theta1(d, 0.5) + theta2(d, 0.8));
    CHECK(rho_distance(d, z, zp) == doctest::Approx(expect).epsilon(1e-15));
    CHECK(rho_distance(d, z, zp) > 0);
  }

  TEST_CASE("smoothstep helpers") {
    CHECK(smoothstep3(0.0) == 0.0);
    CHECK(smoothstep3(1.0) == 1.0);
    CHECK(smoothstep3(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(smoothstep3_integral(1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(smoothstep5(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(smoothstep5(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  }
}
