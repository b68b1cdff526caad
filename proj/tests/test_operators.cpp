#include <cmath>
#include <random>

#include "doctest.h"

#include "bisolve/operator_family.hpp"
#include "bisolve/truncated_operator.hpp"
#include "oracles.hpp"

using namespace bisolve;

TEST_SUITE("operators") {

TEST_CASE("power family closed forms") {
  const OperatorFamily bi = OperatorFamily::power(-0.5);
  const FamilyEval e = bi.eval(0.75);
  CHECK(e.a == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.a_prime == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(e.A == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bi.a(0.0) == doctest::Approx(1.0));
}

TEST_CASE("two-term family closed forms") {
  const OperatorFamily tt = OperatorFamily::two_term(2.0, 1.0);
  const FamilyEval e = tt.eval(0.0);
  CHECK(e.a == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.a_prime == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(e.A == doctest::Approx(0.0));
}

TEST_CASE("primitive matches independent quadrature") {
  for (const OperatorFamily& fam :
       {OperatorFamily::power(-0.5), OperatorFamily::two_term(2.0, 1.0)}) {
    for (double s : {0.3, 0.7, 0.99}) {
      const double ref = oracle::integrate([&](double t) { return fam.a(t); }, 0.0, s);
      CHECK(fam.primitive(s) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("truncated branch values and primitive") {
  const auto tr = TruncatedOperator::build(OperatorFamily::power(-0.5), 0.5, 0.5, 3.0);
  CHECK(tr.a_theta(1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(tr.a_theta(0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(tr.A_theta(1.0) == doctest::Approx(1.4477152501692065).epsilon(1e-12));
  const double ref = oracle::integrate([&](double t) { return tr.a_theta(t); }, 0.0, 1.0);
  CHECK(tr.A_theta(1.0) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("junction continuity across the schedule") {
  for (const OperatorFamily& fam :
       {OperatorFamily::power(-0.5), OperatorFamily::two_term(2.0, 1.0)}) {
    for (double theta : {0.5, 0.25, 0.1}) {
      const double q = q_lower_bound(fam, theta) + 1.0;
      const auto tr = TruncatedOperator::build(fam, theta, 0.5, q);
      const double sj = 1.0 - theta;
      const double below = tr.a_theta(sj);
      const double above = tr.a_theta(sj * (1.0 + 1e-13));
      CHECK(std::abs(above - below) < 1e-12 * fam.a(sj));
      CHECK(tr.a_theta(0.5 * sj) == fam.a(0.5 * sj));
    }
  }
}

TEST_CASE("midpoint convexity of a_theta(s)s") {
  std::mt19937 rng(42);
  for (const OperatorFamily& fam :
       {OperatorFamily::power(-0.5), OperatorFamily::two_term(2.0, 1.0)}) {
    for (double theta : {0.5, 0.25, 0.1}) {
      const double q = q_lower_bound(fam, theta) + 1.0;
      const auto tr = TruncatedOperator::build(fam, theta, 0.5, q);
      std::uniform_real_distribution<double> lo(0.0, 1.0 - theta);
      std::uniform_real_distribution<double> hi(1.0 - theta, 4.0);
      auto phi = [&](double s) { return tr.a_theta(s) * s; };
      for (int i = 0; i < 1000; ++i) {
        const double s1 = lo(rng), s2 = hi(rng);
        CHECK(phi(0.5 * (s1 + s2)) < 0.5 * (phi(s1) + phi(s2)));
      }
    }
  }
}

TEST_CASE("sandwich constants and bounds") {
  const auto tr = TruncatedOperator::build(OperatorFamily::power(-0.5), 0.5, 0.5, 3.0);
  const SandwichConstants sc = sandwich_constants(tr);
  CHECK(sc.c_bar == doctest::Approx(0.31426968052735448).epsilon(1e-10));
  CHECK(sc.c_bar_theta > sc.c_bar);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> xs(0.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = xs(rng);
    const double s = x * x;
    const double mid = tr.a_theta(s) * s;
    const double env = s + std::pow(x, tr.q());
    CHECK(sc.c_bar * env <= mid * (1.0 + 1e-12) + 1e-300);
    CHECK(mid <= sc.c_bar_theta * env * (1.0 + 1e-12) + 1e-300);
  }
}

TEST_CASE("q lower bound closed form and monotonicity") {
  const OperatorFamily bi = OperatorFamily::power(-0.5);
  for (double theta : {0.5, 0.25, 0.1, 0.05})
    CHECK(q_lower_bound(bi, theta) ==
          doctest::Approx((1.0 - theta) / theta + 2.0).epsilon(1e-10));
  double prev = q_lower_bound(bi, 0.02);
  for (double theta = 0.04; theta < 0.5; theta += 0.02) {
    const double cur = q_lower_bound(bi, theta);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("flux inversion") {
  const auto tr = TruncatedOperator::build(OperatorFamily::power(-0.5), 0.5, 0.5, 3.0);
  CHECK(tr.flux_invert(0.0) == 0.0);
  CHECK(tr.flux_invert(8.0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(tr.flux_invert(0.5) == doctest::Approx(0.5 / std::sqrt(1.25)).epsilon(1e-10));
  for (double x = -4.0; x <= 4.0; x += 0.25) {
    const double w = tr.flux(x);
    CHECK(tr.flux_invert(w) == doctest::Approx(x).epsilon(1e-10));
    CHECK(std::abs(tr.flux(tr.flux_invert(w)) - w) < 1e-10 * std::max(1.0, std::abs(w)));
  }
}

TEST_CASE("truncation exponent selection") {
  const OperatorFamily bi = OperatorFamily::power(-0.5);
  CHECK(select_q(bi, 0.5, MassRegime::positive_mass, 2.0, 4) == doctest::Approx(5.0));
  CHECK(select_q(bi, 0.25, MassRegime::zero_mass_large_gamma, 7.0, 3) ==
        doctest::Approx(6.0));
  CHECK(select_q(bi, 0.5, MassRegime::zero_mass_small_gamma, 5.0, 7) == doctest::Approx(5.0));
  CHECK_THROWS_AS(select_q(bi, 0.1, MassRegime::zero_mass_large_gamma, 7.0, 3),
                  InfeasibilityError);
  CHECK_THROWS_AS(select_q(bi, 0.1, MassRegime::zero_mass_small_gamma, 5.0, 7),
                  InfeasibilityError);
}

TEST_CASE("construction rejections") {
  const OperatorFamily bi = OperatorFamily::power(-0.5);
  CHECK_THROWS_AS(TruncatedOperator::build(bi, 0.5, 0.5, 2.5), InfeasibilityError);
  CHECK_THROWS_AS(TruncatedOperator::build(bi, 0.5, 0.5, 2.0), std::domain_error);
  CHECK_THROWS_AS(TruncatedOperator::build(bi, 0.0, 0.5, 3.0), std::domain_error);
  CHECK_THROWS_AS(TruncatedOperator::build(bi, 0.6, 0.5, 3.0), std::domain_error);
}

TEST_CASE("divergence screen") {
  CHECK(OperatorFamily::power(-0.5).divergence_screen());
  CHECK(OperatorFamily::two_term(2.0, 1.0).divergence_screen());
  CHECK_FALSE(OperatorFamily::constant(1.0).divergence_screen());
}

TEST_CASE("positivity and convexity screen") {
  CHECK_NOTHROW(OperatorFamily::power(-0.5).check_a0());
  CHECK_NOTHROW(OperatorFamily::two_term(2.0, 1.0).check_a0());
  const auto concave =
      OperatorFamily::tabulated([](double s) { return 1.0 - s; }, "decreasing");
  CHECK_THROWS_AS(concave.check_a0(), AdmissibilityError);
}

}  // TEST_SUITE
