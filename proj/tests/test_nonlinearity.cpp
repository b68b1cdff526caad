#include <cmath>
#include <random>

#include "doctest.h"

#include "bisolve/nonlinearity.hpp"
#include "oracles.hpp"

using namespace bisolve;

TEST_SUITE("nonlinearity") {

TEST_CASE("positive-mass sextuple at s = 2") {
  const Nonlinearity nl = Nonlinearity::power_minus_mass(1.0, 2.0, 4.0, 4);
  const GEval e = nl.eval(2.0);
  CHECK(e.g == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(e.G == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.g1 == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(e.g2 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.G1 == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(e.G2 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(nl.g(-2.0) == doctest::Approx(-6.0).epsilon(1e-14));
}

TEST_CASE("zero-mass splitting at s = 1") {
  const Nonlinearity nl = Nonlinearity::power(8.0, 3);
  const GEval e = nl.eval(1.0);
  CHECK(e.g1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.g2 == doctest::Approx(0.0));
  CHECK(e.G == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("decomposition identities on random samples") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> xs(-5.0, 5.0);
  for (const Nonlinearity& nl :
       {Nonlinearity::power_minus_mass(1.0, 2.0, 4.0, 4), Nonlinearity::power(8.0, 3)}) {
    for (int i = 0; i < 1000; ++i) {
      const double s = xs(rng);
      const GEval e = nl.eval(s);
      CHECK(e.g == doctest::Approx(e.g1 - e.g2).epsilon(1e-13));
      CHECK(e.G == doctest::Approx(e.G1 - e.G2).epsilon(1e-13));
      if (s >= 0.0) {
        CHECK(e.g1 >= 0.0);
        CHECK(e.g2 >= 0.0);
      }
      if (nl.m() > 0.0 && s > 0.0) {
        CHECK(e.g2 >= nl.m() * std::pow(s, nl.gamma() - 1.0) * (1.0 - 1e-12));
        CHECK(e.G2 >= nl.m() / nl.gamma() * std::pow(s, nl.gamma()) * (1.0 - 1e-12));
      }
    }
  }
}

TEST_CASE("G differentiates back to g") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> xs(-4.0, 4.0);
  for (const Nonlinearity& nl :
       {Nonlinearity::power_minus_mass(1.0, 2.0, 4.0, 4), Nonlinearity::power(8.0, 3)}) {
    for (int i = 0; i < 1000; ++i) {
      const double s = xs(rng);
      const double fd = oracle::centered_diff([&](double t) { return nl.G(t); }, s, 1e-5);
      CHECK(fd == doctest::Approx(nl.g(s)).epsilon(1e-6).scale(std::max(1.0, std::abs(fd))));
    }
  }
}

TEST_CASE("regime classification") {
  const RegimeReport pm = classify_regime(Nonlinearity::power_minus_mass(1.0, 2.0, 4.0, 4));
  CHECK(pm.verdict == RegimeReport::Verdict::accepted);
  CHECK(pm.regime == MassRegime::positive_mass);
  CHECK(pm.m_detected == doctest::Approx(1.0).epsilon(1e-6));

  const RegimeReport zm = classify_regime(Nonlinearity::power(8.0, 3));
  CHECK(zm.verdict == RegimeReport::Verdict::accepted);
  CHECK(zm.regime == MassRegime::zero_mass_large_gamma);

  const auto cubic_declared_seven = Nonlinearity::tabulated(
      [](double s) { return s * s * s; }, 0.0, 7.0, 4.0, 3, "cubic with gamma 7");
  const RegimeReport rej = classify_regime(cubic_declared_seven);
  CHECK(rej.verdict == RegimeReport::Verdict::rejected);
  CHECK(rej.reason.find("neither settles") != std::string::npos);

  const RegimeReport sub = classify_regime(Nonlinearity::power(4.0, 3));
  CHECK(sub.verdict == RegimeReport::Verdict::accepted_truncated_only);

  const auto wrong_mass = Nonlinearity::tabulated(
      [](double s) { return -2.0 * s + s * s * s; }, 1.0, 2.0, 4.0, 4, "mass mismatch");
  CHECK(classify_regime(wrong_mass).verdict == RegimeReport::Verdict::rejected);
}

TEST_CASE("admissible level xi0") {
  CHECK(find_xi0(Nonlinearity::power_minus_mass(1.0, 2.0, 4.0, 4)) ==
        doctest::Approx(1.1 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(find_xi0(Nonlinearity::power(8.0, 3)) == doctest::Approx(1e-3).epsilon(1e-12));
  const auto linear_sink =
      Nonlinearity::tabulated([](double s) { return -s; }, 1.0, 2.0, 3.0, 3, "pure sink");
  CHECK_THROWS_AS(find_xi0(linear_sink), NotFoundError);
}

}  // TEST_SUITE
