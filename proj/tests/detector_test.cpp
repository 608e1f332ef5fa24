#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "demsim/detector.hpp"

using namespace demsim::detector;

TEST_CASE("two-sided Gaussian peaks at its center") {
  const EfficiencyCurve c{0.076, 0.2295, 0.50, 0.70};
  CHECK(c.value(0.2295) == doctest::Approx(0.076).epsilon(1e-15));
  CHECK(c.value(0.2295 - 0.1) < 0.076);
  CHECK(c.value(0.2295 + 0.1) < 0.076);
}

TEST_CASE("late-flank evaluation of the wide-right curve") {
  const EfficiencyCurve c{0.076, 0.2295, 0.50, 0.70};
  CHECK(c.value(1.90) ==
        doctest::Approx(0.00440708149130073).epsilon(1e-12));
}

TEST_CASE("curve tails decay to zero") {
  const EfficiencyCurve c{0.076, 0.2295, 0.50, 0.70};
  CHECK(c.value(1e3) == doctest::Approx(0.0));
  CHECK(c.value(-1e3) == doctest::Approx(0.0));
}

TEST_CASE("gate delay shifts the efficiency peak") {
  const EfficiencyCurve c{0.05, 0.0, 0.4, 0.4};
  CHECK(efficiency_at(c, 1.5, 1.5) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(efficiency_at(c, 0.0, 1.5) == doctest::Approx(c.value(-1.5)));
}

TEST_CASE("click probability limits and example value") {
  CHECK(click_probability(0.0, 0.5, 1e-4) == doctest::Approx(1e-4));
  CHECK(click_probability(1e9, 0.5, 0.0) == doctest::Approx(1.0));
  CHECK(click_probability(50.0 * 0.5, 0.0044, 2.4e-4) ==
        doctest::Approx(0.10438086489594295).epsilon(1e-12));
}

TEST_CASE("click probability rejects bad arguments") {
  CHECK_THROWS_AS(click_probability(-1.0, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(click_probability(1.0, 1.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(click_probability(1.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("mismatch ratio of identical curves is zero") {
  DetectorPair p;
  p.d0_curve = p.d1_curve = {0.05, 0.0, 0.4, 0.4};
  for (double t : {-1.0, 0.0, 2.0})
    CHECK(mismatch_ratio(p, t) == doctest::Approx(0.0));
}

TEST_CASE("default hacked pair mismatch exceeds 20x at both attack times") {
  const auto p = default_hacked_pair();
  CHECK(mismatch_ratio(p, 1.90) >= std::log10(20.0));
  CHECK(mismatch_ratio(p, -1.32) <= -std::log10(20.0));
}

TEST_CASE("blind detectors produce infinity and NaN markers") {
  DetectorPair p = default_hacked_pair();
  p.d1_curve.peak = 0.0;
  CHECK(std::isinf(mismatch_ratio(p, 0.0)));
  CHECK(mismatch_ratio(p, 0.0) > 0.0);
  p.d0_curve.peak = 0.0;
  CHECK(std::isnan(mismatch_ratio(p, 0.0)));
  p.d1_curve.peak = 0.064;
  CHECK(std::isinf(mismatch_ratio(p, 0.0)));
  CHECK(mismatch_ratio(p, 0.0) < 0.0);
}

TEST_CASE("default pairs carry the documented peaks and dark counts") {
  const auto hacked = default_hacked_pair();
  CHECK(hacked.d0_curve.peak == 0.076);
  CHECK(hacked.d1_curve.peak == 0.064);
  CHECK(hacked.d0_curve.center_ns == doctest::Approx(+0.2295));
  CHECK(hacked.d1_curve.center_ns == doctest::Approx(-0.2295));
  CHECK(hacked.mean_dark() == doctest::Approx(2.4e-4));

  const auto nominal = default_nominal_pair();
  CHECK(nominal.d0_curve.center_ns == 0.0);
  CHECK(nominal.d1_curve.center_ns == 0.0);
  CHECK(nominal.d0_curve.sigma_left_ns == nominal.d0_curve.sigma_right_ns);
  CHECK(nominal.d1_curve.sigma_left_ns == nominal.d1_curve.sigma_right_ns);
}

TEST_CASE("validation rejects malformed curves") {
  EfficiencyCurve bad{1.5, 0.0, 0.4, 0.4};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {0.1, 0.0, 0.0, 0.4};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  DetectorParams dp{1.0, 0.0};
  CHECK_THROWS_AS(dp.validate(), std::invalid_argument);
}
