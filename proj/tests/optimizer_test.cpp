#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "demsim/detector.hpp"
#include "demsim/optimizer.hpp"

using namespace demsim;
using namespace demsim::optimizer;

namespace {

const attack::AttackTiming kTiming{1.90, -1.32};

attack::EtaMatrix default_etas() {
  return attack::eta_matrix_for(detector::default_hacked_pair(), kTiming);
}

std::vector<double> default_t_grid() {
  std::vector<double> ts;
  for (int i = 0; i < 12; ++i) ts.push_back(0.79 + i * (0.25 - 0.79) / 11.0);
  return ts;
}

}  // namespace

TEST_CASE("grid cardinality and ordering") {
  GridSpec g;
  g.steps = 2;
  const auto tuples = scan_grid(g, default_etas(), 2.4e-4);
  REQUIRE(tuples.size() == 4);
  // row-major: mu0 constant across the first inner row
  CHECK(tuples[0].mu0 == tuples[1].mu0);
  CHECK(tuples[0].mu1 < tuples[1].mu1);
  CHECK(tuples[0].mu0 < tuples[2].mu0);
}

TEST_CASE("near-zero brightness corner sits on the dark floor") {
  GridSpec g;
  g.mu0_min = 1e-9;
  g.mu1_min = 1e-9;
  g.steps = 2;
  const double d = 2.4e-4;
  const auto tuples = scan_grid(g, default_etas(), d);
  CHECK(tuples[0].p0 == doctest::Approx(d).epsilon(1e-6));
  CHECK(tuples[0].p1 == doctest::Approx(d).epsilon(1e-6));
}

TEST_CASE("infinite tolerance returns the global minimum") {
  const auto tuples = scan_grid(GridSpec{}, default_etas(), 2.4e-4);
  RateTarget t;
  t.tolerance = 1e18;
  const auto best = min_qber_at_rates(tuples, t);
  REQUIRE(best.feasible);
  for (const auto& tup : tuples) CHECK(best.qber <= tup.qber);
}

TEST_CASE("unreachable targets are infeasible, not an error") {
  const auto tuples = scan_grid(GridSpec{}, default_etas(), 2.4e-4);
  RateTarget t;
  t.baseline_p0 = 0.9;
  t.baseline_p1 = 0.9;
  t.tolerance = 0.01;
  CHECK_FALSE(min_qber_at_rates(tuples, t).feasible);
}

TEST_CASE("empty tuple set is rejected") {
  CHECK_THROWS_AS(min_qber_at_rates({}, RateTarget{}), std::invalid_argument);
}

TEST_CASE("half transmission admits a sub-7% optimum") {
  const auto tuples = scan_grid(GridSpec{}, default_etas(), 2.4e-4);
  RateTarget t;
  t.transmission = 0.5;
  const auto best = min_qber_at_rates(tuples, t);
  REQUIRE(best.feasible);
  CHECK(best.qber < 0.07);
}

TEST_CASE("abort threshold anchors and interpolation") {
  const AbortModel m;
  bool clamped = true;
  CHECK(abort_threshold(m, 1.0, &clamped) == doctest::Approx(0.0594));
  CHECK_FALSE(clamped);
  CHECK(abort_threshold(m, 6.0, &clamped) == doctest::Approx(0.0826));
  CHECK_FALSE(clamped);
  CHECK(abort_threshold(m, 3.5, &clamped) ==
        doctest::Approx(0.0710).epsilon(1e-12));
  CHECK_FALSE(clamped);

  CHECK(abort_threshold(m, 0.5, &clamped) == doctest::Approx(0.0594));
  CHECK(clamped);
  CHECK(abort_threshold(m, 7.0, &clamped) == doctest::Approx(0.0826));
  CHECK(clamped);
}

TEST_CASE("transmission sweep succeeds across the documented range") {
  const auto records = sweep_transmission(default_t_grid(), RateTarget{},
                                          GridSpec{}, default_etas(), 2.4e-4,
                                          AbortModel{});
  REQUIRE(records.size() == 12);
  for (const auto& r : records) {
    CHECK(r.optimum.feasible);
    CHECK(r.optimum.qber < 0.07);
    CHECK(r.optimum.qber < r.threshold);
    CHECK(r.attack_succeeds);
    CHECK(r.loss_db ==
          doctest::Approx(-10.0 * std::log10(r.transmission)).epsilon(1e-12));
  }
}

TEST_CASE("monotone violations are reported, not hidden") {
  const auto records = sweep_transmission(default_t_grid(), RateTarget{},
                                          GridSpec{}, default_etas(), 2.4e-4,
                                          AbortModel{});
  for (std::size_t i = 1; i < records.size(); ++i) {
    const bool rose =
        records[i].optimum.qber > records[i - 1].optimum.qber + 1e-15;
    CHECK(records[i].monotone_violation == rose);
  }
}

TEST_CASE("overall-rate-only constraint never does worse") {
  const auto etas = default_etas();
  for (double T : default_t_grid()) {
    RateTarget both;
    both.transmission = T;
    RateTarget overall = both;
    overall.overall_only = true;
    const auto tuples = scan_grid(GridSpec{}, etas, 2.4e-4);
    const auto b = min_qber_at_rates(tuples, both);
    const auto o = min_qber_at_rates(tuples, overall);
    REQUIRE(b.feasible);
    REQUIRE(o.feasible);
    CHECK(o.qber <= b.qber + 1e-15);
  }
}

TEST_CASE("grid spec validation") {
  GridSpec g;
  g.steps = 1;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = GridSpec{};
  g.mu0_min = -1.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = GridSpec{};
  g.mu1_max = g.mu1_min;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("sweep rejects out-of-range transmission") {
  CHECK_THROWS_AS(sweep_transmission({1.5}, RateTarget{}, GridSpec{},
                                     default_etas(), 2.4e-4, AbortModel{}),
                  std::invalid_argument);
}
