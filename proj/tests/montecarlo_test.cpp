#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "demsim/attack.hpp"
#include "demsim/montecarlo.hpp"

using namespace demsim;
using namespace demsim::montecarlo;

namespace {

SessionConfig base_config() {
  SessionConfig cfg;
  cfg.pair = detector::default_hacked_pair();
  cfg.attack_params = {65.0, 21.0, {1.90, -1.32}};
  cfg.seed = 2;
  return cfg;
}

}  // namespace

TEST_CASE("sessions are deterministic for a fixed seed") {
  SessionConfig cfg = base_config();
  cfg.n_pulses = 50'000;
  cfg.attack = AttackMode::Fsa;
  const auto a = simulate_session(cfg);
  const auto b = simulate_session(cfg);
  CHECK(a.sifted == b.sifted);
  CHECK(a.clicks_d0 == b.clicks_d0);
  CHECK(a.clicks_d1 == b.clicks_d1);
  CHECK(a.errors == b.errors);
  cfg.seed = 3;
  const auto c = simulate_session(cfg);
  CHECK(a.clicks_d0 != c.clicks_d0);
}

TEST_CASE("dark-only session matches the dark rates") {
  SessionConfig cfg = base_config();
  cfg.alice_mu = 0.0;
  cfg.n_pulses = 400'000;
  const auto s = simulate_session(cfg);
  const double d = 2.4e-4;
  const double n = static_cast<double>(s.sifted);
  const double sigma = std::sqrt(d * (1.0 - d) / n);
  CHECK(std::abs(s.empirical_p0 - d) < 3.0 * sigma);
  CHECK(std::abs(s.empirical_p1 - d) < 3.0 * sigma);
}

TEST_CASE("attack-off defaults sit near the baseline click rates") {
  SessionConfig cfg = base_config();
  cfg.n_pulses = 1'000'000;
  const auto s = simulate_session(cfg);
  CHECK(s.empirical_p0 == doctest::Approx(0.038).epsilon(0.05));
  CHECK(s.empirical_p1 == doctest::Approx(0.032).epsilon(0.05));
}

TEST_CASE("faked-state session matches the closed forms within 3 sigma") {
  SessionConfig cfg = base_config();
  cfg.attack = AttackMode::Fsa;
  cfg.n_pulses = 1'000'000;
  const auto s = simulate_session(cfg);
  const auto etas = attack::eta_matrix_for(cfg.pair, cfg.attack_params.timing);
  const auto o =
      attack::observables(cfg.attack_params, etas, cfg.pair.mean_dark());

  const double n = static_cast<double>(s.sifted);
  auto within = [n](double emp, double ana) {
    return std::abs(emp - ana) < 3.0 * std::sqrt(ana * (1.0 - ana) / n);
  };
  CHECK(within(s.empirical_p0, o.p0));
  CHECK(within(s.empirical_p1, o.p1));
  const double narr = static_cast<double>(s.arrivals);
  CHECK(std::abs(s.empirical_qber - o.qber) <
        3.0 * std::sqrt(o.qber * (1.0 - o.qber) / narr));
}

TEST_CASE("validation harness agrees on the default point set") {
  SessionConfig cfg = base_config();
  cfg.n_pulses = 200'000;
  const auto report = validate_closed_forms(
      {{2.0, 25.0}, {30.0, 60.0}, {65.0, 21.0}}, cfg);
  CHECK_FALSE(report.any_flagged);
  CHECK(report.rows.size() == 3);
}

TEST_CASE("perturbed analytics are flagged by the harness") {
  SessionConfig cfg = base_config();
  cfg.n_pulses = 200'000;
  const auto report = validate_closed_forms(
      {{2.0, 25.0}, {30.0, 60.0}, {65.0, 21.0}}, cfg, 10.0);
  CHECK(report.any_flagged);
  for (const auto& r : report.rows) CHECK(r.flagged);
}

TEST_CASE("underpowered runs widen sigma instead of flagging") {
  SessionConfig cfg = base_config();
  cfg.n_pulses = 100;
  const auto report = validate_closed_forms(
      {{2.0, 25.0}, {30.0, 60.0}, {65.0, 21.0}}, cfg);
  CHECK_FALSE(report.any_flagged);
  for (const auto& r : report.rows) CHECK(r.low_power);
}

TEST_CASE("validation needs at least three points") {
  SessionConfig cfg = base_config();
  CHECK_THROWS_AS(validate_closed_forms({{2.0, 25.0}}, cfg),
                  std::invalid_argument);
}

TEST_CASE("session config validation") {
  SessionConfig cfg = base_config();
  cfg.n_pulses = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config();
  cfg.transmission = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config();
  cfg.visibility = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("reduced visibility produces attack-off errors") {
  SessionConfig cfg = base_config();
  cfg.n_pulses = 300'000;
  cfg.visibility = 0.9;
  const auto s = simulate_session(cfg);
  // (1-V)/2 = 5% of the light reaches the wrong detector
  CHECK(s.empirical_qber > 0.02);
  CHECK(s.empirical_qber < 0.08);
}
