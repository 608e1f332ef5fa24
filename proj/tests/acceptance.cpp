// Acceptance gate: one line per criterion, PASS/FAIL, nonzero exit on
// any failure. Every tolerance is pinned here, in code.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "demsim/attack.hpp"
#include "demsim/calibration.hpp"
#include "demsim/detector.hpp"
#include "demsim/montecarlo.hpp"
#include "demsim/optimizer.hpp"
#include "demsim/rng.hpp"
#include "demsim/scenario.hpp"

using namespace demsim;

namespace {

int failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("%s  criterion %d  %-28s %s\n", ok ? "PASS" : "FAIL", idx, name,
              detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

attack::EtaMatrix default_etas() {
  return attack::eta_matrix_for(detector::default_hacked_pair(),
                                {1.90, -1.32});
}

std::vector<double> sweep_grid() {
  std::vector<double> ts;
  for (int i = 0; i < 12; ++i) ts.push_back(0.79 + i * (0.25 - 0.79) / 11.0);
  return ts;
}

void criterion1_dark_floor() {
  const double d = 2.4e-4;
  const auto o = attack::observables({0.0, 0.0, {1.90, -1.32}},
                                     attack::EtaMatrix{0.1, 0.2, 0.3, 0.4}, d);
  const double err = std::max(std::abs(o.p0 - d), std::abs(o.p1 - d));
  report(1, "dark-floor identity", err <= 1e-15,
         fmt("max |p - d| = %.2e (limit 1e-15)", err));
}

void criterion2_closed_form_vs_mc() {
  const scenario::Scenario s;
  montecarlo::SessionConfig cfg = s.session;
  cfg.n_pulses = 1'000'000;
  const auto rep = montecarlo::validate_closed_forms(s.validate_points, cfg);
  double zmax = 0.0;
  for (const auto& r : rep.rows)
    zmax = std::max({zmax, std::abs(r.z_p0), std::abs(r.z_p1),
                     std::abs(r.z_p_double), std::abs(r.z_qber)});
  report(2, "closed form vs sessions", zmax <= 3.0,
         fmt("5 points x 1e6 pulses, max |z| = %.2f (limit 3)", zmax));
}

void criterion3_induced_shift() {
  const scenario::Scenario s;
  const auto pair = s.llm_nominal_detectors;

  const auto base = calibration::run_llm(
      s.llm, pair, calibration::EveLlmStrategy::absent(), s.seed);
  const auto hack = calibration::run_llm(
      s.llm, pair, calibration::EveLlmStrategy::phase_flip(0.0, +1),
      s.seed + 1);
  const double shift = calibration::induced_shift(hack, base);
  const bool noiseless_ok = std::abs(shift - 0.459) <= 0.050;

  calibration::LlmConfig jitter_cfg = s.llm;
  jitter_cfg.jitter_sigma_ns = 0.1;
  std::vector<double> shifts;
  for (int i = 0; i < 50; ++i) {
    const auto b = calibration::run_llm(
        jitter_cfg, pair, calibration::EveLlmStrategy::absent(),
        1000 + 2 * i);
    const auto h = calibration::run_llm(
        jitter_cfg, pair, calibration::EveLlmStrategy::phase_flip(0.0, +1),
        1001 + 2 * i);
    shifts.push_back(calibration::induced_shift(h, b));
  }
  double mean = 0.0;
  for (double v : shifts) mean += v;
  mean /= static_cast<double>(shifts.size());
  double var = 0.0;
  for (double v : shifts) var += (v - mean) * (v - mean);
  var /= static_cast<double>(shifts.size() - 1);
  const double se = std::sqrt(var / static_cast<double>(shifts.size()));
  const bool jitter_ok = std::abs(mean - 0.459) <= 3.0 * se;

  report(3, "induced 459 ps separation", noiseless_ok && jitter_ok,
         fmt("shift = %.4f ns; 50-run jittered mean = %.4f +- %.4f ns", shift,
             mean, se));
}

void criterion4_countermeasure() {
  const scenario::Scenario s;
  calibration::LlmConfig cfg = s.llm;
  cfg.policy = calibration::BobPhasePolicy::RandomZeroPi;
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto base = calibration::run_llm(
        cfg, s.llm_nominal_detectors, calibration::EveLlmStrategy::absent(),
        seed);
    const auto hack = calibration::run_llm(
        cfg, s.llm_nominal_detectors,
        calibration::EveLlmStrategy::phase_flip(0.0, +1), 100 + seed);
    const double shift =
        std::abs(calibration::induced_shift(hack, base));
    worst = std::max(worst, shift);
    ok = ok && shift <= cfg.scan_step_ns;
  }
  report(4, "random 0/pi countermeasure", ok,
         fmt("20 seeds, max |shift| = %.4f ns (limit %.3f)", worst,
             cfg.scan_step_ns));
}

void criterion5_success_envelope() {
  const auto records = optimizer::sweep_transmission(
      sweep_grid(), optimizer::RateTarget{}, optimizer::GridSpec{},
      default_etas(), 2.4e-4, optimizer::AbortModel{});
  bool ok = true;
  double worst_qber = 0.0;
  for (const auto& r : records) {
    ok = ok && r.optimum.feasible && r.optimum.qber < 0.07 &&
         r.optimum.qber < r.threshold;
    worst_qber = std::max(worst_qber, r.optimum.qber);
  }
  report(5, "attack success envelope", ok,
         fmt("T in [0.25, 0.79], 12 points, max QBER = %.4f (limit 0.07 and "
             "abort threshold)",
             worst_qber));
}

void criterion6_ideal_limit() {
  const double q_default = attack::ideal_fsa_qber(default_etas());
  const double q_uniform =
      attack::ideal_fsa_qber(attack::EtaMatrix{0.1, 0.1, 0.1, 0.1});
  const bool ok = q_default < 0.005 && std::abs(q_uniform - 0.5) <= 1e-12;
  report(6, "ideal single-photon limit", ok,
         fmt("default = %.5f (< 0.005); uniform = %.12f (= 0.5)", q_default,
             q_uniform));
}

void criterion7_double_click_form() {
  SplitMix64 rng(424242);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const attack::EtaMatrix etas{
        0.05 * rng.next_double(), 0.05 * rng.next_double(),
        0.05 * rng.next_double(), 0.05 * rng.next_double()};
    const attack::AttackParams p{1.0 + 99.0 * rng.next_double(),
                                 1.0 + 119.0 * rng.next_double(),
                                 {1.90, -1.32}};
    const double d = 1e-3 * rng.next_double();
    const auto a = attack::observables(p, etas, d);
    const auto b = attack::enumerated_observables(p, etas, d);
    const double scale =
        std::max({std::abs(a.p_double), std::abs(b.p_double), 1e-300});
    worst = std::max(worst, std::abs(a.p_double - b.p_double) / scale);
  }
  report(7, "double-click closed form", worst <= 1e-12,
         fmt("100 random draws, max rel diff = %.2e (limit 1e-12)", worst));
}

void criterion8_curve_estimation() {
  const auto pair = detector::default_hacked_pair();
  const auto probe = optics::make_pulse(0.0, 0.200, 0.5);
  const auto est = calibration::estimate_efficiency_curves(pair, probe, 0.020,
                                                           100'000, 2);
  const auto fit0 = calibration::fit_curve_peak(
      est.d0, est.probe_sigma_ns, est.probe_mean_photons,
      pair.d0_params.dark_count);
  const auto fit1 = calibration::fit_curve_peak(
      est.d1, est.probe_sigma_ns, est.probe_mean_photons,
      pair.d1_params.dark_count);
  const double pos_err = std::max(
      std::abs(fit0.center_ns - pair.d0_curve.center_ns),
      std::abs(fit1.center_ns - pair.d1_curve.center_ns));
  const double val_err = std::max(
      std::abs(fit0.peak - pair.d0_curve.peak) / pair.d0_curve.peak,
      std::abs(fit1.peak - pair.d1_curve.peak) / pair.d1_curve.peak);
  report(8, "gate curve estimation", pos_err <= 0.020 && val_err <= 0.05,
         fmt("peak position err = %.4f ns (limit 0.020); peak value err = "
             "%.3f%% (limit 5%%)",
             pos_err, 100.0 * val_err));
}

void criterion9_overall_rate_footnote() {
  const auto etas = default_etas();
  const auto tuples =
      optimizer::scan_grid(optimizer::GridSpec{}, etas, 2.4e-4);
  bool ok = true;
  double margin = 1e9;
  for (double T : sweep_grid()) {
    optimizer::RateTarget both;
    both.transmission = T;
    optimizer::RateTarget overall = both;
    overall.overall_only = true;
    const auto b = optimizer::min_qber_at_rates(tuples, both);
    const auto o = optimizer::min_qber_at_rates(tuples, overall);
    ok = ok && b.feasible && o.feasible && o.qber <= b.qber + 1e-15;
    margin = std::min(margin, b.qber - o.qber);
  }
  report(9, "overall-rate relaxation", ok,
         fmt("min(QBER_both - QBER_overall) = %.2e (must be >= 0)", margin));
}

}  // namespace

int main() {
  criterion1_dark_floor();
  criterion2_closed_form_vs_mc();
  criterion3_induced_shift();
  criterion4_countermeasure();
  criterion5_success_envelope();
  criterion6_ideal_limit();
  criterion7_double_click_form();
  criterion8_curve_estimation();
  criterion9_overall_rate_footnote();
  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
