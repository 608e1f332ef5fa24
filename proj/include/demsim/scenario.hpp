#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "demsim/calibration.hpp"
#include "demsim/detector.hpp"
#include "demsim/montecarlo.hpp"
#include "demsim/optimizer.hpp"

namespace demsim::scenario {

struct ScenarioParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Complete declarative experiment description. Defaults reproduce the
/// bundled reference scenario; loading a file overrides the given keys
/// and materializes every default into the manifest.
struct Scenario {
  std::uint64_t seed = 2;

  detector::DetectorPair detectors = detector::default_hacked_pair();

  // Line Length Measurement
  calibration::LlmConfig llm = calibration::default_llm_config();
  detector::DetectorPair llm_nominal_detectors =
      detector::default_nominal_pair();
  calibration::EveLlmStrategy llm_eve =
      calibration::EveLlmStrategy::phase_flip(0.0, +1);

  // Faked-state attack
  attack::AttackParams attack_params = {65.0, 21.0, {1.90, -1.32}};
  double eve_loss_factor = 1.0;

  optimizer::GridSpec grid;
  optimizer::RateTarget rate;
  optimizer::AbortModel abort;

  // Transmission sweep
  double sweep_t_min = 0.25;
  double sweep_t_max = 0.79;
  int sweep_t_steps = 12;

  // Appendix curve estimation
  double curve_scan_step_ns = 0.020;
  double curve_probe_fwhm_ns = 0.200;
  double curve_probe_mean_photons = 0.5;
  int curve_shots_per_point = 100'000;

  // Monte Carlo session
  montecarlo::SessionConfig session;

  // (mu0, mu1) points for the validation harness
  std::vector<std::pair<double, double>> validate_points = {
      {2.0, 25.0}, {10.0, 40.0}, {30.0, 60.0}, {65.0, 21.0}, {90.0, 110.0}};

  Scenario();
  void validate() const;
};

/// Parse a scenario file (JSON), starting from defaults. Throws
/// ScenarioParseError on malformed input or unknown keys.
Scenario load_scenario(const std::string& path);

/// Apply a "dotted.path=value" override to a scenario's JSON form.
Scenario apply_overrides(const Scenario& s,
                         const std::vector<std::string>& overrides);

/// Fully materialized JSON form (every field explicit).
std::string to_json_string(const Scenario& s);

/// FNV-1a digest of the canonical JSON form.
std::string digest(const Scenario& s);

/// Startup self-check of the default detector constraints: peak values,
/// mismatch ratio >= 20 at both attack times, and grid reachability of
/// the swept target rates. Throws std::logic_error on violation.
void verify_default_constraints();

}  // namespace demsim::scenario
