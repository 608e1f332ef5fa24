#pragma once

#include <cstdint>
#include <vector>

#include "demsim/attack.hpp"
#include "demsim/detector.hpp"

namespace demsim::montecarlo {

enum class AttackMode { Off, Fsa };

struct SessionConfig {
  std::int64_t n_pulses = 1'000'000;
  double alice_mu = 2.07;         // signal mean photon number at Alice's exit
  double transmission = 1.0;      // channel T
  double bob_loss_db = 3.0;       // internal losses in Bob's apparatus
  double visibility = 1.0;        // baseline interference visibility
  double eve_loss_factor = 1.0;   // scales Eve's resend brightness
  AttackMode attack = AttackMode::Off;
  attack::AttackParams attack_params;
  detector::DetectorPair pair;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SiftedKeyStats {
  std::int64_t sifted = 0;
  std::int64_t clicks_d0 = 0;
  std::int64_t clicks_d1 = 0;
  std::int64_t doubles = 0;
  std::int64_t arrivals = 0;  // clicks_d0 + clicks_d1 - doubles
  std::int64_t errors = 0;
  double empirical_p0 = 0.0;   // clicks_d0 / sifted
  double empirical_p1 = 0.0;
  double empirical_p_double = 0.0;
  double empirical_qber = 0.0; // errors / arrivals
};

/// Pulse-by-pulse BB84 session with optional faked-state attack. Random
/// streams are split per pulse index, so results are independent of
/// evaluation order. Deterministic for a given config.
SiftedKeyStats simulate_session(const SessionConfig& cfg);

struct ValidationRow {
  double mu0 = 0.0, mu1 = 0.0;
  double z_p0 = 0.0, z_p1 = 0.0, z_p_double = 0.0, z_qber = 0.0;
  double analytic_p0 = 0.0, analytic_p1 = 0.0, analytic_p_double = 0.0,
         analytic_qber = 0.0;
  double empirical_p0 = 0.0, empirical_p1 = 0.0, empirical_p_double = 0.0,
         empirical_qber = 0.0;
  bool flagged = false;     // any |z| > 3
  bool low_power = false;   // too few expected counts for a useful z
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  bool any_flagged = false;
};

/// Cross-validate the closed forms against sessions on a grid of
/// (mu0, mu1) points. `perturb_sigma` shifts the analytic p0 by that
/// many binomial sigmas (test hook for the harness self-check).
ValidationReport validate_closed_forms(
    const std::vector<std::pair<double, double>>& mu_points,
    const SessionConfig& base_cfg, double perturb_sigma = 0.0);

}  // namespace demsim::montecarlo
