#pragma once

namespace demsim::detector {

/// Two-sided Gaussian detection efficiency: peak at `center_ns`, width
/// sigma_left_ns below the center and sigma_right_ns above it.
struct EfficiencyCurve {
  double peak = 0.0;
  double center_ns = 0.0;
  double sigma_left_ns = 0.0;
  double sigma_right_ns = 0.0;

  double value(double t_ns) const;
  void validate() const;  // throws std::invalid_argument
};

struct DetectorParams {
  double dark_count = 0.0;   // probability per gate
  double gate_delay_ns = 0.0;

  void validate() const;
};

struct DetectorPair {
  EfficiencyCurve d0_curve, d1_curve;
  DetectorParams d0_params, d1_params;

  void validate() const;
  double eta0(double t_ns) const;  // includes gate delay
  double eta1(double t_ns) const;
  double mean_dark() const;
};

/// Efficiency at time t for a gate shifted by gate_delay.
double efficiency_at(const EfficiencyCurve& curve, double t_ns,
                     double gate_delay_ns);

/// Click probability of a gated detector seeing effective mean photon
/// number mu_eff at efficiency eta with dark count probability dark:
/// dark + (1-dark)(1 - exp(-mu_eff*eta)). Any basis-splitting factor
/// must already be folded into mu_eff by the caller.
double click_probability(double mu_eff, double eta, double dark);

/// log10(eta0(t)/eta1(t)) for the pair, gate delays included. A blind
/// detector (efficiency exactly zero) yields the IEEE signed infinity
/// marker (+inf when D1 is blind, -inf when D0 is), and NaN when both
/// are blind.
double mismatch_ratio(const DetectorPair& pair, double t_ns);

/// Post-hack detector pair: curve centers displaced by +-229.5 ps
/// (the 459 ps induced separation, D0 late / D1 early).
DetectorPair default_hacked_pair();

/// Pre-hack pair as the calibration routine sees it: same peaks and
/// dark counts, symmetric widths, both curves centered at the gate.
DetectorPair default_nominal_pair();

}  // namespace demsim::detector
