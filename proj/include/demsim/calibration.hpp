#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "demsim/detector.hpp"
#include "demsim/optics.hpp"

namespace demsim::calibration {

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyncNotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BobPhasePolicy {
  UniformHalfPi,  // the usual pi/2 on every gate
  UniformZero,    // firmware variant: 0 on every gate
  RandomZeroPi,   // countermeasure: 0 or pi, random per gate
};

enum class PeakEstimator { Centroid, Argmax };

struct LlmConfig {
  double scan_min_ns = -3.0;
  double scan_max_ns = 3.0;
  double scan_step_ns = 0.05;
  optics::OpticalPulse bright_pulse;  // defaults set by default_llm_config()
  BobPhasePolicy policy = BobPhasePolicy::UniformHalfPi;
  PeakEstimator estimator = PeakEstimator::Centroid;
  int shots_per_point = 4000;
  double jitter_sigma_ns = 0.0;   // optional gate-timing jitter per run
  double sample_step_ns = 0.005;  // waveform integration grid
};

LlmConfig default_llm_config();

struct EveLlmStrategy {
  enum class Variant { Absent, PhaseFlip };
  Variant variant = Variant::Absent;
  double edge_time_ns = 0.0;
  int polarity = +1;
  double pattern_offset_rad = 0.0;

  static EveLlmStrategy absent() { return {}; }
  static EveLlmStrategy phase_flip(double edge_ns, int polarity,
                                   double offset_rad = 0.0) {
    return {Variant::PhaseFlip, edge_ns, polarity, offset_rad};
  }
};

struct LlmOutcome {
  double gate_delay_d0_ns = 0.0;
  double gate_delay_d1_ns = 0.0;
  double delta01_ns = 0.0;  // gate_delay_d0 - gate_delay_d1
  std::vector<double> scan_delays_ns;
  std::vector<std::int64_t> d0_counts;
  std::vector<std::int64_t> d1_counts;
};

/// Simulate one Line Length Measurement run: scan the gate delay,
/// sample per-point clicks, and locate each detector's peak. Throws
/// CalibrationError when no scan point rises above the dark floor.
/// Deterministic for a given seed.
LlmOutcome run_llm(const LlmConfig& cfg, const detector::DetectorPair& pair,
                   const EveLlmStrategy& eve, std::uint64_t seed);

/// Delta01 difference between a hacked and a baseline run.
double induced_shift(const LlmOutcome& hacked, const LlmOutcome& baseline);

/// Synchronize Eve's flip edge to the pulse center: evaluate the
/// interference visibility for each candidate edge delay and return the
/// delay of minimum visibility. Throws SyncNotFoundError when the scan
/// shows no modulation contrast.
double visibility_scan(const std::vector<double>& edge_delays_ns,
                       const optics::OpticalPulse& pulse,
                       double bob_phase_rad);

/// Visibility |integral envelope*cos(dphi)| / integral envelope for a
/// flip edge at the given delay.
double visibility_at(double edge_delay_ns, const optics::OpticalPulse& pulse,
                     double bob_phase_rad);

struct EstimatedCurve {
  std::vector<double> times_ns;   // probe delay scan positions
  std::vector<double> eta;        // (click mean - dark) / probe photons
};

struct EstimatedCurves {
  EstimatedCurve d0, d1;
  double probe_sigma_ns = 0.0;
  double probe_mean_photons = 0.0;
};

/// Appendix procedure: scan a weak probe across each detector gate,
/// average Bernoulli clicks per point, subtract the dark rate, divide
/// by the probe photon number. The samples estimate eta convolved with
/// the probe envelope.
EstimatedCurves estimate_efficiency_curves(const detector::DetectorPair& pair,
                                           const optics::OpticalPulse& probe,
                                           double step_ns,
                                           int shots_per_point,
                                           std::uint64_t seed);

struct CurvePeakFit {
  double peak = 0.0;        // broadening-corrected peak value
  double center_ns = 0.0;   // deconvolved peak position
  double sigma_left_ns = 0.0;
  double sigma_right_ns = 0.0;
  double residual = 0.0;    // fit RMS in eta units
};

/// Least-squares fit of the probe-broadened two-sided Gaussian model to
/// an estimated curve. Removes the broadening without deconvolving the
/// data: the model is forward-convolved analytically. When
/// probe_mean_photons > 0 the fit also models the Poissonian
/// saturation of the click estimator; dark is the per-gate dark count
/// used during estimation.
CurvePeakFit fit_curve_peak(const EstimatedCurve& curve,
                            double probe_sigma_ns,
                            double probe_mean_photons = 0.0,
                            double dark = 0.0);

/// Unit-peak two-sided Gaussian (sigma_l below 0, sigma_r above)
/// convolved with a Gaussian of width probe_sigma, evaluated at x.
double broadened_two_sided(double x, double sigma_l, double sigma_r,
                           double probe_sigma);

}  // namespace demsim::calibration
