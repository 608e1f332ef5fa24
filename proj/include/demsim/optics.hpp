#pragma once

#include <vector>

namespace demsim::optics {

/// Gaussian-envelope optical pulse. The envelope integrates to
/// `mean_photons`, so envelope(t) has units of photons/ns.
struct OpticalPulse {
  double center_ns = 0.0;
  double width_sigma_ns = 0.0;
  double mean_photons = 0.0;

  double envelope(double t_ns) const;
};

/// Piecewise-constant phase modulation. Each segment's phase holds from
/// its start time until the next segment; the first segment extends to
/// minus infinity (its start time is only informative).
struct PhaseSegment {
  double start_ns;
  double phase_rad;
};

struct PhasePattern {
  std::vector<PhaseSegment> segments;  // start times strictly increasing

  double phase_at(double t_ns) const;
  static PhasePattern constant(double phase_rad);
  PhasePattern shifted(double dt_ns) const;
};

/// Uniform sampling grid.
struct SampleGrid {
  double start_ns = 0.0;
  double step_ns = 0.0;
  int count = 0;

  double time_at(int i) const { return start_ns + step_ns * i; }
};

/// Two-port interference result sampled on a grid. Densities are
/// photons/ns and sum pointwise to the input pulse envelope.
struct PortIntensity {
  SampleGrid grid;
  std::vector<double> d0_density;
  std::vector<double> d1_density;
};

/// Build a pulse from its FWHM. Throws std::invalid_argument on
/// non-positive fwhm or negative mean photon number.
OpticalPulse make_pulse(double center_ns, double fwhm_ns, double mean_photons);

/// Eve's calibration hack: a single phase flip from -polarity*pi/2 to
/// +polarity*pi/2 at edge_time. `offset_rad` shifts both levels (the
/// firmware-variant pattern 0 -> pi corresponds to offset pi/2).
PhasePattern eve_flip_pattern(double edge_time_ns, int polarity,
                              double offset_rad = 0.0);

/// Two-port interference at the 50:50 beam splitter. With relative
/// phase dphi(t) = bob_phase - eve_phase(t), D0 takes cos^2(dphi/2) of
/// the envelope and D1 the rest.
PortIntensity interfere(const OpticalPulse& pulse, double bob_phase_rad,
                        const PhasePattern& eve_pattern,
                        const SampleGrid& grid);

/// Grid covering +-span around the pulse center.
SampleGrid grid_around(const OpticalPulse& pulse, double span_ns,
                       double step_ns = 0.005);

}  // namespace demsim::optics
