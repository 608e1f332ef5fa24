#include "demsim/optics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace demsim::optics {

namespace {
constexpr double kFwhmToSigma = 2.3548200450309493;  // 2*sqrt(2*ln 2)
}

double OpticalPulse::envelope(double t_ns) const {
  if (mean_photons == 0.0) return 0.0;
  const double z = (t_ns - center_ns) / width_sigma_ns;
  const double norm =
      mean_photons / (width_sigma_ns * std::sqrt(2.0 * std::numbers::pi));
  return norm * std::exp(-0.5 * z * z);
}

double PhasePattern::phase_at(double t_ns) const {
  if (segments.empty()) return 0.0;
  double phase = segments.front().phase_rad;
  for (const auto& seg : segments) {
    if (t_ns >= seg.start_ns) phase = seg.phase_rad;
    else break;
  }
  return phase;
}

PhasePattern PhasePattern::constant(double phase_rad) {
  return PhasePattern{{{-1e30, phase_rad}}};
}

PhasePattern PhasePattern::shifted(double dt_ns) const {
  PhasePattern out = *this;
  for (auto& seg : out.segments) seg.start_ns += dt_ns;
  return out;
}

OpticalPulse make_pulse(double center_ns, double fwhm_ns,
                        double mean_photons) {
  if (!(fwhm_ns > 0.0))
    throw std::invalid_argument("make_pulse: fwhm must be positive");
  if (!(mean_photons >= 0.0))
    throw std::invalid_argument("make_pulse: mean_photons must be >= 0");
  return OpticalPulse{center_ns, fwhm_ns / kFwhmToSigma, mean_photons};
}

PhasePattern eve_flip_pattern(double edge_time_ns, int polarity,
                              double offset_rad) {
  const double half_pi = std::numbers::pi / 2.0;
  const double lo = offset_rad - polarity * half_pi;
  const double hi = offset_rad + polarity * half_pi;
  return PhasePattern{{{-1e30, lo}, {edge_time_ns, hi}}};
}

PortIntensity interfere(const OpticalPulse& pulse, double bob_phase_rad,
                        const PhasePattern& eve_pattern,
                        const SampleGrid& grid) {
  if (grid.count <= 0 || !(grid.step_ns > 0.0))
    throw std::invalid_argument("interfere: empty sampling grid");
  PortIntensity out;
  out.grid = grid;
  out.d0_density.resize(grid.count);
  out.d1_density.resize(grid.count);
  for (int i = 0; i < grid.count; ++i) {
    const double t = grid.time_at(i);
    const double env = pulse.envelope(t);
    const double dphi = bob_phase_rad - eve_pattern.phase_at(t);
    const double c = std::cos(dphi / 2.0);
    const double w0 = c * c;
    out.d0_density[i] = env * w0;
    out.d1_density[i] = env * (1.0 - w0);
  }
  return out;
}

SampleGrid grid_around(const OpticalPulse& pulse, double span_ns,
                       double step_ns) {
  const int n = static_cast<int>(std::ceil(2.0 * span_ns / step_ns)) + 1;
  return SampleGrid{pulse.center_ns - span_ns, step_ns, n};
}

}  // namespace demsim::optics
