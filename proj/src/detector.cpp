#include "demsim/detector.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace demsim::detector {

double EfficiencyCurve::value(double t_ns) const {
  const double s = t_ns < center_ns ? sigma_left_ns : sigma_right_ns;
  const double z = (t_ns - center_ns) / s;
  return peak * std::exp(-0.5 * z * z);
}

void EfficiencyCurve::validate() const {
  if (!(peak >= 0.0 && peak <= 1.0))
    throw std::invalid_argument("EfficiencyCurve: peak must be in [0,1]");
  if (!(sigma_left_ns > 0.0 && sigma_right_ns > 0.0))
    throw std::invalid_argument("EfficiencyCurve: sigmas must be positive");
}

void DetectorParams::validate() const {
  if (!(dark_count >= 0.0 && dark_count < 1.0))
    throw std::invalid_argument("DetectorParams: dark_count must be in [0,1)");
}

void DetectorPair::validate() const {
  d0_curve.validate();
  d1_curve.validate();
  d0_params.validate();
  d1_params.validate();
}

double DetectorPair::eta0(double t_ns) const {
  return efficiency_at(d0_curve, t_ns, d0_params.gate_delay_ns);
}

double DetectorPair::eta1(double t_ns) const {
  return efficiency_at(d1_curve, t_ns, d1_params.gate_delay_ns);
}

double DetectorPair::mean_dark() const {
  return 0.5 * (d0_params.dark_count + d1_params.dark_count);
}

double efficiency_at(const EfficiencyCurve& curve, double t_ns,
                     double gate_delay_ns) {
  return curve.value(t_ns - gate_delay_ns);
}

double click_probability(double mu_eff, double eta, double dark) {
  if (!(mu_eff >= 0.0))
    throw std::invalid_argument("click_probability: mu_eff must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("click_probability: eta must be in [0,1]");
  if (!(dark >= 0.0 && dark < 1.0))
    throw std::invalid_argument("click_probability: dark must be in [0,1)");
  return dark + (1.0 - dark) * -std::expm1(-mu_eff * eta);
}

double mismatch_ratio(const DetectorPair& pair, double t_ns) {
  const double e0 = pair.eta0(t_ns);
  const double e1 = pair.eta1(t_ns);
  if (e0 == 0.0 && e1 == 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  if (e1 == 0.0) return std::numeric_limits<double>::infinity();
  if (e0 == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log10(e0 / e1);
}

namespace {
constexpr double kDark = 2.4e-4;      // d = mean(d0,d1), equal split
constexpr double kHalfShift = 0.2295; // half of the 459 ps separation
}

DetectorPair default_hacked_pair() {
  DetectorPair p;
  p.d0_curve = {0.076, +kHalfShift, 0.35, 0.70};
  p.d1_curve = {0.064, -kHalfShift, 0.4255, 0.45};
  p.d0_params = {kDark, 0.0};
  p.d1_params = {kDark, 0.0};
  return p;
}

DetectorPair default_nominal_pair() {
  DetectorPair p;
  p.d0_curve = {0.076, 0.0, 0.525, 0.525};
  p.d1_curve = {0.064, 0.0, 0.44, 0.44};
  p.d0_params = {kDark, 0.0};
  p.d1_params = {kDark, 0.0};
  return p;
}

}  // namespace demsim::detector
