#include "demsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "demsim/rng.hpp"

namespace demsim::calibration {

namespace {

constexpr double kPi = std::numbers::pi;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Binomial sample: exact Bernoulli loop in the low-count regime, normal
// approximation where it is statistically indistinguishable for our
// purposes.
std::int64_t sample_binomial(SplitMix64& rng, std::int64_t n, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const double var = static_cast<double>(n) * p * (1.0 - p);
  if (var >= 100.0) {
    // Box-Muller
    const double u1 = rng.next_double();
    const double u2 = rng.next_double();
    const double z = std::sqrt(-2.0 * std::log(1.0 - u1)) *
                     std::cos(2.0 * kPi * u2);
    const double x = std::round(static_cast<double>(n) * p + std::sqrt(var) * z);
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(x), 0, n);
  }
  std::int64_t k = 0;
  for (std::int64_t i = 0; i < n; ++i)
    if (rng.next_double() < p) ++k;
  return k;
}

double sample_normal(SplitMix64& rng, double sigma) {
  const double u1 = rng.next_double();
  const double u2 = rng.next_double();
  return sigma * std::sqrt(-2.0 * std::log(1.0 - u1)) *
         std::cos(2.0 * kPi * u2);
}

double trapezoid_overlap(const optics::PortIntensity& ports, bool port1,
                         const detector::EfficiencyCurve& curve,
                         double gate_shift_ns) {
  const auto& dens = port1 ? ports.d1_density : ports.d0_density;
  const auto& grid = ports.grid;
  double sum = 0.0;
  for (int i = 0; i < grid.count; ++i) {
    const double w = (i == 0 || i == grid.count - 1) ? 0.5 : 1.0;
    sum += w * dens[i] * curve.value(grid.time_at(i) - gate_shift_ns);
  }
  return sum * grid.step_ns;
}

struct PhaseBranch {
  double probability;
  optics::PortIntensity ports;
};

// Port densities for every Bob phase the policy can apply.
std::vector<PhaseBranch> phase_branches(const LlmConfig& cfg,
                                        const EveLlmStrategy& eve) {
  optics::PhasePattern pattern;
  if (eve.variant == EveLlmStrategy::Variant::PhaseFlip) {
    pattern = optics::eve_flip_pattern(eve.edge_time_ns, eve.polarity,
                                       eve.pattern_offset_rad);
  } else {
    pattern = optics::PhasePattern::constant(0.0);
  }
  const double span =
      std::max(std::abs(cfg.scan_min_ns), std::abs(cfg.scan_max_ns)) +
      6.0 * cfg.bright_pulse.width_sigma_ns;
  const auto grid =
      optics::grid_around(cfg.bright_pulse, span, cfg.sample_step_ns);

  std::vector<double> phases;
  std::vector<double> probs;
  switch (cfg.policy) {
    case BobPhasePolicy::UniformHalfPi:
      phases = {kPi / 2.0};
      probs = {1.0};
      break;
    case BobPhasePolicy::UniformZero:
      phases = {0.0};
      probs = {1.0};
      break;
    case BobPhasePolicy::RandomZeroPi:
      phases = {0.0, kPi};
      probs = {0.5, 0.5};
      break;
  }
  std::vector<PhaseBranch> out;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    out.push_back(
        {probs[i],
         optics::interfere(cfg.bright_pulse, phases[i], pattern, grid)});
  }
  return out;
}

struct Histogram {
  std::vector<double> delays;
  std::vector<std::int64_t> counts;
};

double locate_peak(const Histogram& h, PeakEstimator estimator, double dark,
                   int shots) {
  const double expected_dark = shots * dark;
  const double floor =
      expected_dark + 5.0 * std::sqrt(shots * dark * (1.0 - dark)) + 3.0;
  if (estimator == PeakEstimator::Argmax) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < h.counts.size(); ++i)
      if (h.counts[i] > h.counts[best]) best = i;
    if (static_cast<double>(h.counts[best]) <= floor)
      throw CalibrationError("LLM failed: no clicks above the dark floor");
    return h.delays[best];
  }
  double wsum = 0.0, tsum = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double c = static_cast<double>(h.counts[i]);
    if (c <= floor) continue;
    const double w = c - expected_dark;
    wsum += w;
    tsum += w * h.delays[i];
  }
  if (wsum <= 0.0)
    throw CalibrationError("LLM failed: no clicks above the dark floor");
  return tsum / wsum;
}

}  // namespace

LlmConfig default_llm_config() {
  LlmConfig cfg;
  // Bright enough for ~0.9 peak click probability against the default
  // detector peaks, without flattening the histogram top.
  cfg.bright_pulse = optics::make_pulse(0.0, 0.677, 70.0);
  return cfg;
}

LlmOutcome run_llm(const LlmConfig& cfg, const detector::DetectorPair& pair,
                   const EveLlmStrategy& eve, std::uint64_t seed) {
  if (!(cfg.scan_step_ns > 0.0))
    throw std::invalid_argument("run_llm: scan_step must be positive");
  if (!(cfg.scan_max_ns > cfg.scan_min_ns))
    throw std::invalid_argument("run_llm: empty scan range");
  pair.validate();

  const auto branches = phase_branches(cfg, eve);
  const int n_points = static_cast<int>(std::floor(
                           (cfg.scan_max_ns - cfg.scan_min_ns) /
                               cfg.scan_step_ns + 1e-9)) + 1;

  LlmOutcome out;
  out.scan_delays_ns.resize(n_points);
  out.d0_counts.resize(n_points);
  out.d1_counts.resize(n_points);

  SplitMix64 rng(substream_seed(seed, 0xca11b7a7e));
  for (int i = 0; i < n_points; ++i) {
    const double g = cfg.scan_min_ns + i * cfg.scan_step_ns;
    out.scan_delays_ns[i] = g;
    for (int det = 0; det < 2; ++det) {
      const auto& curve = det == 0 ? pair.d0_curve : pair.d1_curve;
      const auto& params = det == 0 ? pair.d0_params : pair.d1_params;
      std::int64_t clicks = 0;
      std::int64_t shots_left = cfg.shots_per_point;
      double prob_left = 1.0;
      for (std::size_t b = 0; b < branches.size(); ++b) {
        const std::int64_t n =
            b + 1 == branches.size()
                ? shots_left
                : sample_binomial(rng, shots_left,
                                  branches[b].probability / prob_left);
        shots_left -= n;
        prob_left -= branches[b].probability;
        const double mu_eff = trapezoid_overlap(branches[b].ports, det == 1,
                                                curve,
                                                g + params.gate_delay_ns);
        const double p =
            detector::click_probability(mu_eff, 1.0, params.dark_count);
        clicks += sample_binomial(rng, n, p);
      }
      (det == 0 ? out.d0_counts : out.d1_counts)[i] = clicks;
    }
  }

  Histogram h0{out.scan_delays_ns, out.d0_counts};
  Histogram h1{out.scan_delays_ns, out.d1_counts};
  out.gate_delay_d0_ns = locate_peak(h0, cfg.estimator,
                                     pair.d0_params.dark_count,
                                     cfg.shots_per_point);
  out.gate_delay_d1_ns = locate_peak(h1, cfg.estimator,
                                     pair.d1_params.dark_count,
                                     cfg.shots_per_point);
  if (cfg.jitter_sigma_ns > 0.0) {
    out.gate_delay_d0_ns += sample_normal(rng, cfg.jitter_sigma_ns);
    out.gate_delay_d1_ns += sample_normal(rng, cfg.jitter_sigma_ns);
  }
  out.delta01_ns = out.gate_delay_d0_ns - out.gate_delay_d1_ns;
  return out;
}

double induced_shift(const LlmOutcome& hacked, const LlmOutcome& baseline) {
  return hacked.delta01_ns - baseline.delta01_ns;
}

double visibility_at(double edge_delay_ns, const optics::OpticalPulse& pulse,
                     double bob_phase_rad) {
  const auto pattern = optics::eve_flip_pattern(edge_delay_ns, +1);
  const auto grid = optics::grid_around(pulse, 6.0 * pulse.width_sigma_ns);
  double num = 0.0, den = 0.0;
  // Midpoint rule: keeps samples off the flip edge itself, so the
  // antisymmetric integrand cancels exactly for a centered edge.
  for (int i = 0; i + 1 < grid.count; ++i) {
    const double t = grid.time_at(i) + 0.5 * grid.step_ns;
    const double env = pulse.envelope(t);
    num += env * std::cos(bob_phase_rad - pattern.phase_at(t));
    den += env;
  }
  if (den <= 0.0) return 1.0;
  return std::abs(num) / den;
}

double visibility_scan(const std::vector<double>& edge_delays_ns,
                       const optics::OpticalPulse& pulse,
                       double bob_phase_rad) {
  if (edge_delays_ns.empty())
    throw std::invalid_argument("visibility_scan: no candidate delays");
  double vmin = 2.0, vmax = -1.0, best = edge_delays_ns.front();
  for (double d : edge_delays_ns) {
    const double v = visibility_at(d, pulse, bob_phase_rad);
    if (v < vmin) {
      vmin = v;
      best = d;
    }
    vmax = std::max(vmax, v);
  }
  if (vmax - vmin < 1e-6)
    throw SyncNotFoundError(
        "visibility_scan: flat visibility, no modulation overlap");
  return best;
}

EstimatedCurves estimate_efficiency_curves(const detector::DetectorPair& pair,
                                           const optics::OpticalPulse& probe,
                                           double step_ns,
                                           int shots_per_point,
                                           std::uint64_t seed) {
  if (!(step_ns > 0.0))
    throw std::invalid_argument("estimate_efficiency_curves: bad step");
  if (shots_per_point < 1)
    throw std::invalid_argument("estimate_efficiency_curves: bad shots");
  pair.validate();

  // Scan span wide enough to cover both gates with margin.
  const double lo = std::min(pair.d0_curve.center_ns + pair.d0_params.gate_delay_ns -
                                 5.0 * pair.d0_curve.sigma_left_ns,
                             pair.d1_curve.center_ns + pair.d1_params.gate_delay_ns -
                                 5.0 * pair.d1_curve.sigma_left_ns);
  const double hi = std::max(pair.d0_curve.center_ns + pair.d0_params.gate_delay_ns +
                                 5.0 * pair.d0_curve.sigma_right_ns,
                             pair.d1_curve.center_ns + pair.d1_params.gate_delay_ns +
                                 5.0 * pair.d1_curve.sigma_right_ns);
  const int n_points =
      static_cast<int>(std::floor((hi - lo) / step_ns + 1e-9)) + 1;

  const double mu = probe.mean_photons;
  EstimatedCurves out;
  out.probe_sigma_ns = probe.width_sigma_ns;
  out.probe_mean_photons = mu;

  SplitMix64 rng(substream_seed(seed, 0xe57c0e5));
  const auto grid = optics::grid_around(probe, 6.0 * probe.width_sigma_ns);
  for (int det = 0; det < 2; ++det) {
    const auto& curve = det == 0 ? pair.d0_curve : pair.d1_curve;
    const auto& params = det == 0 ? pair.d0_params : pair.d1_params;
    auto& est = det == 0 ? out.d0 : out.d1;
    est.times_ns.resize(n_points);
    est.eta.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
      const double tau = lo + i * step_ns;
      // Probe centered at tau against the fixed gate.
      double overlap = 0.0;
      for (int k = 0; k < grid.count; ++k) {
        const double w = (k == 0 || k == grid.count - 1) ? 0.5 : 1.0;
        overlap += w * probe.envelope(grid.time_at(k)) *
                   curve.value(grid.time_at(k) - probe.center_ns + tau -
                               params.gate_delay_ns);
      }
      overlap *= grid.step_ns;
      const double p =
          detector::click_probability(overlap, 1.0, params.dark_count);
      const auto k = sample_binomial(rng, shots_per_point, p);
      const double phat = static_cast<double>(k) / shots_per_point;
      est.times_ns[i] = tau;
      est.eta[i] = mu > 0.0 ? (phat - params.dark_count) / mu : 0.0;
    }
  }
  return out;
}

double broadened_two_sided(double x, double sigma_l, double sigma_r,
                           double probe_sigma) {
  const auto half = [&](double a, double side) {
    const double s2 = a * a + probe_sigma * probe_sigma;
    const double s = std::sqrt(s2);
    return (a / s) * std::exp(-0.5 * x * x / s2) *
           normal_cdf(side * x * a / (probe_sigma * s));
  };
  if (probe_sigma <= 0.0) {
    const double a = x < 0.0 ? sigma_l : sigma_r;
    return std::exp(-0.5 * x * x / (a * a));
  }
  return half(sigma_l, -1.0) + half(sigma_r, +1.0);
}

namespace {

// Minimal Nelder-Mead for the 4-parameter curve fit.
std::vector<double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const std::vector<double>& step, int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<std::size_t> order(n + 1);
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];
    if (std::abs(fv[worst] - fv[best]) <
        1e-14 * (1.0 + std::abs(fv[best])))
      break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / n;
    }
    auto point = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j)
        p[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
      return p;
    };
    auto reflect = point(-1.0);
    const double fr = f(reflect);
    if (fr < fv[best]) {
      auto expand = point(-2.0);
      const double fe = f(expand);
      if (fe < fr) {
        simplex[worst] = expand;
        fv[worst] = fe;
      } else {
        simplex[worst] = reflect;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = reflect;
      fv[worst] = fr;
    } else {
      auto contract = point(0.5);
      const double fc = f(contract);
      if (fc < fv[worst]) {
        simplex[worst] = contract;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == order[0]) continue;
          for (std::size_t j = 0; j < n; ++j)
            simplex[i][j] = 0.5 * (simplex[i][j] + simplex[order[0]][j]);
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < fv.size(); ++i)
    if (fv[i] < fv[best]) best = i;
  return simplex[best];
}

}  // namespace

CurvePeakFit fit_curve_peak(const EstimatedCurve& curve, double probe_sigma_ns,
                            double probe_mean_photons, double dark) {
  if (curve.times_ns.size() < 8)
    throw std::invalid_argument("fit_curve_peak: too few samples");
  const auto& t = curve.times_ns;
  const auto& y = curve.eta;

  std::size_t imax = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[imax]) imax = i;
  const double ymax = y[imax];

  // What the linear click estimator reports for a true value eta.
  const auto response = [&](double eta) {
    if (probe_mean_photons <= 0.0) return eta;
    return (1.0 - dark) * -std::expm1(-probe_mean_photons * eta) /
           probe_mean_photons;
  };

  const auto sse = [&](const std::vector<double>& q) {
    const double peak = q[0], center = q[1];
    const double sl = std::abs(q[2]), sr = std::abs(q[3]);
    if (sl < 1e-4 || sr < 1e-4 || peak <= 0.0) return 1e30;
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double model = response(
          peak * broadened_two_sided(t[i] - center, sl, sr, probe_sigma_ns));
      const double r = model - y[i];
      s += r * r;
    }
    return s;
  };

  std::vector<double> x0 = {ymax, t[imax], 0.4, 0.4};
  std::vector<double> step = {0.2 * ymax + 1e-6, 0.1, 0.1, 0.1};
  const auto q = nelder_mead(sse, x0, step, 2500);

  CurvePeakFit fit;
  fit.peak = q[0];
  fit.center_ns = q[1];
  fit.sigma_left_ns = std::abs(q[2]);
  fit.sigma_right_ns = std::abs(q[3]);
  fit.residual = std::sqrt(sse(q) / static_cast<double>(t.size()));
  return fit;
}

}  // namespace demsim::calibration
