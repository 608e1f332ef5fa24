#include "demsim/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "demsim/attack.hpp"

namespace demsim::scenario {

using nlohmann::json;

Scenario::Scenario() {
  session.pair = detectors;
  session.attack_params = attack_params;
  session.eve_loss_factor = eve_loss_factor;
  session.seed = seed;
}

void Scenario::validate() const {
  detectors.validate();
  llm_nominal_detectors.validate();
  grid.validate();
  session.validate();
  if (!(sweep_t_min > 0.0 && sweep_t_max <= 1.0 && sweep_t_min <= sweep_t_max))
    throw ScenarioParseError("sweep: need 0 < t_min <= t_max <= 1");
  if (sweep_t_steps < 1)
    throw ScenarioParseError("sweep: t_steps must be >= 1");
  if (!(curve_scan_step_ns > 0.0) || !(curve_probe_fwhm_ns > 0.0))
    throw ScenarioParseError("curves: scan step and probe fwhm must be > 0");
  if (!(curve_probe_mean_photons >= 0.0) || curve_shots_per_point < 1)
    throw ScenarioParseError("curves: bad probe photons or shots");
  if (validate_points.size() < 3)
    throw ScenarioParseError("validate: need at least 3 (mu0, mu1) points");
}

namespace {

json curve_json(const detector::EfficiencyCurve& c) {
  return {{"peak", c.peak},
          {"center_ns", c.center_ns},
          {"sigma_left_ns", c.sigma_left_ns},
          {"sigma_right_ns", c.sigma_right_ns}};
}

void curve_from(const json& j, detector::EfficiencyCurve& c) {
  j.at("peak").get_to(c.peak);
  j.at("center_ns").get_to(c.center_ns);
  j.at("sigma_left_ns").get_to(c.sigma_left_ns);
  j.at("sigma_right_ns").get_to(c.sigma_right_ns);
}

json pair_json(const detector::DetectorPair& p) {
  return {{"d0", curve_json(p.d0_curve)},
          {"d1", curve_json(p.d1_curve)},
          {"d0_dark", p.d0_params.dark_count},
          {"d1_dark", p.d1_params.dark_count},
          {"d0_gate_delay_ns", p.d0_params.gate_delay_ns},
          {"d1_gate_delay_ns", p.d1_params.gate_delay_ns}};
}

void pair_from(const json& j, detector::DetectorPair& p) {
  curve_from(j.at("d0"), p.d0_curve);
  curve_from(j.at("d1"), p.d1_curve);
  j.at("d0_dark").get_to(p.d0_params.dark_count);
  j.at("d1_dark").get_to(p.d1_params.dark_count);
  j.at("d0_gate_delay_ns").get_to(p.d0_params.gate_delay_ns);
  j.at("d1_gate_delay_ns").get_to(p.d1_params.gate_delay_ns);
}

std::string policy_name(calibration::BobPhasePolicy p) {
  switch (p) {
    case calibration::BobPhasePolicy::UniformHalfPi: return "uniform_half_pi";
    case calibration::BobPhasePolicy::UniformZero: return "uniform_zero";
    case calibration::BobPhasePolicy::RandomZeroPi: return "random_zero_pi";
  }
  return "uniform_half_pi";
}

calibration::BobPhasePolicy policy_from(const std::string& s) {
  if (s == "uniform_half_pi") return calibration::BobPhasePolicy::UniformHalfPi;
  if (s == "uniform_zero") return calibration::BobPhasePolicy::UniformZero;
  if (s == "random_zero_pi") return calibration::BobPhasePolicy::RandomZeroPi;
  throw ScenarioParseError("unknown bob_phase_policy: " + s);
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["seed"] = s.seed;
  j["detectors"] = pair_json(s.detectors);

  json llm;
  llm["scan_min_ns"] = s.llm.scan_min_ns;
  llm["scan_max_ns"] = s.llm.scan_max_ns;
  llm["scan_step_ns"] = s.llm.scan_step_ns;
  llm["pulse_center_ns"] = s.llm.bright_pulse.center_ns;
  llm["pulse_sigma_ns"] = s.llm.bright_pulse.width_sigma_ns;
  llm["pulse_mean_photons"] = s.llm.bright_pulse.mean_photons;
  llm["bob_phase_policy"] = policy_name(s.llm.policy);
  llm["peak_estimator"] =
      s.llm.estimator == calibration::PeakEstimator::Centroid ? "centroid"
                                                              : "argmax";
  llm["shots_per_point"] = s.llm.shots_per_point;
  llm["jitter_sigma_ns"] = s.llm.jitter_sigma_ns;
  llm["sample_step_ns"] = s.llm.sample_step_ns;
  llm["nominal_detectors"] = pair_json(s.llm_nominal_detectors);
  llm["eve"] = {{"variant", s.llm_eve.variant ==
                                    calibration::EveLlmStrategy::Variant::Absent
                                ? "absent"
                                : "phase_flip"},
                {"edge_time_ns", s.llm_eve.edge_time_ns},
                {"polarity", s.llm_eve.polarity},
                {"pattern_offset_rad", s.llm_eve.pattern_offset_rad}};
  j["llm"] = llm;

  j["attack"] = {{"mu0", s.attack_params.mu0},
                 {"mu1", s.attack_params.mu1},
                 {"t0_ns", s.attack_params.timing.t0_ns},
                 {"t1_ns", s.attack_params.timing.t1_ns},
                 {"eve_loss_factor", s.eve_loss_factor}};

  j["grid"] = {{"mu0_min", s.grid.mu0_min}, {"mu0_max", s.grid.mu0_max},
               {"mu1_min", s.grid.mu1_min}, {"mu1_max", s.grid.mu1_max},
               {"steps", s.grid.steps},     {"log_spacing", s.grid.log_spacing}};

  j["rate"] = {{"baseline_p0", s.rate.baseline_p0},
               {"baseline_p1", s.rate.baseline_p1},
               {"tolerance", s.rate.tolerance},
               {"overall_only", s.rate.overall_only}};

  json anchors = json::array();
  for (const auto& [loss, thr] : s.abort.anchors)
    anchors.push_back({{"loss_db", loss}, {"threshold", thr}});
  j["abort"] = {{"anchors", anchors}};

  j["sweep"] = {{"t_min", s.sweep_t_min},
                {"t_max", s.sweep_t_max},
                {"t_steps", s.sweep_t_steps}};

  j["curves"] = {{"scan_step_ns", s.curve_scan_step_ns},
                 {"probe_fwhm_ns", s.curve_probe_fwhm_ns},
                 {"probe_mean_photons", s.curve_probe_mean_photons},
                 {"shots_per_point", s.curve_shots_per_point}};

  j["session"] = {{"n_pulses", s.session.n_pulses},
                  {"alice_mu", s.session.alice_mu},
                  {"transmission", s.session.transmission},
                  {"bob_loss_db", s.session.bob_loss_db},
                  {"visibility", s.session.visibility},
                  {"attack", s.session.attack == montecarlo::AttackMode::Fsa
                                 ? "fsa"
                                 : "off"}};

  json points = json::array();
  for (const auto& [m0, m1] : s.validate_points)
    points.push_back({{"mu0", m0}, {"mu1", m1}});
  j["validate_points"] = points;
  return j;
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  j.at("seed").get_to(s.seed);
  pair_from(j.at("detectors"), s.detectors);

  const json& llm = j.at("llm");
  llm.at("scan_min_ns").get_to(s.llm.scan_min_ns);
  llm.at("scan_max_ns").get_to(s.llm.scan_max_ns);
  llm.at("scan_step_ns").get_to(s.llm.scan_step_ns);
  llm.at("pulse_center_ns").get_to(s.llm.bright_pulse.center_ns);
  llm.at("pulse_sigma_ns").get_to(s.llm.bright_pulse.width_sigma_ns);
  llm.at("pulse_mean_photons").get_to(s.llm.bright_pulse.mean_photons);
  s.llm.policy = policy_from(llm.at("bob_phase_policy").get<std::string>());
  const std::string est = llm.at("peak_estimator").get<std::string>();
  if (est == "centroid")
    s.llm.estimator = calibration::PeakEstimator::Centroid;
  else if (est == "argmax")
    s.llm.estimator = calibration::PeakEstimator::Argmax;
  else
    throw ScenarioParseError("unknown peak_estimator: " + est);
  llm.at("shots_per_point").get_to(s.llm.shots_per_point);
  llm.at("jitter_sigma_ns").get_to(s.llm.jitter_sigma_ns);
  llm.at("sample_step_ns").get_to(s.llm.sample_step_ns);
  pair_from(llm.at("nominal_detectors"), s.llm_nominal_detectors);
  const json& eve = llm.at("eve");
  const std::string variant = eve.at("variant").get<std::string>();
  if (variant == "absent")
    s.llm_eve.variant = calibration::EveLlmStrategy::Variant::Absent;
  else if (variant == "phase_flip")
    s.llm_eve.variant = calibration::EveLlmStrategy::Variant::PhaseFlip;
  else
    throw ScenarioParseError("unknown eve variant: " + variant);
  eve.at("edge_time_ns").get_to(s.llm_eve.edge_time_ns);
  eve.at("polarity").get_to(s.llm_eve.polarity);
  eve.at("pattern_offset_rad").get_to(s.llm_eve.pattern_offset_rad);

  const json& atk = j.at("attack");
  atk.at("mu0").get_to(s.attack_params.mu0);
  atk.at("mu1").get_to(s.attack_params.mu1);
  atk.at("t0_ns").get_to(s.attack_params.timing.t0_ns);
  atk.at("t1_ns").get_to(s.attack_params.timing.t1_ns);
  atk.at("eve_loss_factor").get_to(s.eve_loss_factor);

  const json& grid = j.at("grid");
  grid.at("mu0_min").get_to(s.grid.mu0_min);
  grid.at("mu0_max").get_to(s.grid.mu0_max);
  grid.at("mu1_min").get_to(s.grid.mu1_min);
  grid.at("mu1_max").get_to(s.grid.mu1_max);
  grid.at("steps").get_to(s.grid.steps);
  grid.at("log_spacing").get_to(s.grid.log_spacing);

  const json& rate = j.at("rate");
  rate.at("baseline_p0").get_to(s.rate.baseline_p0);
  rate.at("baseline_p1").get_to(s.rate.baseline_p1);
  rate.at("tolerance").get_to(s.rate.tolerance);
  rate.at("overall_only").get_to(s.rate.overall_only);

  s.abort.anchors.clear();
  for (const json& a : j.at("abort").at("anchors"))
    s.abort.anchors.emplace_back(a.at("loss_db").get<double>(),
                                 a.at("threshold").get<double>());
  if (s.abort.anchors.size() < 2)
    throw ScenarioParseError("abort: need at least 2 anchors");

  const json& sweep = j.at("sweep");
  sweep.at("t_min").get_to(s.sweep_t_min);
  sweep.at("t_max").get_to(s.sweep_t_max);
  sweep.at("t_steps").get_to(s.sweep_t_steps);

  const json& curves = j.at("curves");
  curves.at("scan_step_ns").get_to(s.curve_scan_step_ns);
  curves.at("probe_fwhm_ns").get_to(s.curve_probe_fwhm_ns);
  curves.at("probe_mean_photons").get_to(s.curve_probe_mean_photons);
  curves.at("shots_per_point").get_to(s.curve_shots_per_point);

  const json& sess = j.at("session");
  sess.at("n_pulses").get_to(s.session.n_pulses);
  sess.at("alice_mu").get_to(s.session.alice_mu);
  sess.at("transmission").get_to(s.session.transmission);
  sess.at("bob_loss_db").get_to(s.session.bob_loss_db);
  sess.at("visibility").get_to(s.session.visibility);
  const std::string mode = sess.at("attack").get<std::string>();
  if (mode == "off")
    s.session.attack = montecarlo::AttackMode::Off;
  else if (mode == "fsa")
    s.session.attack = montecarlo::AttackMode::Fsa;
  else
    throw ScenarioParseError("unknown session attack mode: " + mode);

  s.validate_points.clear();
  for (const json& p : j.at("validate_points"))
    s.validate_points.emplace_back(p.at("mu0").get<double>(),
                                   p.at("mu1").get<double>());

  s.session.pair = s.detectors;
  s.session.attack_params = s.attack_params;
  s.session.eve_loss_factor = s.eve_loss_factor;
  s.session.seed = s.seed;
  return s;
}

// Merge `patch` into `base`, rejecting keys that don't exist in the
// default layout (catches typos in scenario files).
void merge_checked(json& base, const json& patch, const std::string& path) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string here = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key()))
      throw ScenarioParseError("unknown scenario key: " + here);
    json& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object())
      merge_checked(slot, it.value(), here);
    else if (slot.type() == it.value().type() ||
             (slot.is_number() && it.value().is_number()))
      slot = it.value();
    else
      throw ScenarioParseError("type mismatch for scenario key: " + here);
  }
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError("cannot open scenario file: " + path);
  json patch;
  try {
    patch = json::parse(in);
  } catch (const json::exception& e) {
    throw ScenarioParseError("scenario JSON parse error: " +
                             std::string(e.what()));
  }
  if (!patch.is_object())
    throw ScenarioParseError("scenario root must be a JSON object");
  json base = scenario_to_json(Scenario{});
  merge_checked(base, patch, "");
  try {
    Scenario s = scenario_from_json(base);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ScenarioParseError("scenario field error: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError("invalid scenario value: " +
                             std::string(e.what()));
  }
}

Scenario apply_overrides(const Scenario& s,
                         const std::vector<std::string>& overrides) {
  json base = scenario_to_json(s);
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ScenarioParseError("override must be key.path=value: " + ov);
    std::string keypath = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);
    json* node = &base;
    std::stringstream ss(keypath);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i]))
        throw ScenarioParseError("unknown scenario key: " + keypath);
      node = &(*node)[parts[i]];
    }
    if (parts.empty() || !node->contains(parts.back()))
      throw ScenarioParseError("unknown scenario key: " + keypath);
    json& slot = (*node)[parts.back()];
    try {
      if (slot.is_string())
        slot = value;
      else
        slot = json::parse(value);
    } catch (const json::exception&) {
      throw ScenarioParseError("cannot parse override value: " + ov);
    }
  }
  try {
    Scenario out = scenario_from_json(base);
    out.validate();
    return out;
  } catch (const json::exception& e) {
    throw ScenarioParseError("scenario field error: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError("invalid scenario value: " +
                             std::string(e.what()));
  }
}

std::string to_json_string(const Scenario& s) {
  return scenario_to_json(s).dump(2);
}

std::string digest(const Scenario& s) {
  // FNV-1a 64 over the canonical (sorted-key, compact) dump.
  const std::string dump = scenario_to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void verify_default_constraints() {
  const Scenario s;
  const auto& p = s.detectors;
  auto fail = [](const std::string& what) {
    throw std::logic_error("default configuration self-check failed: " + what);
  };

  if (std::abs(p.d0_curve.peak - 0.076) > 1e-12 ||
      std::abs(p.d1_curve.peak - 0.064) > 1e-12)
    fail("detector peak efficiencies");

  const double r0 = detector::mismatch_ratio(p, s.attack_params.timing.t0_ns);
  const double r1 = -detector::mismatch_ratio(p, s.attack_params.timing.t1_ns);
  if (!(r0 >= std::log10(20.0)) || !(r1 >= std::log10(20.0)))
    fail("efficiency mismatch below 20x at an attack time");

  // The grid must bracket the rate targets over the full sweep range.
  const auto etas = attack::eta_matrix_for(p, s.attack_params.timing);
  const double d = p.mean_dark();
  const auto lo = attack::observables(
      {s.grid.mu0_min, s.grid.mu1_min, s.attack_params.timing}, etas, d);
  const auto hi = attack::observables(
      {s.grid.mu0_max, s.grid.mu1_max, s.attack_params.timing}, etas, d);
  const double tol = s.rate.tolerance;
  if (!(lo.p0 <= (1.0 - tol) * s.sweep_t_min * s.rate.baseline_p0) ||
      !(hi.p0 >= (1.0 + tol) * s.sweep_t_max * s.rate.baseline_p0) ||
      !(lo.p1 <= (1.0 - tol) * s.sweep_t_min * s.rate.baseline_p1) ||
      !(hi.p1 >= (1.0 + tol) * s.sweep_t_max * s.rate.baseline_p1))
    fail("brightness grid cannot reach the swept click-rate targets");
}

}  // namespace demsim::scenario
