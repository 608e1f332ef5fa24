// demsim: command-line driver for the detector-efficiency-mismatch
// calibration attack toolkit. Every subcommand reads one scenario
// (defaults, optionally patched by --scenario and --set), writes CSV +
// JSON outputs plus a run manifest into --out, and is bit-reproducible
// for a fixed scenario and seed.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "demsim/attack.hpp"
#include "demsim/calibration.hpp"
#include "demsim/csv.hpp"
#include "demsim/montecarlo.hpp"
#include "demsim/optimizer.hpp"
#include "demsim/rng.hpp"
#include "demsim/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace demsim;

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  2  scenario parse / override error\n"
    "  3  invariant violation (invalid parameter or self-check failure)\n"
    "  4  calibration failed (no peak above the dark floor)\n"
    "  5  QBER undefined (no arrivals)\n"
    "  1  any other error\n";

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir = "out";
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;

  // per-subcommand conveniences (equivalent to --set overrides)
  std::string eve;           // calibrate: absent | phase-flip
  double t_min = -1.0;       // sweep
  double t_max = -1.0;
  int points = 0;            // validate
  std::int64_t pulses = 0;   // validate, simulate
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--scenario", opts.scenario_path,
                  "Scenario JSON file (partial; unknown keys rejected)");
  cmd->add_option("--out", opts.out_dir,
                  "Output directory (env DEMSIM_OUT_DIR overrides the "
                  "default)");
  cmd->add_option("--set", opts.sets,
                  "Override a scenario key, e.g. --set attack.mu0=50")
      ->take_all();
  auto* seed_opt = cmd->add_option("--seed", opts.seed, "Override the seed");
  cmd->parse_complete_callback(
      [seed_opt, &opts] { opts.seed_given = seed_opt->count() > 0; });
}

scenario::Scenario resolve_scenario(const CommonOpts& opts) {
  scenario::Scenario s;
  if (!opts.scenario_path.empty()) s = scenario::load_scenario(opts.scenario_path);
  if (!opts.sets.empty()) s = scenario::apply_overrides(s, opts.sets);
  if (opts.seed_given) {
    s.seed = opts.seed;
    s.session.seed = opts.seed;
  }
  s.validate();
  return s;
}

fs::path resolve_out_dir(const CommonOpts& opts) {
  std::string dir = opts.out_dir;
  if (dir == "out") {  // only the default yields to the environment
    if (const char* env = std::getenv("DEMSIM_OUT_DIR"); env && *env)
      dir = env;
  }
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const scenario::Scenario& s,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "demsim";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = s.seed;
  m["scenario_digest"] = scenario::digest(s);
  m["outputs"] = outputs;
  m["scenario"] = json::parse(scenario::to_json_string(s));
  std::ofstream f(out_dir / "manifest.json");
  f << m.dump(2) << '\n';
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  f << j.dump(2) << '\n';
}

json outcome_json(const calibration::LlmOutcome& o) {
  return {{"gate_delay_d0_ns", o.gate_delay_d0_ns},
          {"gate_delay_d1_ns", o.gate_delay_d1_ns},
          {"delta01_ns", o.delta01_ns}};
}

int cmd_calibrate(const CommonOpts& opts) {
  auto s = resolve_scenario(opts);
  if (opts.eve == "absent")
    s.llm_eve.variant = calibration::EveLlmStrategy::Variant::Absent;
  else if (opts.eve == "phase-flip")
    s.llm_eve.variant = calibration::EveLlmStrategy::Variant::PhaseFlip;
  const auto out = resolve_out_dir(opts);

  const auto baseline =
      calibration::run_llm(s.llm, s.llm_nominal_detectors,
                           calibration::EveLlmStrategy::absent(), s.seed);
  const auto hacked = calibration::run_llm(s.llm, s.llm_nominal_detectors,
                                           s.llm_eve, s.seed + 1);
  const double shift = calibration::induced_shift(hacked, baseline);

  csv::Writer summary((out / "calibrate.csv").string());
  summary.header({"run", "gate_delay_d0_ns", "gate_delay_d1_ns",
                  "delta01_ns"});
  summary.row(std::string("baseline"), baseline.gate_delay_d0_ns,
              baseline.gate_delay_d1_ns, baseline.delta01_ns);
  summary.row(std::string("eve"), hacked.gate_delay_d0_ns,
              hacked.gate_delay_d1_ns, hacked.delta01_ns);

  csv::Writer hist((out / "calibrate_scan.csv").string());
  hist.header({"delay_ns", "d0_baseline", "d1_baseline", "d0_eve", "d1_eve"});
  for (std::size_t i = 0; i < baseline.scan_delays_ns.size(); ++i)
    hist.row(baseline.scan_delays_ns[i],
             static_cast<long long>(baseline.d0_counts[i]),
             static_cast<long long>(baseline.d1_counts[i]),
             static_cast<long long>(hacked.d0_counts[i]),
             static_cast<long long>(hacked.d1_counts[i]));

  json j;
  j["baseline"] = outcome_json(baseline);
  j["eve"] = outcome_json(hacked);
  j["induced_shift_ns"] = shift;
  write_json(out / "calibrate.json", j);
  write_manifest(out, "calibrate", s,
                 {"calibrate.csv", "calibrate_scan.csv", "calibrate.json"});
  std::cout << "baseline delta01 = " << baseline.delta01_ns
            << " ns, with eve = " << hacked.delta01_ns
            << " ns, induced shift = " << shift << " ns\n";
  return 0;
}

int cmd_estimate_curves(const CommonOpts& opts) {
  const auto s = resolve_scenario(opts);
  const auto out = resolve_out_dir(opts);

  const auto probe = optics::make_pulse(0.0, s.curve_probe_fwhm_ns,
                                        s.curve_probe_mean_photons);
  const auto est = calibration::estimate_efficiency_curves(
      s.detectors, probe, s.curve_scan_step_ns, s.curve_shots_per_point,
      s.seed);
  const double d0_dark = s.detectors.d0_params.dark_count;
  const double d1_dark = s.detectors.d1_params.dark_count;
  const auto fit0 = calibration::fit_curve_peak(
      est.d0, est.probe_sigma_ns, est.probe_mean_photons, d0_dark);
  const auto fit1 = calibration::fit_curve_peak(
      est.d1, est.probe_sigma_ns, est.probe_mean_photons, d1_dark);

  csv::Writer scan((out / "curves.csv").string());
  scan.header({"t_ns", "eta0_hat", "eta1_hat"});
  for (std::size_t i = 0; i < est.d0.times_ns.size(); ++i)
    scan.row(est.d0.times_ns[i], est.d0.eta[i], est.d1.eta[i]);

  auto fit_json = [](const calibration::CurvePeakFit& f) {
    return json{{"peak", f.peak},
                {"center_ns", f.center_ns},
                {"sigma_left_ns", f.sigma_left_ns},
                {"sigma_right_ns", f.sigma_right_ns},
                {"residual", f.residual}};
  };
  json j;
  j["probe_sigma_ns"] = est.probe_sigma_ns;
  j["probe_mean_photons"] = est.probe_mean_photons;
  j["d0_fit"] = fit_json(fit0);
  j["d1_fit"] = fit_json(fit1);
  write_json(out / "curves.json", j);
  write_manifest(out, "estimate-curves", s, {"curves.csv", "curves.json"});
  std::cout << "d0 peak " << fit0.peak << " at " << fit0.center_ns
            << " ns; d1 peak " << fit1.peak << " at " << fit1.center_ns
            << " ns\n";
  return 0;
}

int cmd_attack_grid(const CommonOpts& opts) {
  const auto s = resolve_scenario(opts);
  const auto out = resolve_out_dir(opts);

  const auto etas =
      attack::eta_matrix_for(s.detectors, s.attack_params.timing);
  const double d = s.detectors.mean_dark();
  const auto tuples = optimizer::scan_grid(s.grid, etas, d);
  const auto best = optimizer::min_qber_at_rates(tuples, s.rate);

  csv::Writer grid((out / "attack_grid.csv").string());
  grid.header({"mu0", "mu1", "p0", "p1", "qber"});
  for (const auto& t : tuples) grid.row(t.mu0, t.mu1, t.p0, t.p1, t.qber);

  json j;
  j["eta_matrix"] = {{"eta00", etas.eta00},
                     {"eta01", etas.eta01},
                     {"eta10", etas.eta10},
                     {"eta11", etas.eta11}};
  j["optimum"] = {{"feasible", best.feasible}, {"mu0", best.mu0},
                  {"mu1", best.mu1},           {"p0", best.p0},
                  {"p1", best.p1},             {"qber", best.qber}};
  j["ideal_single_photon_qber"] = attack::ideal_fsa_qber(etas);
  write_json(out / "attack_grid.json", j);
  write_manifest(out, "attack-grid", s,
                 {"attack_grid.csv", "attack_grid.json"});
  if (best.feasible)
    std::cout << "optimum qber " << best.qber << " at mu0=" << best.mu0
              << ", mu1=" << best.mu1 << "\n";
  else
    std::cout << "no grid point meets the rate constraints\n";
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  auto s = resolve_scenario(opts);
  if (opts.t_min > 0.0) s.sweep_t_min = opts.t_min;
  if (opts.t_max > 0.0) s.sweep_t_max = opts.t_max;
  const auto out = resolve_out_dir(opts);

  std::vector<double> ts;
  for (int i = 0; i < s.sweep_t_steps; ++i) {
    const double f = s.sweep_t_steps == 1
                         ? 0.0
                         : static_cast<double>(i) / (s.sweep_t_steps - 1);
    ts.push_back(s.sweep_t_max + f * (s.sweep_t_min - s.sweep_t_max));
  }
  const auto etas =
      attack::eta_matrix_for(s.detectors, s.attack_params.timing);
  const auto records = optimizer::sweep_transmission(
      ts, s.rate, s.grid, etas, s.detectors.mean_dark(), s.abort);

  csv::Writer sw((out / "sweep.csv").string());
  sw.header({"T", "loss_db", "mu0", "mu1", "p0", "p1", "qber", "threshold",
             "feasible", "succeeds"});
  json rows = json::array();
  bool all_succeed = true;
  for (const auto& r : records) {
    sw.row(r.transmission, r.loss_db, r.optimum.mu0, r.optimum.mu1,
           r.optimum.p0, r.optimum.p1, r.optimum.qber, r.threshold,
           r.optimum.feasible, r.attack_succeeds);
    rows.push_back({{"T", r.transmission},
                    {"loss_db", r.loss_db},
                    {"mu0", r.optimum.mu0},
                    {"mu1", r.optimum.mu1},
                    {"p0", r.optimum.p0},
                    {"p1", r.optimum.p1},
                    {"qber", r.optimum.qber},
                    {"threshold", r.threshold},
                    {"threshold_clamped", r.threshold_clamped},
                    {"feasible", r.optimum.feasible},
                    {"succeeds", r.attack_succeeds},
                    {"monotone_violation", r.monotone_violation}});
    all_succeed = all_succeed && r.attack_succeeds;
  }
  json j;
  j["records"] = rows;
  j["all_succeed"] = all_succeed;
  write_json(out / "sweep.json", j);
  write_manifest(out, "sweep", s, {"sweep.csv", "sweep.json"});
  std::cout << (all_succeed ? "attack succeeds at every swept transmission\n"
                            : "attack fails at some transmissions\n");
  return 0;
}

int cmd_simulate(const CommonOpts& opts) {
  auto s = resolve_scenario(opts);
  if (opts.pulses > 0) s.session.n_pulses = opts.pulses;
  const auto out = resolve_out_dir(opts);

  const auto stats = montecarlo::simulate_session(s.session);
  if (stats.arrivals == 0)
    throw std::domain_error("no detector arrivals: QBER is undefined");

  csv::Writer w((out / "session.csv").string());
  w.header({"sifted", "clicks_d0", "clicks_d1", "doubles", "arrivals",
            "errors", "p0", "p1", "p_double", "qber"});
  w.row(static_cast<long long>(stats.sifted),
        static_cast<long long>(stats.clicks_d0),
        static_cast<long long>(stats.clicks_d1),
        static_cast<long long>(stats.doubles),
        static_cast<long long>(stats.arrivals),
        static_cast<long long>(stats.errors), stats.empirical_p0,
        stats.empirical_p1, stats.empirical_p_double, stats.empirical_qber);

  json j;
  j["sifted"] = stats.sifted;
  j["clicks_d0"] = stats.clicks_d0;
  j["clicks_d1"] = stats.clicks_d1;
  j["doubles"] = stats.doubles;
  j["arrivals"] = stats.arrivals;
  j["errors"] = stats.errors;
  j["p0"] = stats.empirical_p0;
  j["p1"] = stats.empirical_p1;
  j["p_double"] = stats.empirical_p_double;
  j["qber"] = stats.empirical_qber;
  write_json(out / "session.json", j);
  write_manifest(out, "simulate", s, {"session.csv", "session.json"});
  std::cout << "sifted " << stats.sifted << ", qber " << stats.empirical_qber
            << "\n";
  return 0;
}

int cmd_validate(const CommonOpts& opts) {
  auto s = resolve_scenario(opts);
  if (opts.pulses > 0) s.session.n_pulses = opts.pulses;
  if (opts.points > 0) {
    // log-spaced points along the brightness grid diagonal
    s.validate_points.clear();
    for (int i = 0; i < opts.points; ++i) {
      const double f = opts.points == 1
                           ? 0.5
                           : static_cast<double>(i) / (opts.points - 1);
      auto interp = [f](double lo, double hi) {
        return lo * std::pow(hi / lo, f);
      };
      s.validate_points.emplace_back(interp(s.grid.mu0_min, s.grid.mu0_max),
                                     interp(s.grid.mu1_min, s.grid.mu1_max));
    }
  }
  const auto out = resolve_out_dir(opts);

  const auto report =
      montecarlo::validate_closed_forms(s.validate_points, s.session);

  csv::Writer w((out / "validate.csv").string());
  w.header({"mu0", "mu1", "analytic_p0", "empirical_p0", "z_p0",
            "analytic_p1", "empirical_p1", "z_p1", "analytic_p_double",
            "empirical_p_double", "z_p_double", "analytic_qber",
            "empirical_qber", "z_qber", "flagged", "low_power"});
  json rows = json::array();
  for (const auto& r : report.rows) {
    w.row(r.mu0, r.mu1, r.analytic_p0, r.empirical_p0, r.z_p0, r.analytic_p1,
          r.empirical_p1, r.z_p1, r.analytic_p_double, r.empirical_p_double,
          r.z_p_double, r.analytic_qber, r.empirical_qber, r.z_qber,
          r.flagged, r.low_power);
    rows.push_back({{"mu0", r.mu0},
                    {"mu1", r.mu1},
                    {"z_p0", r.z_p0},
                    {"z_p1", r.z_p1},
                    {"z_p_double", r.z_p_double},
                    {"z_qber", r.z_qber},
                    {"flagged", r.flagged},
                    {"low_power", r.low_power}});
  }
  json j;
  j["rows"] = rows;
  j["any_flagged"] = report.any_flagged;
  write_json(out / "validate.json", j);
  write_manifest(out, "validate", s, {"validate.csv", "validate.json"});
  std::cout << (report.any_flagged
                    ? "closed forms and sessions DISAGREE (|z| > 3)\n"
                    : "closed forms and sessions agree on all points\n");
  return 0;
}

json error_json(int code, const std::string& kind, const std::string& what) {
  return {{"error", {{"code", code}, {"kind", kind}, {"message", what}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "demsim: simulator for the calibration-hack detector-efficiency-"
      "mismatch attack on a two-way QKD system"};
  app.set_version_flag("--version", kVersion);
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  CommonOpts opts;
  struct Sub {
    const char* name;
    const char* desc;
    int (*fn)(const CommonOpts&);
  };
  const Sub subs[] = {
      {"calibrate",
       "Run the timing calibration with and without the phase-flip hack",
       cmd_calibrate},
      {"estimate-curves",
       "Scan a weak probe across the gates and fit the efficiency curves",
       cmd_estimate_curves},
      {"attack-grid",
       "Scan faked-state brightnesses and report the rate-matched optimum",
       cmd_attack_grid},
      {"sweep", "Rate-matched attack optimum across channel transmissions",
       cmd_sweep},
      {"simulate", "Pulse-by-pulse session simulation", cmd_simulate},
      {"validate", "Cross-check closed forms against session statistics",
       cmd_validate},
  };
  int (*selected)(const CommonOpts&) = nullptr;
  for (const Sub& sub : subs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.desc);
    add_common(cmd, opts);
    const std::string name = sub.name;
    if (name == "calibrate")
      cmd->add_option("--eve", opts.eve,
                      "Eve's strategy during calibration")
          ->check(CLI::IsMember({"absent", "phase-flip"}));
    if (name == "sweep") {
      cmd->add_option("--t-min", opts.t_min, "Lowest swept transmission");
      cmd->add_option("--t-max", opts.t_max, "Highest swept transmission");
    }
    if (name == "validate")
      cmd->add_option("--points", opts.points,
                      "Number of (mu0, mu1) grid points");
    if (name == "validate" || name == "simulate")
      cmd->add_option("--pulses", opts.pulses, "Pulses per session");
    cmd->callback([&selected, fn = sub.fn] { selected = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    scenario::verify_default_constraints();
    return selected(opts);
  } catch (const scenario::ScenarioParseError& e) {
    std::cerr << error_json(2, "scenario", e.what()).dump() << '\n';
    return 2;
  } catch (const calibration::CalibrationError& e) {
    std::cerr << error_json(4, "calibration", e.what()).dump() << '\n';
    return 4;
  } catch (const calibration::SyncNotFoundError& e) {
    std::cerr << error_json(4, "calibration", e.what()).dump() << '\n';
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << error_json(5, "undefined", e.what()).dump() << '\n';
    return 5;
  } catch (const std::invalid_argument& e) {
    std::cerr << error_json(3, "invariant", e.what()).dump() << '\n';
    return 3;
  } catch (const std::logic_error& e) {
    std::cerr << error_json(3, "invariant", e.what()).dump() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << error_json(1, "error", e.what()).dump() << '\n';
    return 1;
  }
}
