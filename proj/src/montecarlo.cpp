#include "demsim/montecarlo.hpp"

#include <cmath>
#include <stdexcept>

#include "demsim/rng.hpp"

namespace demsim::montecarlo {

using attack::Basis;

void SessionConfig::validate() const {
  if (n_pulses < 1)
    throw std::invalid_argument("SessionConfig: n_pulses must be >= 1");
  if (!(alice_mu >= 0.0))
    throw std::invalid_argument("SessionConfig: alice_mu must be >= 0");
  if (!(transmission >= 0.0 && transmission <= 1.0))
    throw std::invalid_argument("SessionConfig: T must be in [0,1]");
  if (!(bob_loss_db >= 0.0))
    throw std::invalid_argument("SessionConfig: bob_loss_db must be >= 0");
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::invalid_argument("SessionConfig: visibility must be in [0,1]");
  pair.validate();
}

SiftedKeyStats simulate_session(const SessionConfig& cfg) {
  cfg.validate();
  const double bob_loss = std::pow(10.0, -cfg.bob_loss_db / 10.0);
  const double d0 = cfg.pair.d0_params.dark_count;
  const double d1 = cfg.pair.d1_params.dark_count;

  SiftedKeyStats s;
  for (std::int64_t i = 0; i < cfg.n_pulses; ++i) {
    SplitMix64 rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    const Basis alice_basis = rng.bernoulli(0.5) ? Basis::Z : Basis::X;
    const int alice_bit = rng.bernoulli(0.5) ? 1 : 0;
    const Basis bob_basis = rng.bernoulli(0.5) ? Basis::Z : Basis::X;
    if (bob_basis != alice_basis) continue;  // sifted away
    ++s.sifted;

    double exp0 = 0.0, exp1 = 0.0;  // mu_eff * eta per detector
    if (cfg.attack == AttackMode::Off) {
      const double mean = cfg.alice_mu * cfg.transmission * bob_loss;
      const double to_right = 0.5 * (1.0 + cfg.visibility) * mean;
      const double to_wrong = 0.5 * (1.0 - cfg.visibility) * mean;
      exp0 = (alice_bit == 0 ? to_right : to_wrong) * cfg.pair.d0_curve.peak;
      exp1 = (alice_bit == 1 ? to_right : to_wrong) * cfg.pair.d1_curve.peak;
    } else {
      const Basis eve_basis = rng.bernoulli(0.5) ? Basis::Z : Basis::X;
      const int eve_bit = eve_basis == alice_basis
                              ? alice_bit
                              : (rng.bernoulli(0.5) ? 1 : 0);
      attack::FakedState fs =
          attack::faked_state_for(eve_basis, eve_bit, cfg.attack_params);
      fs.mu *= cfg.eve_loss_factor;
      const double eta0 = cfg.pair.eta0(fs.arrival_ns);
      const double eta1 = cfg.pair.eta1(fs.arrival_ns);
      if (fs.basis != bob_basis) {
        exp0 = 0.5 * fs.mu * eta0;
        exp1 = 0.5 * fs.mu * eta1;
      } else {
        exp0 = fs.bit == 0 ? fs.mu * eta0 : 0.0;
        exp1 = fs.bit == 1 ? fs.mu * eta1 : 0.0;
      }
    }

    const bool c0 =
        rng.bernoulli(detector::click_probability(exp0, 1.0, d0));
    const bool c1 =
        rng.bernoulli(detector::click_probability(exp1, 1.0, d1));
    if (!c0 && !c1) continue;
    s.clicks_d0 += c0;
    s.clicks_d1 += c1;
    ++s.arrivals;
    int bob_bit;
    if (c0 && c1) {
      ++s.doubles;
      bob_bit = rng.bernoulli(0.5) ? 1 : 0;  // random assignment
    } else {
      bob_bit = c1 ? 1 : 0;
    }
    if (bob_bit != alice_bit) ++s.errors;
  }

  if (s.sifted > 0) {
    const double n = static_cast<double>(s.sifted);
    s.empirical_p0 = s.clicks_d0 / n;
    s.empirical_p1 = s.clicks_d1 / n;
    s.empirical_p_double = s.doubles / n;
  }
  if (s.arrivals > 0)
    s.empirical_qber = static_cast<double>(s.errors) / s.arrivals;
  return s;
}

namespace {
double zscore(double empirical, double analytic, double n) {
  const double var = analytic * (1.0 - analytic) / n;
  if (var <= 0.0) return 0.0;
  return (empirical - analytic) / std::sqrt(var);
}
}  // namespace

ValidationReport validate_closed_forms(
    const std::vector<std::pair<double, double>>& mu_points,
    const SessionConfig& base_cfg, double perturb_sigma) {
  if (mu_points.size() < 3)
    throw std::invalid_argument(
        "validate_closed_forms: need at least 3 grid points");
  ValidationReport report;
  for (std::size_t k = 0; k < mu_points.size(); ++k) {
    SessionConfig cfg = base_cfg;
    cfg.attack = AttackMode::Fsa;
    cfg.attack_params.mu0 = mu_points[k].first;
    cfg.attack_params.mu1 = mu_points[k].second;
    cfg.seed = substream_seed(base_cfg.seed, 0xfeed0000ULL + k);

    const auto etas =
        attack::eta_matrix_for(cfg.pair, cfg.attack_params.timing);
    auto ana =
        attack::observables(cfg.attack_params, etas, cfg.pair.mean_dark());
    const auto s = simulate_session(cfg);

    ValidationRow row;
    row.mu0 = cfg.attack_params.mu0;
    row.mu1 = cfg.attack_params.mu1;
    const double n = static_cast<double>(std::max<std::int64_t>(s.sifted, 1));
    if (perturb_sigma != 0.0) {
      ana.p0 += perturb_sigma * std::sqrt(ana.p0 * (1.0 - ana.p0) / n);
    }
    row.analytic_p0 = ana.p0;
    row.analytic_p1 = ana.p1;
    row.analytic_p_double = ana.p_double;
    row.analytic_qber = ana.qber;
    row.empirical_p0 = s.empirical_p0;
    row.empirical_p1 = s.empirical_p1;
    row.empirical_p_double = s.empirical_p_double;
    row.empirical_qber = s.empirical_qber;
    row.z_p0 = zscore(s.empirical_p0, ana.p0, n);
    row.z_p1 = zscore(s.empirical_p1, ana.p1, n);
    row.z_p_double = zscore(s.empirical_p_double, ana.p_double, n);
    row.z_qber =
        zscore(s.empirical_qber, ana.qber,
               static_cast<double>(std::max<std::int64_t>(s.arrivals, 1)));
    // Below ~25 expected counts the binomial z is heavy-tailed and
    // uninformative: such observables are marked low-power instead of
    // being eligible to flag.
    const double n_arr =
        static_cast<double>(std::max<std::int64_t>(s.arrivals, 1));
    struct Channel {
      double z, expected;
    };
    const Channel channels[] = {{row.z_p0, n * ana.p0},
                                {row.z_p1, n * ana.p1},
                                {row.z_p_double, n * ana.p_double},
                                {row.z_qber, n_arr * ana.qber}};
    for (const Channel& c : channels) {
      if (c.expected < 25.0)
        row.low_power = true;
      else if (std::abs(c.z) > 3.0)
        row.flagged = true;
    }
    report.any_flagged = report.any_flagged || row.flagged;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace demsim::montecarlo
