#include "demsim/attack.hpp"

#include <cmath>
#include <stdexcept>

namespace demsim::attack {

using detector::click_probability;

EtaMatrix eta_matrix_for(const detector::DetectorPair& pair,
                         const AttackTiming& timing) {
  EtaMatrix m;
  m.eta00 = pair.eta0(timing.t0_ns);
  m.eta01 = pair.eta0(timing.t1_ns);
  m.eta10 = pair.eta1(timing.t0_ns);
  m.eta11 = pair.eta1(timing.t1_ns);
  return m;
}

FakedState faked_state_for(Basis eve_basis, int eve_bit,
                           const AttackParams& params) {
  const double mu = eve_bit == 0 ? params.mu0 : params.mu1;
  const double t = eve_bit == 0 ? params.timing.t0_ns : params.timing.t1_ns;
  return FakedState{opposite(eve_basis), 1 - eve_bit, mu, t};
}

CaseClicks case_click_probabilities(Basis alice_basis, int alice_bit,
                                    Basis eve_basis, int eve_bit,
                                    const AttackParams& params,
                                    const EtaMatrix& etas, double d0,
                                    double d1) {
  if (eve_basis == alice_basis && eve_bit != alice_bit)
    throw std::invalid_argument(
        "case_click_probabilities: matched bases require matching bits");
  const FakedState fs = faked_state_for(eve_basis, eve_bit, params);
  // eta_j at the resend time t_k, k = Eve's measured bit.
  const double eta0 = eve_bit == 0 ? etas.eta00 : etas.eta01;
  const double eta1 = eve_bit == 0 ? etas.eta10 : etas.eta11;

  CaseClicks c;
  if (fs.basis != alice_basis) {
    // Bob's basis differs from the resend basis: 50:50 split.
    c.p_d0 = click_probability(0.5 * fs.mu, eta0, d0);
    c.p_d1 = click_probability(0.5 * fs.mu, eta1, d1);
  } else {
    // Deterministic routing to the resent bit's detector.
    c.p_d0 = fs.bit == 0 ? click_probability(fs.mu, eta0, d0) : d0;
    c.p_d1 = fs.bit == 1 ? click_probability(fs.mu, eta1, d1) : d1;
  }
  c.p_double = c.p_d0 * c.p_d1;  // independent clicks
  c.p_loss = (1.0 - c.p_d0) * (1.0 - c.p_d1);
  return c;
}

AttackObservables observables(const AttackParams& params,
                              const EtaMatrix& etas, double d) {
  const double m0 = params.mu0, m1 = params.mu1;
  const double e00 = etas.eta00, e01 = etas.eta01;
  const double e10 = etas.eta10, e11 = etas.eta11;

  AttackObservables o;
  o.p0 = 0.75 + 0.25 * d -
         0.25 * (1.0 - d) *
             (std::exp(-0.5 * m0 * e00) + std::exp(-0.5 * m1 * e01) +
              std::exp(-m1 * e01));
  o.p1 = 0.75 + 0.25 * d -
         0.25 * (1.0 - d) *
             (std::exp(-0.5 * m0 * e10) + std::exp(-0.5 * m1 * e11) +
              std::exp(-m0 * e10));

  // Double clicks, averaged over the four equally likely resend
  // branches (matched-basis split / mismatched-basis full hit, for each
  // of Eve's bits). Never printed in closed form by the model this
  // reproduces; verified against enumerated_observables.
  const auto click = [d](double x) {
    return d + (1.0 - d) * -std::expm1(-x);
  };
  o.p_double = 0.25 * (click(0.5 * m0 * e00) * click(0.5 * m0 * e10) +
                       d * click(m0 * e10) +
                       click(0.5 * m1 * e01) * click(0.5 * m1 * e11) +
                       click(m1 * e01) * d);

  o.p_error = 0.75 + 0.25 * d - 0.5 * o.p_double -
              0.125 * (1.0 - d) *
                  (std::exp(-m0 * e10) + 2.0 * std::exp(-0.5 * m0 * e10) +
                   std::exp(-m1 * e01) + 2.0 * std::exp(-0.5 * m1 * e01));
  o.p_arrive = o.p0 + o.p1 - o.p_double;
  if (o.p_arrive <= 0.0)
    throw std::domain_error("observables: p_arrive is zero, QBER undefined");
  o.qber = o.p_error / o.p_arrive;
  return o;
}

AttackObservables enumerated_observables(const AttackParams& params,
                                         const EtaMatrix& etas, double d) {
  AttackObservables o;
  for (Basis ab : {Basis::Z, Basis::X}) {
    for (int abit : {0, 1}) {
      const double w_alice = 0.25;
      for (Basis eb : {Basis::Z, Basis::X}) {
        const double w_basis = 0.5;
        // Quantum rules: matched bases copy Alice's bit, mismatched
        // bases give a uniform outcome.
        const bool matched = eb == ab;
        for (int ebit : {0, 1}) {
          if (matched && ebit != abit) continue;
          const double w = w_alice * w_basis * (matched ? 1.0 : 0.5);
          const CaseClicks c = case_click_probabilities(
              ab, abit, eb, ebit, params, etas, d, d);
          const double c_right = abit == 0 ? c.p_d0 : c.p_d1;
          const double c_wrong = abit == 0 ? c.p_d1 : c.p_d0;
          o.p0 += w * c.p_d0;
          o.p1 += w * c.p_d1;
          o.p_double += w * c.p_double;
          // wrong-only clicks plus half of the randomly assigned doubles
          o.p_error += w * (c_wrong - 0.5 * c_wrong * c_right);
        }
      }
    }
  }
  o.p_arrive = o.p0 + o.p1 - o.p_double;
  if (o.p_arrive <= 0.0)
    throw std::domain_error(
        "enumerated_observables: p_arrive is zero, QBER undefined");
  o.qber = o.p_error / o.p_arrive;
  return o;
}

double ideal_fsa_qber(const EtaMatrix& etas) {
  // First order in mu (mu0 = mu1 = mu -> 0, d = 0): click probability
  // reduces to the exposure coefficient times mu, doubles vanish.
  double err = 0.0, arrive = 0.0;
  for (Basis ab : {Basis::Z, Basis::X}) {
    for (int abit : {0, 1}) {
      for (Basis eb : {Basis::Z, Basis::X}) {
        const bool matched = eb == ab;
        for (int ebit : {0, 1}) {
          if (matched && ebit != abit) continue;
          const double w = 0.25 * 0.5 * (matched ? 1.0 : 0.5);
          const double eta0 = ebit == 0 ? etas.eta00 : etas.eta01;
          const double eta1 = ebit == 0 ? etas.eta10 : etas.eta11;
          const FakedState fs = faked_state_for(eb, ebit, AttackParams{});
          double x0 = 0.0, x1 = 0.0;  // exposure per unit mu
          if (fs.basis != ab) {
            x0 = 0.5 * eta0;
            x1 = 0.5 * eta1;
          } else {
            (fs.bit == 0 ? x0 : x1) = fs.bit == 0 ? eta0 : eta1;
          }
          err += w * (abit == 0 ? x1 : x0);
          arrive += w * (x0 + x1);
        }
      }
    }
  }
  if (arrive == 0.0)
    throw std::domain_error("ideal_fsa_qber: all efficiencies are zero");
  return err / arrive;
}

}  // namespace demsim::attack
