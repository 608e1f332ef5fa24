#pragma once

#include "demsim/detector.hpp"

namespace demsim::attack {

enum class Basis { Z, X };

inline Basis opposite(Basis b) { return b == Basis::Z ? Basis::X : Basis::Z; }

struct AttackTiming {
  double t0_ns = 1.90;
  double t1_ns = -1.32;
};

struct AttackParams {
  double mu0 = 0.0;  // mean photons of faked states for Eve's bit 0
  double mu1 = 0.0;  // and for Eve's bit 1
  AttackTiming timing;
};

/// eta_jk = eta_j(t_k), detector j evaluated at attack time t_k.
struct EtaMatrix {
  double eta00 = 0.0, eta01 = 0.0;
  double eta10 = 0.0, eta11 = 0.0;
};

struct FakedState {
  Basis basis;
  int bit;
  double mu;
  double arrival_ns;
};

struct AttackObservables {
  double p0 = 0.0;
  double p1 = 0.0;
  double p_double = 0.0;
  double p_error = 0.0;
  double p_arrive = 0.0;
  double qber = 0.0;
};

/// Per-case click probabilities for one sifted pulse.
struct CaseClicks {
  double p_d0 = 0.0;
  double p_d1 = 0.0;
  double p_double = 0.0;
  double p_loss = 0.0;
};

/// Sample the pair's efficiencies at the attack times.
EtaMatrix eta_matrix_for(const detector::DetectorPair& pair,
                         const AttackTiming& timing);

/// Eve's resend rule: opposite basis, opposite bit, brightness and
/// timing indexed by her measured bit.
FakedState faked_state_for(Basis eve_basis, int eve_bit,
                           const AttackParams& params);

/// Click probabilities at Bob for one sifted pulse, given Alice's state
/// and Eve's measurement. Bob measures in Alice's basis. Throws
/// std::invalid_argument if eve_meas has Alice's basis but a different
/// bit (quantum-impossible outcome).
CaseClicks case_click_probabilities(Basis alice_basis, int alice_bit,
                                    Basis eve_basis, int eve_bit,
                                    const AttackParams& params,
                                    const EtaMatrix& etas, double d0,
                                    double d1);

/// Closed-form totals over all Alice states and Eve outcomes, with the
/// symmetric dark model d = mean(d0,d1). Throws std::domain_error when
/// p_arrive is zero (QBER undefined).
AttackObservables observables(const AttackParams& params,
                              const EtaMatrix& etas, double d);

/// Same totals by brute-force enumeration of every (Alice state, Eve
/// outcome) branch via case_click_probabilities. Independent oracle for
/// the closed forms.
AttackObservables enumerated_observables(const AttackParams& params,
                                         const EtaMatrix& etas, double d);

/// QBER of the faked-state attack in the single-photon, zero-dark
/// limit (mu0 = mu1 -> 0), by enumeration at first order in mu.
double ideal_fsa_qber(const EtaMatrix& etas);

}  // namespace demsim::attack
