#pragma once

#include <vector>

#include "demsim/attack.hpp"

namespace demsim::optimizer {

struct GridSpec {
  double mu0_min = 1.0, mu0_max = 100.0;   // open interval endpoints
  double mu1_min = 21.0, mu1_max = 120.0;
  int steps = 200;                          // per axis
  bool log_spacing = true;

  void validate() const;
  std::vector<double> mu0_values() const;
  std::vector<double> mu1_values() const;
};

struct RateTarget {
  double transmission = 1.0;       // T in (0,1]
  double baseline_p0 = 0.038;
  double baseline_p1 = 0.032;
  double tolerance = 0.05;         // relative
  bool overall_only = false;       // constrain p0+p1 instead of each
};

struct AbortModel {
  // (loss_dB, threshold) anchors, loss increasing.
  std::vector<std::pair<double, double>> anchors = {{1.0, 0.0594},
                                                    {6.0, 0.0826}};
};

struct GridTuple {
  double mu0, mu1, p0, p1, qber;
};

struct Optimum {
  double mu0 = 0.0, mu1 = 0.0, p0 = 0.0, p1 = 0.0, qber = 0.0;
  bool feasible = false;
};

struct SweepRecord {
  double transmission = 0.0;
  double loss_db = 0.0;
  Optimum optimum;
  double threshold = 0.0;
  bool threshold_clamped = false;
  bool attack_succeeds = false;
  bool monotone_violation = false;  // qber rose relative to the previous
                                    // (larger) T in the sweep
};

/// One closed-form observables tuple per grid node, row-major in
/// (mu0, mu1) order.
std::vector<GridTuple> scan_grid(const GridSpec& grid,
                                 const attack::EtaMatrix& etas, double d);

/// Lowest-QBER tuple meeting the rate constraints. Infeasibility is a
/// result, not an error.
Optimum min_qber_at_rates(const std::vector<GridTuple>& tuples,
                          const RateTarget& target);

/// Abort threshold at the given channel loss, linearly interpolated
/// between the anchors and clamped outside their span. `clamped`, when
/// non-null, reports whether clamping occurred.
double abort_threshold(const AbortModel& model, double loss_db,
                       bool* clamped = nullptr);

/// Rate-matched sweep over channel transmissions. loss_dB = -10 log10 T.
std::vector<SweepRecord> sweep_transmission(
    const std::vector<double>& t_values, const RateTarget& baseline,
    const GridSpec& grid, const attack::EtaMatrix& etas, double d,
    const AbortModel& abort);

}  // namespace demsim::optimizer
