#include "demsim/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace demsim::optimizer {

void GridSpec::validate() const {
  if (!(mu0_min > 0.0 && mu0_max > mu0_min))
    throw std::invalid_argument("GridSpec: bad mu0 range");
  if (!(mu1_min > 0.0 && mu1_max > mu1_min))
    throw std::invalid_argument("GridSpec: bad mu1 range");
  if (steps < 2) throw std::invalid_argument("GridSpec: steps must be >= 2");
}

namespace {
std::vector<double> axis(double lo, double hi, int n, bool log_spacing) {
  std::vector<double> v(n);
  if (log_spacing) {
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < n; ++i)
      v[i] = std::exp(la + (lb - la) * i / (n - 1));
  } else {
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  }
  return v;
}
}  // namespace

std::vector<double> GridSpec::mu0_values() const {
  return axis(mu0_min, mu0_max, steps, log_spacing);
}

std::vector<double> GridSpec::mu1_values() const {
  return axis(mu1_min, mu1_max, steps, log_spacing);
}

std::vector<GridTuple> scan_grid(const GridSpec& grid,
                                 const attack::EtaMatrix& etas, double d) {
  grid.validate();
  const auto m0s = grid.mu0_values();
  const auto m1s = grid.mu1_values();
  std::vector<GridTuple> out;
  out.reserve(m0s.size() * m1s.size());
  attack::AttackParams params;
  for (double m0 : m0s) {
    for (double m1 : m1s) {
      params.mu0 = m0;
      params.mu1 = m1;
      const auto o = attack::observables(params, etas, d);
      out.push_back({m0, m1, o.p0, o.p1, o.qber});
    }
  }
  return out;
}

Optimum min_qber_at_rates(const std::vector<GridTuple>& tuples,
                          const RateTarget& target) {
  if (tuples.empty())
    throw std::invalid_argument("min_qber_at_rates: empty tuple set");
  const double T = target.transmission;
  Optimum best;
  for (const auto& t : tuples) {
    bool ok;
    if (target.overall_only) {
      const double want = T * (target.baseline_p0 + target.baseline_p1);
      ok = std::abs(t.p0 + t.p1 - want) <= target.tolerance * want;
    } else {
      const double w0 = T * target.baseline_p0;
      const double w1 = T * target.baseline_p1;
      ok = std::abs(t.p0 - w0) <= target.tolerance * w0 &&
           std::abs(t.p1 - w1) <= target.tolerance * w1;
    }
    if (!ok) continue;
    if (!best.feasible || t.qber < best.qber) {
      best = {t.mu0, t.mu1, t.p0, t.p1, t.qber, true};
    }
  }
  return best;
}

double abort_threshold(const AbortModel& model, double loss_db,
                       bool* clamped) {
  const auto& a = model.anchors;
  if (a.empty()) throw std::invalid_argument("AbortModel: no anchors");
  if (clamped) *clamped = false;
  if (loss_db <= a.front().first) {
    if (clamped) *clamped = loss_db < a.front().first;
    return a.front().second;
  }
  if (loss_db >= a.back().first) {
    if (clamped) *clamped = loss_db > a.back().first;
    return a.back().second;
  }
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (loss_db <= a[i].first) {
      const double f =
          (loss_db - a[i - 1].first) / (a[i].first - a[i - 1].first);
      return a[i - 1].second + f * (a[i].second - a[i - 1].second);
    }
  }
  return a.back().second;
}

std::vector<SweepRecord> sweep_transmission(
    const std::vector<double>& t_values, const RateTarget& baseline,
    const GridSpec& grid, const attack::EtaMatrix& etas, double d,
    const AbortModel& abort) {
  const auto tuples = scan_grid(grid, etas, d);
  std::vector<SweepRecord> out;
  out.reserve(t_values.size());
  const SweepRecord* prev = nullptr;
  for (double T : t_values) {
    if (!(T > 0.0 && T <= 1.0))
      throw std::invalid_argument("sweep_transmission: T must be in (0,1]");
    SweepRecord r;
    r.transmission = T;
    r.loss_db = -10.0 * std::log10(T);
    RateTarget target = baseline;
    target.transmission = T;
    r.optimum = min_qber_at_rates(tuples, target);
    r.threshold = abort_threshold(abort, r.loss_db, &r.threshold_clamped);
    r.attack_succeeds = r.optimum.feasible &&
                        r.optimum.qber < std::min(0.07, r.threshold);
    // Flag (do not hide) any rise of the optimal QBER as T decreases.
    if (prev && prev->optimum.feasible && r.optimum.feasible &&
        prev->transmission > T &&
        r.optimum.qber > prev->optimum.qber + 1e-15) {
      r.monotone_violation = true;
    }
    out.push_back(r);
    prev = &out.back();
  }
  return out;
}

}  // namespace demsim::optimizer
