#ifndef OSOD_SAMPLER_HPP
#define OSOD_SAMPLER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "osod/errors.hpp"
#include "osod/probability.hpp"
#include "osod/rng.hpp"

namespace osod {

enum class Decision : std::uint8_t { Pending, Selected, Rejected };

inline char decision_digit(Decision d) {
  return d == Decision::Selected ? '1' : '0';
}

/// Final per-unit decisions, filled strictly in unit order.
class DecisionLedger {
 public:
  DecisionLedger() = default;
  explicit DecisionLedger(std::size_t units) : decisions_(units) {}

  std::size_t size() const noexcept { return decisions_.size(); }
  Decision operator[](std::size_t k) const { return decisions_.at(k); }

  /// Index of the first pending unit; every unit before it is decided.
  std::size_t step() const noexcept { return step_; }
  bool complete() const noexcept { return step_ == decisions_.size(); }

  /// Number of selected units, n_t.
  std::size_t decided_mass() const noexcept { return selected_; }

  /// Adds `count` pending units at the end (stream arrivals).
  void extend(std::size_t count) {
    decisions_.resize(decisions_.size() + count, Decision::Pending);
  }

  void decide(std::size_t unit, Decision d) {
    if (d == Decision::Pending) {
      throw std::logic_error("cannot record a pending decision");
    }
    if (unit != step_ || unit >= decisions_.size()) {
      throw std::logic_error("decisions must be recorded in unit order");
    }
    decisions_[unit] = d;
    if (d == Decision::Selected) ++selected_;
    ++step_;
  }

  /// 0/1 indicator; pending units read as 0.
  std::vector<std::uint8_t> indicator() const {
    std::vector<std::uint8_t> out(decisions_.size());
    std::transform(decisions_.begin(), decisions_.end(), out.begin(),
                   [](Decision d) { return d == Decision::Selected ? 1 : 0; });
    return out;
  }

 private:
  std::vector<Decision> decisions_;
  std::size_t selected_ = 0;
  std::size_t step_ = 0;
};

struct RejectUpdate {
  ProbabilityVector updated;
  double c = 1.0;
};

struct StepOutcome {
  Decision decision = Decision::Pending;
  ProbabilityVector updated;
  double c = 1.0;
};

namespace detail {

// Rejection branch on a window whose head is window[0]: the tail absorbs the
// whole window mass `target`. Writes min(c * p_k, 1) into `out` and returns c.
inline double reject_tail(std::span<const double> window, double target,
                          std::span<double> out, const Tolerance& tol) {
  const auto tail = window.subspan(1);
  const double c = scaling_constant(tail, target, tol);
  for (std::size_t k = 0; k < tail.size(); ++k) {
    const double v = c * tail[k];
    out[k] = (tail[k] > 0.0 && v >= 1.0 - tol.eps) ? 1.0
                                                    : clamp_unit(v, tol.eps);
  }
  return c;
}

// Selection branch: (p_k - r_k (1 - p_head)) / p_head for every tail entry.
inline void accept_tail(std::span<const double> window,
                        std::span<const double> rejected, std::span<double> out,
                        std::size_t base_index, const Tolerance& tol) {
  const double head = window[0];
  const auto tail = window.subspan(1);
  for (std::size_t k = 0; k < tail.size(); ++k) {
    const double v = (tail[k] - rejected[k] * (1.0 - head)) / head;
    if (v < -tol.eps) throw NegativeProbability(base_index + 1 + k, v);
    out[k] = std::min(clamp_unit(v, tol.eps), 1.0);
  }
}

// Decides the head of `window` in place and rewrites the tail. `target` is
// the window mass; `base_index` is the global index of the head (for error
// reporting). Heads already at 0 or 1 leave the tail untouched. With
// `verify_both`, a rejection still builds the selection branch so a step
// that could go negative fails whatever the draw.
inline double apply_decision(std::span<double> window, double target,
                             Decision d, std::size_t base_index,
                             const Tolerance& tol, bool verify_both = false) {
  const double head = window[0];
  if (is_decided(head)) {
    if ((head == 1.0) != (d == Decision::Selected)) {
      throw std::logic_error("decision contradicts a deterministic unit");
    }
    return 1.0;
  }
  std::vector<double> rejected(window.size() - 1);
  const double c = reject_tail(window, target, rejected, tol);
  auto tail = window.subspan(1);
  if (d == Decision::Rejected) {
    if (verify_both) {
      std::vector<double> accepted(rejected.size());
      accept_tail(window, rejected, accepted, base_index, tol);
    }
    std::copy(rejected.begin(), rejected.end(), tail.begin());
    window[0] = 0.0;
  } else {
    accept_tail(window, rejected, tail, base_index, tol);
    window[0] = 1.0;
  }
  return c;
}

inline std::size_t window_end(const ProbabilityVector& probs, std::size_t t,
                              std::size_t end) {
  if (t >= probs.size()) throw std::out_of_range("step index past the end");
  end = std::min(end, probs.size());
  if (end <= t) throw std::out_of_range("empty window");
  return end;
}

}  // namespace detail

/// Rejection branch at step t: unit t drops to 0 and units t+1..end-1 are
/// scaled up by the constant c so the window keeps its mass.
inline RejectUpdate update_on_reject(
    const ProbabilityVector& probs, std::size_t t, const Tolerance& tol = {},
    std::size_t end = std::numeric_limits<std::size_t>::max()) {
  end = detail::window_end(probs, t, end);
  std::vector<double> out = probs.vector();
  std::span<const double> window(out.data() + t, end - t);
  const double target = stable_sum(window);
  std::vector<double> tail(window.size() - 1);
  const double c = detail::reject_tail(window, target, tail, tol);
  std::copy(tail.begin(), tail.end(), out.begin() + t + 1);
  out[t] = 0.0;
  return {ProbabilityVector::unchecked(std::move(out)), c};
}

/// Selection branch at step t, built from the matching rejection branch.
/// Throws NegativeProbability when an entry falls below -eps.
inline ProbabilityVector update_on_accept(
    const ProbabilityVector& probs, std::size_t t, const RejectUpdate& rejected,
    const Tolerance& tol = {},
    std::size_t end = std::numeric_limits<std::size_t>::max()) {
  end = detail::window_end(probs, t, end);
  if (!(probs[t] > 0.0)) {
    throw std::invalid_argument("selection branch needs a positive head");
  }
  std::vector<double> out = probs.vector();
  std::span<const double> window(out.data() + t, end - t);
  std::span<const double> rej(rejected.updated.vector().data() + t + 1,
                              end - t - 1);
  std::vector<double> tail(window.size() - 1);
  detail::accept_tail(window, rej, tail, t, tol);
  std::copy(tail.begin(), tail.end(), out.begin() + t + 1);
  out[t] = 1.0;
  return ProbabilityVector::unchecked(std::move(out));
}

/// One draw of the one-step kernel: selected iff u < pi_t.
inline StepOutcome decide_step(
    const ProbabilityVector& probs, std::size_t t, double u,
    const Tolerance& tol = {},
    std::size_t end = std::numeric_limits<std::size_t>::max()) {
  end = detail::window_end(probs, t, end);
  std::vector<double> out = probs.vector();
  std::span<double> window(out.data() + t, end - t);
  StepOutcome step;
  step.decision = u < probs[t] ? Decision::Selected : Decision::Rejected;
  step.c = detail::apply_decision(window, stable_sum(window), step.decision, t,
                                  tol);
  step.updated = ProbabilityVector::unchecked(std::move(out));
  return step;
}

struct SamplerReport {
  /// Largest |sum(updated) - sum(input)| seen at the periodic re-sums.
  double conservation_residual = 0.0;
  std::size_t draws = 0;
  /// Step at which every remaining unit was already 0 or 1.
  std::size_t stopped_at = 0;
};

/// Fixed-population sampler: one decision per unit in list order, with the
/// whole undecided remainder as compensation window.
///
/// Units already at 0 or 1 consume no random draw. The pending mass is
/// carried forward per step and re-summed every 64 steps. Every random step
/// checks both branches, so NegativeProbability does not depend on the draw.
template <class UniformSource>
  requires requires(UniformSource& r) { r.uniform(); }
DecisionLedger sample_population(const ProbabilityVector& probs,
                                 UniformSource& rng, const Tolerance& tol,
                                 SamplerReport& report) {
  constexpr std::size_t kResumEvery = 64;
  const std::size_t n_units = probs.size();
  std::vector<double> p = probs.vector();
  const double total = probs.sum();
  DecisionLedger ledger(n_units);
  report = SamplerReport{};

  double pending = total;
  std::size_t t = 0;
  for (; t < n_units; ++t) {
    const bool all_decided = std::all_of(p.begin() + static_cast<long>(t),
                                         p.end(), is_decided);
    if (all_decided) break;
    if (t % kResumEvery == 0) {
      pending = stable_sum(std::span<const double>(p).subspan(t));
      const double residual = std::abs(stable_sum(p) - total);
      report.conservation_residual =
          std::max(report.conservation_residual, residual);
    }
    Decision d;
    if (p[t] == 1.0) {
      d = Decision::Selected;
    } else if (p[t] == 0.0) {
      d = Decision::Rejected;
    } else {
      ++report.draws;
      d = rng.uniform() < p[t] ? Decision::Selected : Decision::Rejected;
    }
    std::span<double> window(p.data() + t, n_units - t);
    detail::apply_decision(window, pending, d, t, tol, true);
    ledger.decide(t, d);
    pending -= d == Decision::Selected ? 1.0 : 0.0;
  }
  report.stopped_at = t;
  for (; t < n_units; ++t) {
    ledger.decide(t, p[t] == 1.0 ? Decision::Selected : Decision::Rejected);
  }
  report.conservation_residual =
      std::max(report.conservation_residual, std::abs(stable_sum(p) - total));
  return ledger;
}

template <class UniformSource>
  requires requires(UniformSource& r) { r.uniform(); }
DecisionLedger sample_population(const ProbabilityVector& probs,
                                 UniformSource& rng,
                                 const Tolerance& tol = {}) {
  SamplerReport report;
  return sample_population(probs, rng, tol, report);
}

inline DecisionLedger sample_population(const ProbabilityVector& probs,
                                        std::uint64_t seed,
                                        const Tolerance& tol = {}) {
  Rng rng(seed);
  return sample_population(probs, rng, tol);
}

}  // namespace osod

#endif  // OSOD_SAMPLER_HPP
