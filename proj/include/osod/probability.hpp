#ifndef OSOD_PROBABILITY_HPP
#define OSOD_PROBABILITY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "osod/errors.hpp"

namespace osod {

/// Snaps `v` to exactly 0 or 1 when it lies within `eps` of either bound.
inline double snap(double v, double eps) noexcept {
  if (std::abs(v) <= eps) return 0.0;
  if (std::abs(v - 1.0) <= eps) return 1.0;
  return v;
}

/// Clamps arithmetic noise back into [0, 1]. Values below -eps are left
/// alone so callers can still detect them.
inline double clamp_unit(double v, double eps) noexcept {
  v = snap(v, eps);
  if (v < 0.0 && v >= -eps) return 0.0;
  if (v > 1.0 && v <= 1.0 + eps) return 1.0;
  return v;
}

inline bool is_decided(double v) noexcept { return v == 0.0 || v == 1.0; }

inline bool is_integer(double v, double eps) noexcept {
  return std::abs(v - std::round(v)) <= eps;
}

/// Compensated sum; window sums feed integer-ness tests.
inline double stable_sum(std::span<const double> values) noexcept {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

/// Ordered first-order inclusion probabilities, every entry in [0, 1].
class ProbabilityVector {
 public:
  ProbabilityVector() = default;

  /// Wraps values the caller already knows to be in [0, 1].
  static ProbabilityVector unchecked(std::vector<double> values) {
    ProbabilityVector p;
    p.values_ = std::move(values);
    return p;
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }
  double sum() const noexcept { return stable_sum(values_); }

  friend bool operator==(const ProbabilityVector&,
                         const ProbabilityVector&) = default;

 private:
  std::vector<double> values_;
};

/// Checks every value against [-eps, 1 + eps] and snaps it into [0, 1].
inline ProbabilityVector validate(std::span<const double> values,
                                  const Tolerance& tol = {}) {
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v) || v < -tol.eps || v > 1.0 + tol.eps) {
      throw OutOfRange(i, v);
    }
    out.push_back(std::clamp(snap(v, tol.eps), 0.0, 1.0));
  }
  return ProbabilityVector::unchecked(std::move(out));
}

inline ProbabilityVector validate(std::initializer_list<double> values,
                                  const Tolerance& tol = {}) {
  return validate(std::span<const double>(values.begin(), values.size()),
                  tol);
}

/// Result of capped proportional scaling: scaled_k = min(c * p_k, 1).
struct ScalingSolution {
  double c = 0.0;
  std::vector<std::size_t> capped;
  ProbabilityVector scaled;
};

namespace detail {

// Smallest c with sum_k min(c * p_k, 1) == target, by bisection. Only used
// when the closed-form water-filling pass cannot certify its candidate.
inline double bisect_scaling(std::span<const double> probs, double target) {
  auto mass = [&](double c) {
    double s = 0.0;
    for (double p : probs) s += std::min(c * p, 1.0);
    return s;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (mass(hi) < target && hi < 1e300) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace detail

/// Solves sum_k min(c * p_k, 1) == target for the smallest such c >= 0.
///
/// Sort-based water-filling: with entries in descending order, the capped
/// set is always a prefix, so each candidate prefix length j gives
/// c = (target - j) / sum(uncapped) and the first self-consistent j wins.
inline double scaling_constant(std::span<const double> probs, double target,
                               const Tolerance& tol = {}) {
  std::size_t positive = 0;
  double min_positive = 1.0;
  for (double p : probs) {
    if (p > 0.0) {
      ++positive;
      min_positive = std::min(min_positive, p);
    }
  }
  if (target < -tol.eps) {
    throw Infeasible("negative scaling target " + std::to_string(target));
  }
  if (target > static_cast<double>(positive) + tol.eps) {
    throw Infeasible("scaling target " + std::to_string(target) +
                     " exceeds the " + std::to_string(positive) +
                     " units with positive probability");
  }
  if (target <= tol.eps) return 0.0;
  if (target >= static_cast<double>(positive) - tol.eps) {
    return 1.0 / min_positive;
  }

  std::vector<double> sorted;
  sorted.reserve(positive);
  for (double p : probs) {
    if (p > 0.0) sorted.push_back(p);
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<double> suffix(sorted.size() + 1, 0.0);
  for (std::size_t j = sorted.size(); j-- > 0;) {
    suffix[j] = suffix[j + 1] + sorted[j];
  }

  constexpr double kRel = 1e-12;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    const double rest = target - static_cast<double>(j);
    if (rest <= 0.0) break;
    const double c = rest / suffix[j];
    const bool prefix_capped = j == 0 || sorted[j - 1] * c >= 1.0 - kRel;
    const bool head_uncapped = sorted[j] * c <= 1.0 + kRel;
    if (prefix_capped && head_uncapped) return c;
  }
  return detail::bisect_scaling(probs, target);
}

inline ScalingSolution solve_scaling_constant(std::span<const double> probs,
                                              double target,
                                              const Tolerance& tol = {}) {
  ScalingSolution out;
  out.c = scaling_constant(probs, target, tol);
  std::vector<double> scaled(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double v = out.c * probs[k];
    if (probs[k] > 0.0 && v >= 1.0 - tol.eps) {
      out.capped.push_back(k);
      scaled[k] = 1.0;
    } else {
      scaled[k] = clamp_unit(v, tol.eps);
    }
  }
  out.scaled = ProbabilityVector::unchecked(std::move(scaled));
  return out;
}

inline ScalingSolution solve_scaling_constant(const ProbabilityVector& probs,
                                              double target,
                                              const Tolerance& tol = {}) {
  return solve_scaling_constant(probs.values(), target, tol);
}

/// Both compensation sums over the undecided tail [t, N) are at least one:
/// there is mass to hand out on rejection and room to take it back on
/// selection.
inline bool check_step_feasibility(const ProbabilityVector& probs,
                                   std::size_t t, const Tolerance& tol = {}) {
  if (t >= probs.size()) return false;
  const auto tail = probs.values().subspan(t);
  const double mass = stable_sum(tail);
  const double room = static_cast<double>(tail.size()) - mass;
  return mass >= 1.0 - tol.eps && room >= 1.0 - tol.eps;
}

/// Certificate that the selection branch keeps every updated probability
/// non-negative: pi_t >= 1 - 1/c.
inline bool result1_condition(double pi_t, double c,
                              const Tolerance& tol = {}) {
  if (!(c > 0.0)) {
    throw std::invalid_argument("scaling constant must be positive");
  }
  return pi_t >= 1.0 - 1.0 / c - tol.eps;
}

/// Inclusion probabilities proportional to a positive auxiliary variable,
/// capped at one, summing to `n`.
inline ProbabilityVector inclusion_from_auxiliary(std::span<const double> x,
                                                  double n,
                                                  const Tolerance& tol = {}) {
  if (x.empty()) {
    throw std::invalid_argument("auxiliary variable is empty");
  }
  double max_x = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || x[k] <= 0.0) throw OutOfRange(k, x[k]);
    max_x = std::max(max_x, x[k]);
  }
  if (!(n > 0.0)) {
    throw Infeasible("sample size must be positive");
  }
  if (n > static_cast<double>(x.size()) + tol.eps) {
    throw Infeasible("sample size " + std::to_string(n) +
                     " exceeds population size " + std::to_string(x.size()));
  }
  std::vector<double> relative(x.size());
  std::transform(x.begin(), x.end(), relative.begin(),
                 [max_x](double v) { return v / max_x; });
  return solve_scaling_constant(relative, n, tol).scaled;
}

}  // namespace osod

#endif  // OSOD_PROBABILITY_HPP
