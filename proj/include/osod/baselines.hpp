#ifndef OSOD_BASELINES_HPP
#define OSOD_BASELINES_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "osod/errors.hpp"
#include "osod/probability.hpp"
#include "osod/rng.hpp"

namespace osod {

namespace detail {

inline std::vector<std::size_t> list_order(std::size_t n, bool permuted,
                                           Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (permuted) rng.shuffle(order.begin(), order.end());
  return order;
}

}  // namespace detail

/// Systematic sampling with unequal probabilities. With cumulated sums V,
/// unit k is selected when some u + j (j = 0..n-1) falls in [V_{k-1}, V_k).
/// With `permuted`, the list is put in random order first.
inline std::vector<std::uint8_t> systematic_sample(
    const ProbabilityVector& probs, double u, bool permuted, Rng& rng,
    const Tolerance& tol = {}) {
  const double n = probs.sum();
  if (!is_integer(n, tol.eps) || std::round(n) < 1.0) throw NonIntegerSize(n);
  if (!(u >= 0.0 && u < 1.0)) {
    throw std::invalid_argument("systematic start must lie in [0, 1)");
  }
  const auto order = detail::list_order(probs.size(), permuted, rng);
  std::vector<std::uint8_t> out(probs.size(), 0);
  // Hits below V are the integers j >= 0 with u + j < V, i.e. ceil(V - u).
  auto hits_below = [&](double v) {
    if (is_integer(v, tol.eps)) v = std::round(v);
    return std::max(0.0, std::ceil(v - u));
  };
  double cumulated = 0.0;
  double before = hits_below(0.0);
  for (std::size_t k : order) {
    cumulated += probs[k];
    const double after = hits_below(cumulated);
    out[k] = after > before ? 1 : 0;
    before = after;
  }
  return out;
}

inline std::vector<std::uint8_t> systematic_sample(
    const ProbabilityVector& probs, bool permuted, Rng& rng,
    const Tolerance& tol = {}) {
  const double u = rng.uniform();
  return systematic_sample(probs, u, permuted, rng, tol);
}

/// Ordered pivotal method: the two first undecided units fight, one of them
/// is settled at 0 or 1 and the other carries the remaining mass forward.
/// A unit still fractional at the end of the list (non-integer total) is
/// settled by one Bernoulli draw on its residual probability.
inline std::vector<std::uint8_t> pivotal_sample(const ProbabilityVector& probs,
                                                Rng& rng, bool permuted = false,
                                                const Tolerance& tol = {}) {
  const auto order = detail::list_order(probs.size(), permuted, rng);
  std::vector<std::uint8_t> out(probs.size(), 0);
  std::size_t carrier = 0;
  double carried = 0.0;
  bool holding = false;
  for (std::size_t k : order) {
    const double p = probs[k];
    if (is_decided(p)) {
      out[k] = p == 1.0 ? 1 : 0;
      continue;
    }
    if (!holding) {
      carrier = k;
      carried = p;
      holding = true;
      continue;
    }
    const double a = carried;
    const double b = p;
    const double s = a + b;
    if (s <= 1.0) {
      // One unit takes a + b, the other drops to 0.
      if (rng.uniform() < a / s) {
        out[k] = 0;
        carried = snap(s, tol.eps);
      } else {
        out[carrier] = 0;
        carrier = k;
        carried = snap(s, tol.eps);
      }
    } else {
      // One unit is selected, the other keeps a + b - 1.
      if (rng.uniform() < (1.0 - b) / (2.0 - s)) {
        out[carrier] = 1;
        carrier = k;
        carried = snap(s - 1.0, tol.eps);
      } else {
        out[k] = 1;
        carried = snap(s - 1.0, tol.eps);
      }
    }
    if (is_decided(carried)) {
      out[carrier] = carried == 1.0 ? 1 : 0;
      holding = false;
    }
  }
  if (holding) out[carrier] = rng.uniform() < carried ? 1 : 0;
  return out;
}

}  // namespace osod

#endif  // OSOD_BASELINES_HPP
