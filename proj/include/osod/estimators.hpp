#ifndef OSOD_ESTIMATORS_HPP
#define OSOD_ESTIMATORS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "osod/errors.hpp"
#include "osod/oracle.hpp"
#include "osod/probability.hpp"

namespace osod {

/// Variable of interest aligned with the inclusion probabilities.
struct PopulationData {
  std::vector<std::string> ids;
  std::vector<double> y;

  double total() const { return stable_sum(y); }
};

namespace detail {

inline void check_lengths(std::size_t sample, std::size_t y, std::size_t pi) {
  if (sample != y || y != pi) {
    throw std::invalid_argument("sample, y and probabilities differ in length");
  }
}

}  // namespace detail

/// Expansion estimator of the total: sum over the sample of y_k / pi_k.
inline double ht_estimate(std::span<const std::uint8_t> sample,
                          std::span<const double> y,
                          const ProbabilityVector& probs) {
  detail::check_lengths(sample.size(), y.size(), probs.size());
  double total = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    if (!sample[k]) continue;
    if (!(probs[k] > 0.0)) throw ZeroProbabilitySelected(k);
    total += y[k] / probs[k];
  }
  return total;
}

/// Design variance of the expansion estimator from second-order inclusion
/// probabilities (double sum over the population).
inline double true_variance(const JointInclusionMatrix& joint,
                            std::span<const double> y,
                            const ProbabilityVector& probs) {
  const std::size_t n = probs.size();
  if (joint.size() != n || y.size() != n) {
    throw std::invalid_argument("joint matrix, y and probabilities differ");
  }
  std::vector<double> expanded(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (probs[k] > 0.0) expanded[k] = y[k] / probs[k];
  }
  double var = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(probs[k] > 0.0)) continue;
    for (std::size_t l = 0; l < n; ++l) {
      if (!(probs[l] > 0.0)) continue;
      var += (joint(k, l) - probs[k] * probs[l]) * expanded[k] * expanded[l];
    }
  }
  return var;
}

inline double true_variance(const DesignTable& design,
                            std::span<const double> y,
                            const ProbabilityVector& probs) {
  return true_variance(joint_inclusion(design), y, probs);
}

/// Same quantity as a moment over the design: sum_s p(s) (Yhat(s) - Y)^2.
inline double design_moment_variance(const DesignTable& design,
                                     std::span<const double> y,
                                     const ProbabilityVector& probs) {
  const double total = stable_sum(y);
  double var = 0.0;
  for (const auto& [bits, p] : design.entries) {
    const double dev = ht_estimate(to_indicator(bits), y, probs) - total;
    var += p * dev * dev;
  }
  return var;
}

/// Expected value of the expansion estimator over the design.
inline double design_expectation(const DesignTable& design,
                                 std::span<const double> y,
                                 const ProbabilityVector& probs) {
  double mean = 0.0;
  for (const auto& [bits, p] : design.entries) {
    mean += p * ht_estimate(to_indicator(bits), y, probs);
  }
  return mean;
}

/// Plug-in variance estimator over the selected pairs, weighting each pair
/// by (pi_kl - pi_k pi_l) / pi_kl.
inline double variance_estimate(std::span<const std::uint8_t> sample,
                                const JointInclusionMatrix& joint,
                                std::span<const double> y,
                                const ProbabilityVector& probs) {
  detail::check_lengths(sample.size(), y.size(), probs.size());
  if (joint.size() != probs.size()) {
    throw std::invalid_argument("joint matrix and probabilities differ");
  }
  std::vector<std::size_t> in;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    if (!sample[k]) continue;
    if (!(probs[k] > 0.0)) throw ZeroProbabilitySelected(k);
    in.push_back(k);
  }
  double var = 0.0;
  for (std::size_t k : in) {
    for (std::size_t l : in) {
      const double joint_kl = joint(k, l);
      if (!(joint_kl > 0.0)) throw ZeroJointProbability(k, l);
      var += (joint_kl - probs[k] * probs[l]) / joint_kl * (y[k] / probs[k]) *
             (y[l] / probs[l]);
    }
  }
  return var;
}

}  // namespace osod

#endif  // OSOD_ESTIMATORS_HPP
