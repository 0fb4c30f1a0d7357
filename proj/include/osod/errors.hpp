#ifndef OSOD_ERRORS_HPP
#define OSOD_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osod {

/// Numeric tolerances shared by every module.
///
/// `eps` is the absolute band used to snap values to {0, 1}, to accept
/// near-integer sums and to tell a genuinely negative probability from
/// rounding noise. `mc_sigma` is the width, in standard deviations, of the
/// Monte Carlo acceptance bands used by the verification harness.
struct Tolerance {
  double eps = 1e-9;
  int mc_sigma = 3;

  void check() const {
    if (!(eps > 0.0 && eps < 1e-3)) {
      throw std::invalid_argument("tolerance eps must lie in (0, 1e-3)");
    }
    if (mc_sigma <= 0) {
      throw std::invalid_argument("tolerance mc_sigma must be positive");
    }
  }
};

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input probability outside [-eps, 1 + eps].
class OutOfRange : public SamplingError {
 public:
  OutOfRange(std::size_t index, double value)
      : SamplingError("probability at index " + std::to_string(index) +
                      " out of range: " + std::to_string(value)),
        index_(index),
        value_(value) {}
  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  double value_;
};

/// A scaling target that no constant can reach.
class Infeasible : public SamplingError {
 public:
  using SamplingError::SamplingError;
};

/// The selection branch produced a probability below -eps. The caller has
/// to widen the window or complete the population with a phantom unit.
class NegativeProbability : public SamplingError {
 public:
  NegativeProbability(std::size_t index, double value)
      : SamplingError("negative updated probability at index " +
                      std::to_string(index) + ": " + std::to_string(value)),
        index_(index),
        value_(value) {}
  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  double value_;
};

class TooLarge : public SamplingError {
 public:
  using SamplingError::SamplingError;
};

class ZeroProbabilitySelected : public SamplingError {
 public:
  explicit ZeroProbabilitySelected(std::size_t index)
      : SamplingError("unit " + std::to_string(index) +
                      " selected with zero inclusion probability"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ZeroJointProbability : public SamplingError {
 public:
  ZeroJointProbability(std::size_t k, std::size_t l)
      : SamplingError("joint inclusion probability of units " +
                      std::to_string(k) + " and " + std::to_string(l) +
                      " is zero"),
        k_(k),
        l_(l) {}
  std::size_t first() const noexcept { return k_; }
  std::size_t second() const noexcept { return l_; }

 private:
  std::size_t k_;
  std::size_t l_;
};

class NonIntegerSize : public SamplingError {
 public:
  explicit NonIntegerSize(double sum)
      : SamplingError("sum of inclusion probabilities is not a positive "
                      "integer: " + std::to_string(sum)),
        sum_(sum) {}
  double sum() const noexcept { return sum_; }

 private:
  double sum_;
};

class BufferOverflow : public SamplingError {
 public:
  using SamplingError::SamplingError;
};

}  // namespace osod

#endif  // OSOD_ERRORS_HPP
