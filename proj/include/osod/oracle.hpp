#ifndef OSOD_ORACLE_HPP
#define OSOD_ORACLE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "osod/errors.hpp"
#include "osod/probability.hpp"
#include "osod/rng.hpp"
#include "osod/sampler.hpp"
#include "osod/stream.hpp"

namespace osod {

/// A sample as a string of '0'/'1', one character per unit in list order.
using SampleBits = std::string;

inline std::vector<std::uint8_t> to_indicator(const SampleBits& bits) {
  std::vector<std::uint8_t> out(bits.size());
  for (std::size_t k = 0; k < bits.size(); ++k) out[k] = bits[k] == '1';
  return out;
}

inline SampleBits to_bits(const std::vector<std::uint8_t>& indicator) {
  SampleBits out(indicator.size(), '0');
  for (std::size_t k = 0; k < indicator.size(); ++k) {
    if (indicator[k]) out[k] = '1';
  }
  return out;
}

enum class DesignSource { Exact, MonteCarlo };

/// Sampling design p(s): probability of every sample in its support.
struct DesignTable {
  std::map<SampleBits, double> entries;
  DesignSource source = DesignSource::Exact;
  std::size_t replications = 0;
  std::size_t units = 0;
  /// Probability mass of branches dropped by the enumerator's pruning.
  double pruned_mass = 0.0;

  double total() const {
    double s = 0.0;
    for (const auto& [bits, p] : entries) s += p;
    return s;
  }

  double probability(const SampleBits& s) const {
    const auto it = entries.find(s);
    return it == entries.end() ? 0.0 : it->second;
  }
};

struct EnumerationOptions {
  std::size_t max_units = 20;
  double prune_below = 1e-15;
};

/// Exact design of the windowed sampler under `policy`, by expanding both
/// branches of every random decision with weights pi and 1 - pi.
///
/// The branches are taken through StreamSampler::decide_head, the same
/// step the sampler uses, so the table certifies the shipped kernel.
inline DesignTable enumerate_design(const ProbabilityVector& probs,
                                    const WindowPolicy& policy,
                                    const Tolerance& tol = {},
                                    const EnumerationOptions& options = {}) {
  const std::size_t n_units = probs.size();
  if (n_units > options.max_units) {
    throw TooLarge("exact enumeration is capped at " +
                   std::to_string(options.max_units) + " units, got " +
                   std::to_string(n_units));
  }
  DesignTable table;
  table.units = n_units;

  std::function<void(StreamSampler, std::size_t, SampleBits, double)> explore;
  explore = [&](StreamSampler engine, std::size_t fed, SampleBits bits,
                double weight) {
    for (;;) {
      if (engine.idle() && fed == n_units) {
        table.entries[bits] += weight;
        return;
      }
      if (engine.idle()) {
        engine.append({std::to_string(fed), probs[fed]});
        ++fed;
        continue;
      }
      const auto verdict = engine.next_window(fed == n_units);
      if (verdict.kind == WindowVerdict::Kind::NeedMoreUnits) {
        engine.append({std::to_string(fed), probs[fed]});
        ++fed;
        continue;
      }
      if (verdict.kind == WindowVerdict::Kind::MustPhantom) {
        if (fed < n_units && !policy.allow_midstream_phantom) {
          throw BufferOverflow("enumeration needs a mid-stream phantom");
        }
        engine.add_phantom();
        continue;
      }
      const double p = engine.head_probability();
      if (is_decided(p)) {
        const auto d = p == 1.0 ? Decision::Selected : Decision::Rejected;
        bits.push_back(decision_digit(engine.decide_head(verdict.m, d).decision));
        continue;
      }
      const double w_selected = weight * p;
      const double w_rejected = weight * (1.0 - p);
      if (w_selected >= options.prune_below) {
        StreamSampler selected = engine;
        selected.decide_head(verdict.m, Decision::Selected);
        explore(std::move(selected), fed, bits + '1', w_selected);
      } else {
        table.pruned_mass += w_selected;
      }
      if (w_rejected < options.prune_below) {
        table.pruned_mass += w_rejected;
        return;
      }
      engine.decide_head(verdict.m, Decision::Rejected);
      bits.push_back('0');
      weight = w_rejected;
    }
  };
  explore(StreamSampler(policy, tol), 0, SampleBits{}, 1.0);
  return table;
}

/// Empirical design over `replications` independent seeded runs.
inline DesignTable monte_carlo_design(const ProbabilityVector& probs,
                                      const WindowPolicy& policy,
                                      std::size_t replications,
                                      std::uint64_t seed,
                                      const Tolerance& tol = {}) {
  if (replications < 1) {
    throw std::invalid_argument("replications must be at least 1");
  }
  const auto units = as_stream(probs);
  std::vector<SampleBits> samples(replications);
  for_each_replication(replications, seed, [&](std::size_t r, Rng& rng) {
    samples[r] = to_bits(run_stream(units, policy, rng, tol).ledger.indicator());
  });
  DesignTable table;
  table.source = DesignSource::MonteCarlo;
  table.replications = replications;
  table.units = probs.size();
  std::map<SampleBits, std::size_t> counts;
  for (const auto& s : samples) ++counts[s];
  for (const auto& [bits, count] : counts) {
    table.entries[bits] =
        static_cast<double>(count) / static_cast<double>(replications);
  }
  return table;
}

/// Symmetric matrix of second-order inclusion probabilities; the diagonal
/// holds the first-order ones.
class JointInclusionMatrix {
 public:
  JointInclusionMatrix() = default;
  explicit JointInclusionMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t k, std::size_t l) const {
    return data_.at(k * n_ + l);
  }
  double& operator()(std::size_t k, std::size_t l) {
    return data_.at(k * n_ + l);
  }
  double first_order(std::size_t k) const { return (*this)(k, k); }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

inline JointInclusionMatrix joint_inclusion(const DesignTable& design) {
  JointInclusionMatrix pi(design.units);
  std::vector<std::size_t> in;
  for (const auto& [bits, p] : design.entries) {
    if (bits.size() != design.units) {
      throw std::invalid_argument("sample length does not match the design");
    }
    in.clear();
    for (std::size_t k = 0; k < bits.size(); ++k) {
      if (bits[k] == '1') in.push_back(k);
    }
    for (std::size_t k : in) {
      for (std::size_t l : in) pi(k, l) += p;
    }
  }
  return pi;
}

}  // namespace osod

#endif  // OSOD_ORACLE_HPP
