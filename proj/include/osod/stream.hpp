#ifndef OSOD_STREAM_HPP
#define OSOD_STREAM_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "osod/errors.hpp"
#include "osod/probability.hpp"
#include "osod/rng.hpp"
#include "osod/sampler.hpp"

namespace osod {

enum class WindowMode {
  /// Smallest window that is either integer-sum or passes the
  /// non-negativity certificate.
  SmallestAdmissible,
  /// Smallest window whose mass is an integer; the certificate is not used.
  IntegerSumFirst,
  /// At least `fixed_size` units (head included), grown until admissible.
  FixedSize,
  /// The whole buffer at end of stream (or when the buffer is full).
  FullBuffer,
};

struct WindowPolicy {
  static constexpr std::size_t kDefaultMaxBuffer = 1u << 16;

  WindowMode mode = WindowMode::SmallestAdmissible;
  std::size_t fixed_size = 1;
  std::size_t max_buffer = kDefaultMaxBuffer;
  bool allow_midstream_phantom = true;

  static WindowPolicy smallest() { return {}; }
  static WindowPolicy integer_sum() {
    WindowPolicy p;
    p.mode = WindowMode::IntegerSumFirst;
    return p;
  }
  static WindowPolicy fixed(std::size_t m) {
    WindowPolicy p;
    p.mode = WindowMode::FixedSize;
    p.fixed_size = m;
    return p;
  }
  static WindowPolicy full() {
    WindowPolicy p;
    p.mode = WindowMode::FullBuffer;
    return p;
  }

  void check() const {
    if (mode == WindowMode::FixedSize && fixed_size < 1) {
      throw std::invalid_argument("fixed window size must be at least 1");
    }
    if (max_buffer < 1) {
      throw std::invalid_argument("max_buffer must be at least 1");
    }
  }
};

/// Textual form used by the CLI: smallest | integer | fixed:<m> | full.
inline std::string to_string(const WindowPolicy& p) {
  switch (p.mode) {
    case WindowMode::SmallestAdmissible:
      return "smallest";
    case WindowMode::IntegerSumFirst:
      return "integer";
    case WindowMode::FixedSize:
      return "fixed:" + std::to_string(p.fixed_size);
    case WindowMode::FullBuffer:
      return "full";
  }
  return "unknown";
}

inline WindowPolicy parse_window_policy(std::string_view text) {
  if (text == "smallest") return WindowPolicy::smallest();
  if (text == "integer") return WindowPolicy::integer_sum();
  if (text == "full") return WindowPolicy::full();
  constexpr std::string_view kFixed = "fixed:";
  if (text.starts_with(kFixed)) {
    const auto digits = text.substr(kFixed.size());
    std::size_t m = 0;
    const auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), m);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && m >= 1) {
      return WindowPolicy::fixed(m);
    }
  }
  throw std::invalid_argument("unknown window policy '" + std::string(text) +
                              "'");
}

struct StreamUnit {
  std::string id;
  double probability = 0.0;
};

struct BufferedUnit {
  std::string id;
  double probability = 0.0;
  /// Arrival index of the unit; phantoms carry the index of the last arrival.
  std::size_t arrival = 0;
  bool phantom = false;
};

/// Artificial last unit lifting the buffer mass to the next integer.
struct PhantomUnit {
  double probability = 1.0;
  static constexpr bool is_phantom = true;
};

struct WindowState {
  std::deque<BufferedUnit> buffer;
  double buffer_sum = 0.0;
  /// Arrival index of the buffer head.
  std::size_t next_decision_index = 0;

  std::vector<double> probabilities() const {
    std::vector<double> out;
    out.reserve(buffer.size());
    for (const auto& u : buffer) out.push_back(u.probability);
    return out;
  }
};

struct WindowVerdict {
  enum class Kind { Admissible, NeedMoreUnits, MustPhantom };
  Kind kind = Kind::NeedMoreUnits;
  std::size_t m = 0;

  static WindowVerdict admissible(std::size_t m) {
    return {Kind::Admissible, m};
  }
  friend bool operator==(const WindowVerdict&, const WindowVerdict&) = default;
};

/// True when deciding window[0] with `window` as compensation set cannot
/// produce a negative probability under `mode`.
inline bool window_admissible(std::span<const double> window, WindowMode mode,
                              const Tolerance& tol = {}) {
  if (window.empty()) return false;
  if (is_decided(window[0])) return true;
  const double mass = stable_sum(window);
  if (is_integer(mass, tol.eps)) return true;
  if (mode == WindowMode::IntegerSumFirst || window.size() < 2) return false;
  double c = 0.0;
  try {
    c = scaling_constant(window.subspan(1), mass, tol);
  } catch (const Infeasible&) {
    return false;
  }
  return c > 0.0 && result1_condition(window[0], c, tol);
}

/// Picks the compensation window for the buffer head.
///
/// Window sizes below `first_candidate` are skipped; callers pass the
/// sizes they already know to be inadmissible.
inline WindowVerdict find_window(const WindowState& state,
                                 const WindowPolicy& policy,
                                 bool stream_ended, const Tolerance& tol = {},
                                 std::size_t first_candidate = 1) {
  if (state.buffer.empty()) {
    throw std::logic_error("find_window on an empty buffer");
  }
  const std::vector<double> probs = state.probabilities();
  const std::size_t len = probs.size();
  if (is_decided(probs[0])) return WindowVerdict::admissible(1);

  const bool can_wait = !stream_ended && len < policy.max_buffer;
  const auto no_window = [&] {
    return can_wait ? WindowVerdict{WindowVerdict::Kind::NeedMoreUnits, 0}
                    : WindowVerdict{WindowVerdict::Kind::MustPhantom, 0};
  };
  const std::span<const double> all(probs);

  std::size_t lo = std::max<std::size_t>(first_candidate, 1);
  WindowMode test_mode = WindowMode::SmallestAdmissible;
  switch (policy.mode) {
    case WindowMode::FullBuffer:
      if (can_wait) return no_window();
      return window_admissible(all, test_mode, tol)
                 ? WindowVerdict::admissible(len)
                 : no_window();
    case WindowMode::FixedSize:
      if (len < policy.fixed_size) {
        if (can_wait) return no_window();
        lo = std::max(lo, len);
      } else {
        lo = std::max(lo, policy.fixed_size);
      }
      break;
    case WindowMode::IntegerSumFirst:
      test_mode = WindowMode::IntegerSumFirst;
      break;
    case WindowMode::SmallestAdmissible:
      break;
  }
  for (std::size_t m = lo; m <= len; ++m) {
    if (window_admissible(all.first(m), test_mode, tol)) {
      return WindowVerdict::admissible(m);
    }
  }
  return no_window();
}

struct Emission {
  std::string id;
  /// Arrival index of the decided unit.
  std::size_t index = 0;
  Decision decision = Decision::Pending;
  /// Window size used for the decision (1 for deterministic units).
  std::size_t window = 1;
  /// Decided while completing a buffer through a phantom unit.
  bool via_phantom = false;
  /// Arrivals between the unit and the one that triggered its decision.
  std::size_t latency = 0;
};

struct StreamStats {
  std::size_t units_seen = 0;
  std::size_t max_buffer_occupancy = 0;
  std::size_t max_latency = 0;
  std::size_t draws = 0;
  std::size_t midstream_phantoms = 0;
  std::vector<double> phantom_probabilities;
};

/// Online one-step sampler over a stream.
///
/// Each arrival is buffered; while the buffer head has an admissible
/// window it is decided and the window tail is rewritten. Decisions are
/// final and emitted in arrival order. When no window can ever be found
/// (end of stream, or a full buffer) the buffer is completed through a
/// phantom unit and decided in one pass over the whole buffer.
///
/// The engine is a value type; copies evolve independently, which is how
/// the exact design enumerator branches.
class StreamSampler {
 public:
  explicit StreamSampler(WindowPolicy policy = {}, Tolerance tol = {})
      : policy_(policy), tol_(tol) {
    policy_.check();
    tol_.check();
  }

  const WindowPolicy& policy() const noexcept { return policy_; }
  const WindowState& state() const noexcept { return state_; }
  const StreamStats& stats() const noexcept { return stats_; }
  bool idle() const noexcept { return state_.buffer.empty(); }
  bool completing() const noexcept { return completing_; }

  template <class UniformSource>
  std::vector<Emission> push(StreamUnit unit, UniformSource& rng) {
    append(std::move(unit));
    return drive(rng, false);
  }

  /// End of stream: decides everything still buffered.
  template <class UniformSource>
  std::vector<Emission> finish(UniformSource& rng) {
    return drive(rng, true);
  }

  /// Lifts the buffer to an integer mass with a phantom (when needed, or
  /// always with `force`) and decides every buffered unit in one pass with
  /// the whole buffer as window. The phantom's own decision is dropped.
  template <class UniformSource>
  std::vector<Emission> finalize_with_phantom(UniformSource& rng,
                                              bool force = false) {
    if (state_.buffer.empty()) return {};
    add_phantom(force);
    return drive(rng, true);
  }

  // Step-level surface. `push`/`finish` are built from these; the design
  // enumerator drives them directly to branch on both decisions.

  void append(StreamUnit unit) {
    if (completing_) {
      throw std::logic_error("append while completing a phantom buffer");
    }
    if (!std::isfinite(unit.probability) ||
        unit.probability < -tol_.eps || unit.probability > 1.0 + tol_.eps) {
      throw OutOfRange(stats_.units_seen, unit.probability);
    }
    const double p = std::clamp(snap(unit.probability, tol_.eps), 0.0, 1.0);
    if (state_.buffer.empty()) state_.next_decision_index = stats_.units_seen;
    state_.buffer.push_back({std::move(unit.id), p, stats_.units_seen, false});
    state_.buffer_sum += p;
    ++stats_.units_seen;
    stats_.max_buffer_occupancy =
        std::max(stats_.max_buffer_occupancy, state_.buffer.size());
  }

  WindowVerdict next_window(bool stream_ended) {
    if (completing_) {
      return WindowVerdict::admissible(
          is_decided(state_.buffer.front().probability) ? 1
                                                        : state_.buffer.size());
    }
    const auto verdict =
        find_window(state_, policy_, stream_ended, tol_, checked_ + 1);
    const bool searched_all =
        policy_.mode == WindowMode::SmallestAdmissible ||
        policy_.mode == WindowMode::IntegerSumFirst ||
        (policy_.mode == WindowMode::FixedSize &&
         state_.buffer.size() >= policy_.fixed_size);
    if (verdict.kind != WindowVerdict::Kind::Admissible && searched_all) {
      checked_ = state_.buffer.size();
    }
    return verdict;
  }

  double head_probability() const { return state_.buffer.front().probability; }

  /// Decides the buffer head with a window of `m` units.
  Emission decide_head(std::size_t m, Decision d) {
    if (m < 1 || m > state_.buffer.size()) {
      throw std::out_of_range("window larger than the buffer");
    }
    std::vector<double> window(m);
    for (std::size_t k = 0; k < m; ++k) {
      window[k] = state_.buffer[k].probability;
    }
    detail::apply_decision(window, stable_sum(window), d,
                           state_.next_decision_index, tol_);
    for (std::size_t k = 1; k < m; ++k) {
      state_.buffer[k].probability = window[k];
    }
    BufferedUnit head = std::move(state_.buffer.front());
    state_.buffer.pop_front();
    checked_ = 0;

    Emission e;
    e.id = std::move(head.id);
    e.index = head.arrival;
    e.decision = d;
    e.window = m;
    e.via_phantom = completing_;
    e.latency = stats_.units_seen - 1 - head.arrival;
    stats_.max_latency = std::max(stats_.max_latency, e.latency);

    if (completing_ && state_.buffer.size() == 1 &&
        state_.buffer.front().phantom) {
      state_.buffer.clear();
    }
    if (state_.buffer.empty()) {
      completing_ = false;
      state_.buffer_sum = 0.0;
    } else {
      state_.buffer_sum = stable_sum(state_.probabilities());
      state_.next_decision_index = state_.buffer.front().arrival;
    }
    return e;
  }

  /// Appends the phantom unit and switches to completion mode. Returns the
  /// phantom probability, or nothing when the buffer mass is already an
  /// integer and `force` is off.
  std::optional<double> add_phantom(bool force = false) {
    if (state_.buffer.empty()) return std::nullopt;
    completing_ = true;
    checked_ = 0;
    const double mass = stable_sum(state_.probabilities());
    double p = 1.0;
    if (is_integer(mass, tol_.eps)) {
      if (!force) return std::nullopt;
    } else {
      p = std::ceil(mass) - mass;
    }
    state_.buffer.push_back(
        {"", p, stats_.units_seen == 0 ? 0 : stats_.units_seen - 1, true});
    state_.buffer_sum = mass + p;
    stats_.phantom_probabilities.push_back(p);
    return p;
  }

 private:
  template <class UniformSource>
  Decision draw(UniformSource& rng) {
    const double p = head_probability();
    if (p == 1.0) return Decision::Selected;
    if (p == 0.0) return Decision::Rejected;
    ++stats_.draws;
    return rng.uniform() < p ? Decision::Selected : Decision::Rejected;
  }

  template <class UniformSource>
  std::vector<Emission> drive(UniformSource& rng, bool stream_ended) {
    std::vector<Emission> out;
    while (!state_.buffer.empty()) {
      const auto verdict = next_window(stream_ended);
      if (verdict.kind == WindowVerdict::Kind::NeedMoreUnits) break;
      if (verdict.kind == WindowVerdict::Kind::MustPhantom) {
        if (!stream_ended) {
          if (!policy_.allow_midstream_phantom) {
            throw BufferOverflow("no admissible window within " +
                                 std::to_string(policy_.max_buffer) +
                                 " buffered units");
          }
          ++stats_.midstream_phantoms;
        }
        add_phantom();
        continue;
      }
      const Decision d = draw(rng);
      out.push_back(decide_head(verdict.m, d));
    }
    return out;
  }

  WindowPolicy policy_;
  Tolerance tol_;
  WindowState state_;
  StreamStats stats_;
  bool completing_ = false;
  std::size_t checked_ = 0;
};

struct StreamRun {
  DecisionLedger ledger;
  std::vector<Emission> emissions;
  StreamStats stats;
};

template <class Units, class UniformSource>
StreamRun run_stream(const Units& units, const WindowPolicy& policy,
                     UniformSource& rng, const Tolerance& tol = {}) {
  StreamSampler sampler(policy, tol);
  StreamRun run;
  auto record = [&run](std::vector<Emission> batch) {
    for (auto& e : batch) {
      run.ledger.decide(e.index, e.decision);
      run.emissions.push_back(std::move(e));
    }
  };
  for (const auto& unit : units) {
    run.ledger.extend(1);
    record(sampler.push(StreamUnit(unit), rng));
  }
  record(sampler.finish(rng));
  run.stats = sampler.stats();
  return run;
}

template <class Units>
DecisionLedger stream_sample(const Units& units, const WindowPolicy& policy,
                             std::uint64_t seed, const Tolerance& tol = {}) {
  Rng rng(seed);
  return run_stream(units, policy, rng, tol).ledger;
}

/// Streams a probability vector with arrival indices as ids.
inline std::vector<StreamUnit> as_stream(const ProbabilityVector& probs) {
  std::vector<StreamUnit> units;
  units.reserve(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    units.push_back({std::to_string(k), probs[k]});
  }
  return units;
}

}  // namespace osod

#endif  // OSOD_STREAM_HPP
