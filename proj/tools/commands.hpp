#ifndef OSOD_TOOLS_COMMANDS_HPP
#define OSOD_TOOLS_COMMANDS_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "osod/osod.hpp"

namespace osod::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInfeasible = 3;

struct RunConfig {
  /// Path of the input file, `-` for standard input.
  std::string input = "-";
  std::optional<std::uint64_t> seed;
  /// Value of OSOD_SEED, used when no --seed is given.
  std::optional<std::string> env_seed;
  /// Expected sample size for `id,x` inputs.
  std::optional<double> n;
  WindowPolicy policy;
  std::string method = "all";
  std::size_t replications = 10000;
  std::string format = "csv";
  bool phantom = false;
  /// simulate: size of a generated population instead of an input file.
  std::size_t synthetic = 0;
  unsigned threads = 0;
};

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

struct SeedChoice {
  std::uint64_t value = 0;
  std::string source;
};

SeedChoice resolve_seed(const RunConfig& config);

int cmd_sample(const RunConfig& config, Io io);
int cmd_stream(const RunConfig& config, Io io);
int cmd_enumerate(const RunConfig& config, Io io);
int cmd_simulate(const RunConfig& config, Io io);
int cmd_pi_from_aux(const RunConfig& config, Io io);

// Simulation core, shared with the acceptance harness.

enum class Method { Osod, Systematic, Pivotal };

std::string to_string(Method m);
std::vector<Method> parse_methods(const std::string& text);

struct SimulationPopulation {
  std::vector<std::string> ids;
  ProbabilityVector probs;
  std::vector<double> y;
};

/// Skewed population: x log-normal, pi proportional to x (capped, summing
/// to n) and y roughly proportional to x with multiplicative noise.
SimulationPopulation synthetic_population(std::size_t units, double n,
                                          std::uint64_t seed);

struct MethodSummary {
  Method method = Method::Osod;
  std::vector<double> estimates;
  std::vector<std::size_t> sizes;
  /// Empirical inclusion frequency of every unit.
  std::vector<double> inclusion;
  double mean = 0.0;
  double sd = 0.0;
  double variance = 0.0;
};

std::vector<MethodSummary> simulate(const SimulationPopulation& population,
                                    const std::vector<Method>& methods,
                                    std::size_t replications,
                                    std::uint64_t seed,
                                    const WindowPolicy& policy,
                                    unsigned threads = 0);

}  // namespace osod::cli

#endif  // OSOD_TOOLS_COMMANDS_HPP
