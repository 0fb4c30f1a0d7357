#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <utility>

#include "csv.hpp"
#include "json.hpp"

namespace osod::cli {

namespace {

using Report = std::vector<std::pair<std::string, std::string>>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_report(std::ostream& err, const std::string& command,
                  const Report& lines) {
  err << "# osod " << OSOD_VERSION << " " << command << "\n";
  for (const auto& [key, value] : lines) err << "# " << key << ": " << value << "\n";
}

std::string seed_text(const SeedChoice& s) {
  return std::to_string(s.value) + " (" + s.source + ")";
}

class Input {
 public:
  Input(const std::string& path, std::istream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
      return;
    }
    file_.open(path);
    if (!file_) throw InputError(0, "cannot open '" + path + "'");
    stream_ = &file_;
  }
  std::istream& get() { return *stream_; }

 private:
  std::ifstream file_;
  std::istream* stream_ = nullptr;
};

void require_csv(const RunConfig& config, const char* command) {
  if (config.format != "csv") {
    throw InputError(0, std::string("--format ") + config.format +
                            " is not available for " + command);
  }
}

void check_format(const RunConfig& config) {
  if (config.format != "csv" && config.format != "json") {
    throw InputError(0, "unknown format '" + config.format + "'");
  }
}

ProbabilityVector probabilities_of(const PopulationFile& file,
                                   const RunConfig& config) {
  if (file.pi) {
    try {
      return validate(*file.pi);
    } catch (const OutOfRange& e) {
      throw InputError(0, "unit '" + file.ids[e.index()] + "' has probability " +
                              num(e.value()) + " outside [0, 1]");
    }
  }
  if (!config.n) throw InputError(0, "an 'x' column needs --n");
  return inclusion_from_auxiliary(*file.x, *config.n);
}

template <class Body>
int guarded(Io io, Body&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const OutOfRange& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const TooLarge& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NegativeProbability& e) {
    io.err << "error: " << e.what() << "\n"
           << "hint: the probabilities do not sum to an integer; --phantom "
              "completes them with an artificial last unit\n";
    return kExitInfeasible;
  } catch (const SamplingError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace

SeedChoice resolve_seed(const RunConfig& config) {
  if (config.seed) return {*config.seed, "--seed"};
  if (config.env_seed) {
    const std::string& text = *config.env_seed;
    std::uint64_t v = 0;
    std::size_t used = 0;
    try {
      v = std::stoull(text, &used, 10);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || text.front() == '-') {
      throw InputError(0, "OSOD_SEED='" + text + "' is not an unsigned integer");
    }
    return {v, "OSOD_SEED"};
  }
  std::random_device device;
  const std::uint64_t v =
      (static_cast<std::uint64_t>(device()) << 32) ^ device();
  return {v, "random"};
}

int cmd_sample(const RunConfig& config, Io io) {
  return guarded(io, [&] {
    require_csv(config, "sample");
    const auto seed = resolve_seed(config);
    Input input(config.input, io.in);
    const auto file = read_population(input.get());
    const auto probs = probabilities_of(file, config);

    std::vector<double> p = probs.vector();
    std::optional<double> phantom;
    if (config.phantom && !is_integer(probs.sum(), Tolerance{}.eps)) {
      phantom = std::ceil(probs.sum()) - probs.sum();
      p.push_back(*phantom);
    }
    Rng rng(seed.value);
    SamplerReport report;
    const auto ledger =
        sample_population(ProbabilityVector::unchecked(p), rng, {}, report);

    std::size_t selected = 0;
    io.out << "id,decision\n";
    for (std::size_t k = 0; k < file.ids.size(); ++k) {
      const bool in = ledger[k] == Decision::Selected;
      selected += in;
      io.out << file.ids[k] << ',' << (in ? 1 : 0) << '\n';
    }
    io.out.flush();
    write_report(io.err, "sample",
                 {{"seed", seed_text(seed)},
                  {"policy", "remainder"},
                  {"units", std::to_string(file.ids.size())},
                  {"target size", short_num(probs.sum())},
                  {"realized size", std::to_string(selected)},
                  {"random draws", std::to_string(report.draws)},
                  {"conservation residual", short_num(report.conservation_residual)},
                  {"phantom", phantom ? short_num(*phantom) : "none"}});
    return kExitOk;
  });
}

int cmd_stream(const RunConfig& config, Io io) {
  return guarded(io, [&] {
    require_csv(config, "stream");
    const auto seed = resolve_seed(config);
    Input input(config.input, io.in);
    Rng rng(seed.value);
    StreamSampler sampler(config.policy);
    std::size_t selected = 0;
    const auto emit = [&](const std::vector<Emission>& batch) {
      for (const auto& e : batch) {
        const bool in = e.decision == Decision::Selected;
        selected += in;
        io.out << e.id << ',' << (in ? 1 : 0) << '\n';
      }
      if (!batch.empty()) io.out.flush();
    };

    std::string line;
    std::size_t line_number = 0;
    while (std::getline(input.get(), line)) {
      ++line_number;
      auto unit = parse_stream_line(line, line_number);
      if (!unit) continue;
      emit(sampler.push(std::move(*unit), rng));
    }
    emit(sampler.finish(rng));

    const auto& stats = sampler.stats();
    std::string phantoms = "none";
    if (!stats.phantom_probabilities.empty()) {
      phantoms.clear();
      for (double p : stats.phantom_probabilities) {
        phantoms += (phantoms.empty() ? "" : " ") + short_num(p);
      }
    }
    write_report(io.err, "stream",
                 {{"seed", seed_text(seed)},
                  {"policy", to_string(config.policy)},
                  {"max buffer", std::to_string(config.policy.max_buffer)},
                  {"units", std::to_string(stats.units_seen)},
                  {"realized size", std::to_string(selected)},
                  {"random draws", std::to_string(stats.draws)},
                  {"max decision latency", std::to_string(stats.max_latency)},
                  {"max buffer occupancy", std::to_string(stats.max_buffer_occupancy)},
                  {"phantom", phantoms},
                  {"mid-stream phantoms", std::to_string(stats.midstream_phantoms)}});
    return kExitOk;
  });
}

int cmd_enumerate(const RunConfig& config, Io io) {
  return guarded(io, [&] {
    check_format(config);
    Input input(config.input, io.in);
    const auto file = read_population(input.get());
    const auto probs = probabilities_of(file, config);
    const auto design = enumerate_design(probs, config.policy);
    const auto joint = joint_inclusion(design);
    const std::size_t n_units = probs.size();

    if (config.format == "json") {
      nlohmann::ordered_json doc;
      doc["version"] = OSOD_VERSION;
      doc["policy"] = to_string(config.policy);
      doc["units"] = file.ids;
      doc["pruned_mass"] = design.pruned_mass;
      auto& samples = doc["samples"] = nlohmann::ordered_json::array();
      for (const auto& [bits, p] : design.entries) {
        samples.push_back({{"sample_bits", bits}, {"probability", p}});
      }
      auto& matrix = doc["joint_inclusion"] = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < n_units; ++k) {
        std::vector<double> row(n_units);
        for (std::size_t l = 0; l < n_units; ++l) row[l] = joint(k, l);
        matrix.push_back(row);
      }
      io.out << doc.dump(2) << '\n';
    } else {
      io.out << "sample_bits,probability\n";
      for (const auto& [bits, p] : design.entries) {
        io.out << bits << ',' << num(p) << '\n';
      }
      io.out << "\nid";
      for (const auto& id : file.ids) io.out << ',' << id;
      io.out << '\n';
      for (std::size_t k = 0; k < n_units; ++k) {
        io.out << file.ids[k];
        for (std::size_t l = 0; l < n_units; ++l) io.out << ',' << num(joint(k, l));
        io.out << '\n';
      }
    }
    io.out.flush();
    write_report(io.err, "enumerate",
                 {{"seed", "none (exact)"},
                  {"policy", to_string(config.policy)},
                  {"units", std::to_string(n_units)},
                  {"samples", std::to_string(design.entries.size())},
                  {"total probability", num(design.total())},
                  {"pruned mass", short_num(design.pruned_mass)}});
    return kExitOk;
  });
}

int cmd_simulate(const RunConfig& config, Io io) {
  return guarded(io, [&] {
    check_format(config);
    if (config.replications < 1) throw InputError(0, "--replications must be at least 1");
    const auto seed = resolve_seed(config);
    const auto methods = parse_methods(config.method);

    SimulationPopulation population;
    std::string source;
    if (config.synthetic > 0) {
      if (!config.n) throw InputError(0, "--synthetic needs --n");
      population = synthetic_population(config.synthetic, *config.n,
                                        derive_seed(seed.value, 0x5EED));
      source = "synthetic N=" + std::to_string(config.synthetic) + " n=" +
               short_num(*config.n);
    } else {
      Input input(config.input, io.in);
      const auto file = read_population(input.get());
      if (!file.y) throw InputError(0, "simulate needs a 'y' column");
      population = {file.ids, probabilities_of(file, config), *file.y};
      source = config.input == "-" ? "standard input" : config.input;
    }

    const auto results = simulate(population, methods, config.replications,
                                  seed.value, config.policy, config.threads);
    const double total = stable_sum(population.y);
    const auto bias_z = [&](const MethodSummary& m) {
      const double se = m.sd / std::sqrt(static_cast<double>(m.estimates.size()));
      return se > 0.0 ? (m.mean - total) / se : 0.0;
    };

    if (config.format == "json") {
      nlohmann::ordered_json doc;
      doc["version"] = OSOD_VERSION;
      doc["seed"] = seed.value;
      doc["policy"] = to_string(config.policy);
      doc["population"] = source;
      doc["total"] = total;
      auto& list = doc["methods"] = nlohmann::ordered_json::array();
      for (const auto& m : results) {
        list.push_back({{"method", to_string(m.method)},
                        {"replications", m.estimates.size()},
                        {"mean", m.mean},
                        {"sd", m.sd},
                        {"variance", m.variance},
                        {"bias_z", bias_z(m)},
                        {"estimates", m.estimates},
                        {"sizes", m.sizes},
                        {"inclusion", m.inclusion}});
      }
      io.out << doc.dump(2) << '\n';
    } else {
      io.out << "method,replication,estimate,size\n";
      for (const auto& m : results) {
        for (std::size_t r = 0; r < m.estimates.size(); ++r) {
          io.out << to_string(m.method) << ',' << r << ',' << num(m.estimates[r])
                 << ',' << m.sizes[r] << '\n';
        }
      }
      io.out << "\nmethod,id,pi,frequency\n";
      for (const auto& m : results) {
        for (std::size_t k = 0; k < population.ids.size(); ++k) {
          io.out << to_string(m.method) << ',' << population.ids[k] << ','
                 << num(population.probs[k]) << ',' << num(m.inclusion[k]) << '\n';
        }
      }
      io.out << "\nmethod,replications,total,mean,sd,variance,bias_z\n";
      for (const auto& m : results) {
        io.out << to_string(m.method) << ',' << m.estimates.size() << ','
               << num(total) << ',' << num(m.mean) << ',' << num(m.sd) << ','
               << num(m.variance) << ',' << num(bias_z(m)) << '\n';
      }
    }
    io.out.flush();

    Report report = {{"seed", seed_text(seed)},
                     {"policy", to_string(config.policy)},
                     {"population", source},
                     {"replications", std::to_string(config.replications)},
                     {"total", short_num(total)}};
    for (const auto& m : results) {
      report.emplace_back(to_string(m.method),
                          "mean " + short_num(m.mean) + ", sd " + short_num(m.sd) +
                              ", bias z " + short_num(bias_z(m)));
    }
    write_report(io.err, "simulate", report);
    return kExitOk;
  });
}

int cmd_pi_from_aux(const RunConfig& config, Io io) {
  return guarded(io, [&] {
    require_csv(config, "pi-from-aux");
    if (!config.n) throw InputError(0, "pi-from-aux needs --n");
    Input input(config.input, io.in);
    const auto file = read_population(input.get());
    if (!file.x) throw InputError(0, "pi-from-aux needs an 'x' column");
    const auto probs = inclusion_from_auxiliary(*file.x, *config.n);
    std::size_t capped = 0;
    io.out << (file.y ? "id,pi,y\n" : "id,pi\n");
    for (std::size_t k = 0; k < probs.size(); ++k) {
      capped += probs[k] == 1.0;
      io.out << file.ids[k] << ',' << num(probs[k]);
      if (file.y) io.out << ',' << num((*file.y)[k]);
      io.out << '\n';
    }
    io.out.flush();
    write_report(io.err, "pi-from-aux",
                 {{"n", short_num(*config.n)},
                  {"units", std::to_string(probs.size())},
                  {"units at probability one", std::to_string(capped)}});
    return kExitOk;
  });
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Osod:
      return "osod";
    case Method::Systematic:
      return "systematic";
    case Method::Pivotal:
      return "pivotal";
  }
  return "unknown";
}

std::vector<Method> parse_methods(const std::string& text) {
  if (text == "all") return {Method::Osod, Method::Systematic, Method::Pivotal};
  std::vector<Method> out;
  std::stringstream list(text);
  std::string item;
  while (std::getline(list, item, ',')) {
    if (item == "osod") {
      out.push_back(Method::Osod);
    } else if (item == "systematic") {
      out.push_back(Method::Systematic);
    } else if (item == "pivotal") {
      out.push_back(Method::Pivotal);
    } else {
      throw InputError(0, "unknown method '" + item + "'");
    }
  }
  if (out.empty()) throw InputError(0, "no method given");
  return out;
}

SimulationPopulation synthetic_population(std::size_t units, double n,
                                          std::uint64_t seed) {
  if (units < 1) throw std::invalid_argument("population needs at least one unit");
  Rng rng(seed);
  std::vector<double> x(units);
  std::vector<double> y(units);
  for (std::size_t k = 0; k < units; ++k) {
    x[k] = std::exp(rng.normal(0.0, 1.0));
    y[k] = 10.0 * x[k] * std::exp(rng.normal(0.0, 0.25));
  }
  SimulationPopulation out;
  out.probs = inclusion_from_auxiliary(x, n);
  out.y = std::move(y);
  out.ids.reserve(units);
  for (std::size_t k = 0; k < units; ++k) out.ids.push_back(std::to_string(k + 1));
  return out;
}

std::vector<MethodSummary> simulate(const SimulationPopulation& population,
                                    const std::vector<Method>& methods,
                                    std::size_t replications,
                                    std::uint64_t seed,
                                    const WindowPolicy& policy,
                                    unsigned threads) {
  const auto& probs = population.probs;
  const std::size_t n_units = probs.size();
  if (population.y.size() != n_units) {
    throw std::invalid_argument("y and probabilities differ in length");
  }
  for (Method m : methods) {
    if (m == Method::Systematic && !is_integer(probs.sum(), Tolerance{}.eps)) {
      throw NonIntegerSize(probs.sum());
    }
  }
  const auto units = as_stream(probs);

  std::vector<MethodSummary> out;
  for (Method method : methods) {
    MethodSummary summary;
    summary.method = method;
    summary.estimates.resize(replications);
    summary.sizes.resize(replications);
    std::vector<std::uint8_t> picks(replications * n_units);
    std::exception_ptr failure;
    std::mutex failure_lock;

    const auto master = derive_seed(seed, static_cast<std::uint64_t>(method) + 1);
    for_each_replication(replications, master, [&](std::size_t r, Rng& rng) {
      try {
        std::vector<std::uint8_t> s;
        switch (method) {
          case Method::Osod:
            s = run_stream(units, policy, rng).ledger.indicator();
            break;
          case Method::Systematic:
            s = systematic_sample(probs, true, rng);
            break;
          case Method::Pivotal:
            s = pivotal_sample(probs, rng, true);
            break;
        }
        summary.estimates[r] = ht_estimate(s, population.y, probs);
        std::size_t size = 0;
        for (std::size_t k = 0; k < n_units; ++k) {
          picks[r * n_units + k] = s[k];
          size += s[k];
        }
        summary.sizes[r] = size;
      } catch (...) {
        const std::lock_guard<std::mutex> hold(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }, threads);
    if (failure) std::rethrow_exception(failure);

    summary.inclusion.assign(n_units, 0.0);
    for (std::size_t r = 0; r < replications; ++r) {
      for (std::size_t k = 0; k < n_units; ++k) {
        summary.inclusion[k] += picks[r * n_units + k];
      }
    }
    const auto reps = static_cast<double>(replications);
    for (auto& f : summary.inclusion) f /= reps;
    summary.mean = stable_sum(summary.estimates) / reps;
    double ss = 0.0;
    for (double e : summary.estimates) ss += (e - summary.mean) * (e - summary.mean);
    summary.variance = replications > 1 ? ss / (reps - 1.0) : 0.0;
    summary.sd = std::sqrt(summary.variance);
    out.push_back(std::move(summary));
  }
  return out;
}

}  // namespace osod::cli
