#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

struct Options {
  std::string window = "smallest";
  std::size_t max_buffer = osod::WindowPolicy::kDefaultMaxBuffer;
  std::uint64_t seed = 0;
  double n = 0.0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-step one-decision unequal probability sampling"};
  app.set_version_flag("--version", OSOD_VERSION);
  app.require_subcommand(1);

  osod::cli::RunConfig config;
  Options opt;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-i,--input", config.input, "input CSV file, - for stdin")
        ->capture_default_str();
    cmd->add_option("--format", config.format, "csv or json")
        ->capture_default_str();
  };
  const auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "64-bit seed (falls back to OSOD_SEED)");
  };
  const auto add_n = [&](CLI::App* cmd) {
    cmd->add_option("--n", opt.n, "sample size for an 'x' column");
  };
  const auto add_window = [&](CLI::App* cmd) {
    cmd->add_option("--window", opt.window, "smallest | integer | fixed:<m> | full")
        ->capture_default_str();
    cmd->add_option("--max-buffer", opt.max_buffer,
                    "buffered units before a phantom completes the buffer")
        ->capture_default_str();
  };

  auto* sample = app.add_subcommand("sample", "draw one sample from a population file");
  add_common(sample);
  add_seed(sample);
  add_n(sample);
  sample->add_flag("--phantom", config.phantom,
                   "complete a non-integer total with an artificial last unit");

  auto* stream = app.add_subcommand("stream", "decide units as `<id>,<pi>` lines arrive");
  add_common(stream);
  add_seed(stream);
  add_window(stream);

  auto* enumerate = app.add_subcommand("enumerate", "exact design and joint inclusion");
  add_common(enumerate);
  add_n(enumerate);
  add_window(enumerate);

  auto* simulate = app.add_subcommand("simulate", "repeated sampling and estimation");
  add_common(simulate);
  add_seed(simulate);
  add_n(simulate);
  add_window(simulate);
  simulate->add_option("--method", config.method, "osod, systematic, pivotal or all")
      ->capture_default_str();
  simulate->add_option("--replications", config.replications)->capture_default_str();
  simulate->add_option("--synthetic", config.synthetic,
                       "generate a skewed population of this size");
  simulate->add_option("--threads", config.threads, "0 uses every core");

  auto* aux = app.add_subcommand("pi-from-aux", "inclusion probabilities from `id,x`");
  add_common(aux);
  add_n(aux);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : osod::cli::kExitInput;
  }

  for (auto* cmd : {sample, stream, simulate}) {
    if (cmd->parsed() && cmd->count("--seed")) config.seed = opt.seed;
  }
  for (auto* cmd : {sample, enumerate, simulate, aux}) {
    if (cmd->parsed() && cmd->count("--n")) config.n = opt.n;
  }
  if (const char* env = std::getenv("OSOD_SEED")) config.env_seed = env;
  try {
    config.policy = osod::parse_window_policy(opt.window);
    config.policy.max_buffer = opt.max_buffer;
    config.policy.check();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return osod::cli::kExitInput;
  }

  osod::cli::Io io{std::cin, std::cout, std::cerr};
  if (sample->parsed()) return osod::cli::cmd_sample(config, io);
  if (stream->parsed()) return osod::cli::cmd_stream(config, io);
  if (enumerate->parsed()) return osod::cli::cmd_enumerate(config, io);
  if (simulate->parsed()) return osod::cli::cmd_simulate(config, io);
  return osod::cli::cmd_pi_from_aux(config, io);
}
