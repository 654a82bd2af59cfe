// coinc: coincidence statistics for binary event sequences.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "coinc/cli.hpp"

namespace {

void add_common(CLI::App& cmd, coinc::RunConfig& config, std::string& format) {
  cmd.add_option("-o,--output", config.output, "Output path");
  cmd.add_option("--workers", config.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--format", format, "Event file format")
      ->check(CLI::IsMember({"timestamps", "dense"}));
}

void add_lags(CLI::App& cmd, coinc::RunConfig& config) {
  cmd.add_option("--lags", config.lags, "Lags, e.g. 0..50 or 0,5,10");
  cmd.add_option("--max-lag", config.max_lag, "Scan lags 0..N");
  cmd.add_option("--bin-size", config.bin_size,
                 "Bin continuous timestamps with this bin width");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coincidence statistics for binary event sequences"};
  app.set_version_flag("--version", std::string(coinc::kVersion));
  app.require_subcommand(1);

  coinc::RunConfig config;
  std::string format = "timestamps";
  std::vector<std::string> pair;

  auto* analyze = app.add_subcommand("analyze", "Per-lag z profile of one channel pair");
  analyze->add_option("inputs", config.inputs, "Recording, or two single-channel files")
      ->required()
      ->expected(1, 2)
      ->check(CLI::ExistingFile);
  analyze->add_option("--pair", pair, "Labels of the two channels")->expected(2);
  add_common(*analyze, config, format);
  add_lags(*analyze, config);

  auto* screen = app.add_subcommand("screen", "Edge list over all channel pairs");
  screen->add_option("input", config.inputs, "Recording")
      ->required()
      ->expected(1)
      ->check(CLI::ExistingFile);
  screen->add_option("--threshold", config.threshold, "z threshold");
  screen->add_flag("--two-sided", config.two_sided, "Compare |z| to the threshold");
  add_common(*screen, config, format);
  add_lags(*screen, config);

  auto* simulate = app.add_subcommand("simulate", "Generate sequences from a model config");
  simulate->add_option("config", config.inputs, "Generator config (key = value)")
      ->required()
      ->expected(1)
      ->check(CLI::ExistingFile);
  simulate->add_option("--seed", config.seed, "Override the config seed");
  add_common(*simulate, config, format);

  auto* validate = app.add_subcommand("validate", "Run the acceptance suites");
  validate->add_option("--criterion", config.criteria, "Criterion ids (default all)");
  validate->add_option("--seed", config.seed, "Master seed");
  validate->add_option("-o,--output", config.output, "Directory for reports");
  validate->add_option("--workers", config.workers, "Worker threads")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return coinc::kExitUsage;
  }

  static const std::map<CLI::App*, coinc::Command> commands{
      {analyze, coinc::Command::analyze},
      {screen, coinc::Command::screen},
      {simulate, coinc::Command::simulate},
      {validate, coinc::Command::validate}};
  config.command = commands.at(app.get_subcommands().front());
  config.format = coinc::parse_event_format(format);
  if (!pair.empty()) config.pair = std::pair{pair[0], pair[1]};
  return coinc::run(config, std::cout, std::cerr);
}
