#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coinc/io.hpp"

namespace coinc {

enum class Command { analyze, screen, simulate, validate };

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitValidation = 4,
};

/// Invalid combination of options.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  Command command = Command::analyze;
  /// analyze: one recording, or two single-channel files. screen: one
  /// recording. simulate: one generator config. validate: none.
  std::vector<std::filesystem::path> inputs;
  /// Output file (directory for validate). Empty writes to the given stream;
  /// simulate requires it.
  std::filesystem::path output;
  /// Lag list (`parse_lags` syntax); otherwise 0..max_lag; otherwise
  /// 0..floor(sqrt(T)).
  std::optional<std::string> lags;
  std::optional<std::int64_t> max_lag;
  /// analyze: labels of the two channels when the recording holds more.
  std::optional<std::pair<std::string, std::string>> pair;
  double threshold = 1.96;
  bool two_sided = false;
  /// simulate: overrides the config's seed. validate: master seed.
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  EventFormat format = EventFormat::timestamps;
  std::optional<double> bin_size;
  /// validate: criteria to run; empty runs all.
  std::vector<int> criteria;
};

/// Executes one subcommand. Results go to `out` when no output path is set;
/// progress and verdict lines of validate go to `out` as well. Failures are
/// reported on `err` as a one-line JSON record and mapped to an ExitCode;
/// files this call started writing are removed.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace coinc
