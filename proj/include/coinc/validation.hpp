#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace coinc {

struct ValidationOptions {
  std::uint64_t seed = 20240611;
  unsigned workers = 1;
};

struct CriterionOutcome {
  int id = 0;
  std::string title;
  bool passed = false;
  /// Human-readable findings, one per line.
  std::vector<std::string> lines;
  /// Every number the verdict rests on; deterministic for a given seed.
  nlohmann::json data;
  /// (file name, CSV contents) pairs for the validate subcommand.
  std::vector<std::pair<std::string, std::string>> tables;
};

/// Identifiers of the acceptance criteria, ascending.
std::vector<int> criterion_ids();

/// Runs one acceptance criterion. Throws std::domain_error for an unknown id.
CriterionOutcome run_criterion(int id, const ValidationOptions& options);

}  // namespace coinc
