#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coinc/generators.hpp"
#include "coinc/montecarlo.hpp"
#include "coinc/screening.hpp"

namespace coinc {

inline constexpr std::string_view kVersion = "0.1.0";

/// Malformed input; `line` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class EventFormat { timestamps, dense };

EventFormat parse_event_format(std::string_view name);

struct IngestResult {
  Recording recording;
  /// Repeated indices within a channel that were collapsed.
  std::size_t duplicates = 0;
};

/// Reads one or more channels.
///
/// timestamps: a `T=<horizon>` header, then one event per line, either
/// `<index>` (single unlabeled channel) or `<label> <index>`. Indices are
/// 1-based. An optional `channels=<label>,...` line directly after the
/// header declares labels and their order, including channels with no
/// events. With `bin_size`, the header and events are continuous times in
/// [0, T) and are binned as floor(t / bin_size) + 1 over floor(T / bin_size)
/// bins.
///
/// dense: one channel per line, `<bits>` or `<label> <bits>`, horizon =
/// number of bits.
///
/// Blank lines and lines starting with '#' are skipped. Unlabeled channels
/// are named ch0, ch1, ...
IngestResult ingest_events(std::istream& in, EventFormat format,
                           std::optional<double> bin_size = std::nullopt);
IngestResult ingest_events(const std::filesystem::path& path,
                           EventFormat format,
                           std::optional<double> bin_size = std::nullopt);

/// Writes the recording in the given format; single-channel recordings with
/// `labeled == false` omit labels.
void write_events(std::ostream& out, const Recording& recording,
                  EventFormat format, bool labeled = true);

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

/// lag,observed,expected,sigma_sqrtT,z,dz. Undefined values are written as
/// `null`; dz on row k is z[k] - z[k-1] (null on the first row).
void write_profile_csv(std::ostream& out, const LagProfile& profile);

/// label_a,label_b,lag,z,observed,expected.
void write_edges_csv(std::ostream& out, const EdgeList& edges);
nlohmann::json edges_metadata(const EdgeList& edges);

/// One row per lag of an agreement report.
void write_agreement_csv(std::ostream& out, const MonteCarloReport& report);
nlohmann::json to_json(const MonteCarloReport& report);

/// One row per (rate, lag, horizon) tested.
void write_scan_csv(std::ostream& out, const NormalityScan& scan);
nlohmann::json to_json(const NormalityScan& scan);

nlohmann::json to_json(const ZProfileSummary& summary);
nlohmann::json to_json(const LagProfile& profile);

/// key = value lines; `model` selects the variant. Recognized keys:
/// bernoulli: p, horizon; binned_poisson: lambda, bin_size, duration;
/// geometric_ar1: p_target, alpha, horizon; common_shock: lambda_y1,
/// lambda_y2, lambda_z, mu_delay, sigma_delay, horizon. Shared: seed,
/// channels.
GeneratorSpec parse_generator_config(std::istream& in);
std::string format_generator_config(const GeneratorSpec& spec);

/// Parameters, seed and per-channel realized counts of a simulation.
nlohmann::json generator_metadata(const GeneratorSpec& spec,
                                  const std::vector<EventSequence>& channels);

/// Lag list syntax: comma-separated integers and inclusive ranges `a..b`.
std::vector<std::int64_t> parse_lags(std::string_view text);

}  // namespace coinc
