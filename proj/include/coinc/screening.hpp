#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coinc/event_sequence.hpp"

namespace coinc {

/// Event channels sharing one horizon, with unique labels.
class Recording {
 public:
  /// Throws std::domain_error on mismatched horizons, duplicate labels or a
  /// label count that differs from the channel count.
  Recording(std::vector<EventSequence> channels,
            std::vector<std::string> labels);

  std::size_t size() const noexcept { return channels_.size(); }
  std::int64_t horizon() const noexcept;
  const std::vector<EventSequence>& channels() const noexcept {
    return channels_;
  }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  std::vector<EventSequence> channels_;
  std::vector<std::string> labels_;
};

struct Edge {
  std::string label_a;
  std::string label_b;
  std::int64_t lag = 0;
  double z = 0.0;
  std::int64_t observed = 0;
  double expected = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Channel pair whose z is undefined at one or more lags.
struct UndefinedPair {
  std::string label_a;
  std::string label_b;
  std::vector<std::int64_t> lags;

  friend bool operator==(const UndefinedPair&, const UndefinedPair&) = default;
};

struct EdgeList {
  /// Sorted by (label_a, label_b, lag); label_a < label_b.
  std::vector<Edge> edges;
  std::vector<UndefinedPair> undefined;
  double threshold = 0.0;
  bool two_sided = false;
  /// Unordered pairs tested and lags tested per pair, for consumers that
  /// apply their own multiple-comparison correction.
  std::size_t pair_count = 0;
  std::size_t tests_per_pair = 0;
};

struct ScreenOptions {
  double threshold = 1.96;
  bool two_sided = false;
  unsigned workers = 1;
};

/// Z-score profile of every unordered channel pair; one edge per lag whose
/// defined z reaches the threshold (|z| when two-sided). No correction for
/// multiple comparisons is applied.
EdgeList screen(const Recording& recording, std::span<const std::int64_t> lags,
                const ScreenOptions& options = {});

}  // namespace coinc
