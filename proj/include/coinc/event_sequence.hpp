#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace coinc {

/// Binary event record on the discrete horizon [1, T].
///
/// The public view is 1-based (`indices()`); storage is 0-based offsets,
/// strictly increasing, each in [0, T).
class EventSequence {
 public:
  /// Builds from 1-based, strictly increasing indices. Throws
  /// std::domain_error on an out-of-range or non-increasing index.
  static EventSequence from_indices(std::int64_t horizon,
                                    std::vector<std::int64_t> indices);

  /// Builds from 0-based offsets in any order; duplicates collapse to a
  /// single event. Throws std::domain_error on an out-of-range offset.
  static EventSequence from_offsets(std::int64_t horizon,
                                    std::vector<std::int64_t> offsets);

  /// Every bin occupied.
  static EventSequence full(std::int64_t horizon);

  std::int64_t horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return offsets_.size(); }
  bool empty() const noexcept { return offsets_.empty(); }

  std::span<const std::int64_t> offsets() const noexcept { return offsets_; }
  std::vector<std::int64_t> indices() const;

  /// Plug-in occupancy rate n / T.
  double rate() const noexcept {
    return static_cast<double>(offsets_.size()) /
           static_cast<double>(horizon_);
  }

  friend bool operator==(const EventSequence&,
                         const EventSequence&) = default;

 private:
  EventSequence(std::int64_t horizon, std::vector<std::int64_t> offsets)
      : horizon_(horizon), offsets_(std::move(offsets)) {}

  std::int64_t horizon_ = 1;
  std::vector<std::int64_t> offsets_;
};

}  // namespace coinc
