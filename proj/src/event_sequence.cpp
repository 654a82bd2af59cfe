#include "coinc/event_sequence.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace coinc {

namespace {

void check_horizon(std::int64_t horizon) {
  if (horizon < 1) {
    throw std::domain_error("horizon must be >= 1, got " +
                            std::to_string(horizon));
  }
}

}  // namespace

EventSequence EventSequence::from_indices(std::int64_t horizon,
                                          std::vector<std::int64_t> indices) {
  check_horizon(horizon);
  std::int64_t previous = 0;
  for (auto& index : indices) {
    if (index < 1 || index > horizon) {
      throw std::domain_error("event index " + std::to_string(index) +
                              " outside [1, " + std::to_string(horizon) + "]");
    }
    if (index <= previous) {
      throw std::domain_error("event indices must be strictly increasing");
    }
    previous = index;
    index -= 1;
  }
  return EventSequence(horizon, std::move(indices));
}

EventSequence EventSequence::from_offsets(std::int64_t horizon,
                                          std::vector<std::int64_t> offsets) {
  check_horizon(horizon);
  for (auto offset : offsets) {
    if (offset < 0 || offset >= horizon) {
      throw std::domain_error("event offset " + std::to_string(offset) +
                              " outside [0, " + std::to_string(horizon) + ")");
    }
  }
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
  return EventSequence(horizon, std::move(offsets));
}

EventSequence EventSequence::full(std::int64_t horizon) {
  check_horizon(horizon);
  std::vector<std::int64_t> offsets(static_cast<std::size_t>(horizon));
  std::iota(offsets.begin(), offsets.end(), std::int64_t{0});
  return EventSequence(horizon, std::move(offsets));
}

std::vector<std::int64_t> EventSequence::indices() const {
  std::vector<std::int64_t> out(offsets_.begin(), offsets_.end());
  for (auto& v : out) v += 1;
  return out;
}

}  // namespace coinc
