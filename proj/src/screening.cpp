#include "coinc/screening.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "coinc/montecarlo.hpp"
#include "coinc/parallel.hpp"

namespace coinc {

Recording::Recording(std::vector<EventSequence> channels,
                     std::vector<std::string> labels)
    : channels_(std::move(channels)), labels_(std::move(labels)) {
  if (channels_.size() != labels_.size()) {
    throw std::domain_error("recording needs one label per channel");
  }
  for (const auto& channel : channels_) {
    if (channel.horizon() != channels_.front().horizon()) {
      throw std::domain_error("recording channels have different horizons");
    }
  }
  std::set<std::string> seen;
  for (const auto& label : labels_) {
    if (!seen.insert(label).second) {
      throw std::domain_error("duplicate channel label '" + label + "'");
    }
  }
}

std::int64_t Recording::horizon() const noexcept {
  return channels_.empty() ? 0 : channels_.front().horizon();
}

EdgeList screen(const Recording& recording, std::span<const std::int64_t> lags,
                const ScreenOptions& options) {
  if (recording.size() < 2) {
    throw std::domain_error("screening needs at least two channels");
  }
  if (!(options.threshold > 0.0)) {
    throw std::domain_error("z threshold must be > 0");
  }

  // Channel order by label so output does not depend on input order.
  std::vector<std::size_t> order(recording.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto& labels = recording.labels();
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      pairs.emplace_back(order[i], order[j]);
    }
  }

  struct PairResult {
    std::vector<Edge> edges;
    std::vector<std::int64_t> undefined_lags;
  };
  std::vector<PairResult> results(pairs.size());
  const auto& channels = recording.channels();

  parallel_for(pairs.size(), options.workers, [&](std::size_t p) {
    const auto [a, b] = pairs[p];
    const auto profile = z_profile(channels[a], channels[b], lags);
    auto& out = results[p];
    for (const auto& stat : profile.stats) {
      if (!stat.z) {
        out.undefined_lags.push_back(stat.lag);
        continue;
      }
      const double z = *stat.z;
      const bool hit = options.two_sided ? std::abs(z) >= options.threshold
                                         : z >= options.threshold;
      if (hit) {
        out.edges.push_back(
            {labels[a], labels[b], stat.lag, z, stat.observed, stat.expected});
      }
    }
  });

  EdgeList list;
  list.threshold = options.threshold;
  list.two_sided = options.two_sided;
  list.pair_count = pairs.size();
  list.tests_per_pair = lags.size();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    auto& result = results[p];
    list.edges.insert(list.edges.end(), result.edges.begin(),
                      result.edges.end());
    if (!result.undefined_lags.empty()) {
      list.undefined.push_back({labels[pairs[p].first],
                                labels[pairs[p].second],
                                std::move(result.undefined_lags)});
    }
  }
  return list;
}

}  // namespace coinc
