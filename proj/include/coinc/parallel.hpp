#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>

namespace coinc {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a master seed, a stream tag and
/// an index (splitmix64 finalizer applied to each component in turn).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index = 0) noexcept;

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index
/// runs exactly once; callers write results into per-index slots so the
/// outcome does not depend on scheduling. The first exception thrown by a
/// body is rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation in a fixed order.
double pairwise_sum(std::span<const double> values) noexcept;

}  // namespace coinc
