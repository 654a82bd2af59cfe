#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "coinc/event_sequence.hpp"

namespace coinc {

/// Occupancy probabilities of the two processes.
struct RatePair {
  double x = 0.0;
  double y = 0.0;

  /// Throws std::domain_error unless both rates lie in [0, 1].
  static RatePair checked(double x, double y);

  /// Plug-in estimate (n_x / T, n_y / T).
  static RatePair estimate(const EventSequence& x, const EventSequence& y);
};

/// Coincidence statistic at one lag.
struct BandStatistic {
  std::int64_t lag = 0;
  std::int64_t observed = 0;
  double expected = 0.0;
  /// Per-sqrt(T) scale; the Z denominator is sigma * sqrt(T).
  double sigma = 0.0;
  /// Empty when sigma == 0.
  std::optional<double> z;
};

/// Number of lattice cells (i, j) in [1,T]^2 with |i - j| <= delta.
/// Saturates at T^2 once delta >= T - 1.
std::int64_t band_area(std::int64_t horizon, std::int64_t delta);

/// Number of pairs (i, j), X_i = Y_j = 1, |i - j| <= delta.
///
/// Two-pointer sweep over the sorted event offsets, O(n_x + n_y).
std::int64_t count_coincidences(const EventSequence& x, const EventSequence& y,
                                std::int64_t delta);

/// count_coincidences for every lag in `lags`.
std::vector<std::int64_t> count_coincidences(const EventSequence& x,
                                             const EventSequence& y,
                                             std::span<const std::int64_t> lags);

/// E|S_{T,delta}| = p_x p_y A_{T,delta}.
double expected_marks(RatePair rates, std::int64_t horizon,
                      std::int64_t delta);

/// Asymptotic variance of |S_{T,delta}| / sqrt(T) under independence.
double sigma_delta_sq(RatePair rates, std::int64_t delta);

/// Exact variance of the count over a finite horizon for independent
/// Bernoulli sequences. sigma_delta_sq * T is its large-T limit; the two
/// differ by the rows and columns the band truncates at the edges.
double count_variance(RatePair rates, std::int64_t horizon, std::int64_t delta);

/// Z-score with rates estimated from the data (n / T).
BandStatistic z_score(const EventSequence& x, const EventSequence& y,
                      std::int64_t delta);

/// Z-score standardized at known rates (e.g. the null model's parameters).
BandStatistic z_score(const EventSequence& x, const EventSequence& y,
                      std::int64_t delta, RatePair rates);

/// Marks with the X index restricted to the interior rows
/// [delta + 1, T - delta - 1]. Requires 2 delta + 2 < T.
std::int64_t truncated_count(const EventSequence& x, const EventSequence& y,
                             std::int64_t delta);

}  // namespace coinc
