#include "coinc/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace coinc {

namespace {

void check_same_horizon(const EventSequence& x, const EventSequence& y) {
  if (x.horizon() != y.horizon()) {
    throw std::domain_error("horizon mismatch: " + std::to_string(x.horizon()) +
                            " vs " + std::to_string(y.horizon()));
  }
}

void check_lag(std::int64_t delta) {
  if (delta < 0) {
    throw std::domain_error("lag must be non-negative, got " +
                            std::to_string(delta));
  }
}

// The count is bounded by n_x * n_y; reject inputs where that bound itself
// does not fit.
void check_count_range(const EventSequence& x, const EventSequence& y) {
  std::int64_t bound = 0;
  if (__builtin_mul_overflow(static_cast<std::int64_t>(x.size()),
                             static_cast<std::int64_t>(y.size()), &bound)) {
    throw std::overflow_error("n_x * n_y exceeds the 64-bit count range");
  }
}

std::int64_t count_unchecked(std::span<const std::int64_t> xs,
                             std::span<const std::int64_t> ys,
                             std::int64_t delta) {
  std::int64_t total = 0;
  std::size_t lo = 0;
  std::size_t hi = 0;
  const std::size_t ny = ys.size();
  for (const auto a : xs) {
    while (lo < ny && ys[lo] < a - delta) ++lo;
    if (hi < lo) hi = lo;
    while (hi < ny && ys[hi] <= a + delta) ++hi;
    total += static_cast<std::int64_t>(hi - lo);
  }
  return total;
}

BandStatistic make_statistic(std::int64_t observed, RatePair rates,
                             std::int64_t horizon, std::int64_t delta) {
  BandStatistic stat;
  stat.lag = delta;
  stat.observed = observed;
  stat.expected = expected_marks(rates, horizon, delta);
  // Beyond T - 1 the band already covers the grid; the variance is taken at
  // the saturated lag so sweeps past the horizon stay flat.
  const std::int64_t effective = std::min(delta, horizon - 1);
  stat.sigma = std::sqrt(sigma_delta_sq(rates, effective));
  if (stat.sigma > 0.0 && std::isfinite(stat.sigma)) {
    stat.z = (static_cast<double>(observed) - stat.expected) /
             (stat.sigma * std::sqrt(static_cast<double>(horizon)));
  }
  return stat;
}

}  // namespace

RatePair RatePair::checked(double x, double y) {
  auto valid = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!valid(x) || !valid(y)) {
    throw std::domain_error("rates must lie in [0, 1]");
  }
  return RatePair{x, y};
}

RatePair RatePair::estimate(const EventSequence& x, const EventSequence& y) {
  return RatePair{x.rate(), y.rate()};
}

std::int64_t band_area(std::int64_t horizon, std::int64_t delta) {
  if (horizon < 1) throw std::domain_error("horizon must be >= 1");
  check_lag(delta);
  const std::int64_t d = std::min(delta, horizon - 1);
  std::int64_t width = 0;
  std::int64_t cells = 0;
  if (__builtin_mul_overflow(horizon, 2 * d + 1, &width)) {
    throw std::overflow_error("band area exceeds the 64-bit range");
  }
  cells = width - d * (d + 1);
  return cells;
}

std::int64_t count_coincidences(const EventSequence& x, const EventSequence& y,
                                std::int64_t delta) {
  check_same_horizon(x, y);
  check_lag(delta);
  check_count_range(x, y);
  return count_unchecked(x.offsets(), y.offsets(), delta);
}

std::vector<std::int64_t> count_coincidences(
    const EventSequence& x, const EventSequence& y,
    std::span<const std::int64_t> lags) {
  check_same_horizon(x, y);
  check_count_range(x, y);
  std::vector<std::int64_t> out;
  out.reserve(lags.size());
  for (const auto delta : lags) {
    check_lag(delta);
    out.push_back(count_unchecked(x.offsets(), y.offsets(), delta));
  }
  return out;
}

double expected_marks(RatePair rates, std::int64_t horizon,
                      std::int64_t delta) {
  return rates.x * rates.y * static_cast<double>(band_area(horizon, delta));
}

double sigma_delta_sq(RatePair rates, std::int64_t delta) {
  check_lag(delta);
  const double px = rates.x;
  const double py = rates.y;
  const double pxy = px * py;
  const double d = static_cast<double>(delta);
  const double diagonal = (2.0 * d + 1.0) * pxy * (1.0 - pxy);
  const double shared =
      2.0 * d * (2.0 * d + 1.0) * pxy * (py * (1.0 - px) + px * (1.0 - py));
  return diagonal + shared;
}

double count_variance(RatePair rates, std::int64_t horizon,
                      std::int64_t delta) {
  const auto area = band_area(horizon, delta);
  const double px = rates.x;
  const double py = rates.y;
  const double pxy = px * py;
  // Ordered pairs of distinct band cells sharing a row; columns match by
  // symmetry of the band.
  double shared_row = 0.0;
  for (std::int64_t i = 1; i <= horizon; ++i) {
    const double r = static_cast<double>(std::min(horizon, i + delta) -
                                         std::max<std::int64_t>(1, i - delta) + 1);
    shared_row += r * (r - 1.0);
  }
  return static_cast<double>(area) * pxy * (1.0 - pxy) +
         shared_row * pxy * (py * (1.0 - px) + px * (1.0 - py));
}

BandStatistic z_score(const EventSequence& x, const EventSequence& y,
                      std::int64_t delta) {
  return z_score(x, y, delta, RatePair::estimate(x, y));
}

BandStatistic z_score(const EventSequence& x, const EventSequence& y,
                      std::int64_t delta, RatePair rates) {
  const auto observed = count_coincidences(x, y, delta);
  return make_statistic(observed, rates, x.horizon(), delta);
}

std::int64_t truncated_count(const EventSequence& x, const EventSequence& y,
                             std::int64_t delta) {
  check_same_horizon(x, y);
  check_lag(delta);
  const std::int64_t horizon = x.horizon();
  if (2 * delta + 2 >= horizon) {
    throw std::domain_error("truncated count needs 2*delta + 2 < T");
  }
  // Interior rows [delta + 1, T - delta - 1] are offsets [delta, T - delta - 2].
  const auto xs = x.offsets();
  const auto first = std::lower_bound(xs.begin(), xs.end(), delta);
  const auto last = std::upper_bound(first, xs.end(), horizon - delta - 2);
  return count_unchecked(std::span(first, last), y.offsets(), delta);
}

}  // namespace coinc
