#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "coinc/coincidence.hpp"
#include "coinc/generators.hpp"
#include "coinc/parallel.hpp"
#include "oracles.hpp"

using namespace coinc;

namespace {

EventSequence seq(std::int64_t horizon, std::vector<std::int64_t> indices) {
  return EventSequence::from_indices(horizon, std::move(indices));
}

}  // namespace

TEST(BandArea, Examples) {
  EXPECT_EQ(band_area(10, 0), 10);
  EXPECT_EQ(band_area(10, 2), 44);
  EXPECT_EQ(band_area(5, 10), 25);
  EXPECT_EQ(band_area(5, 4), 25);
}

TEST(BandArea, MatchesEnumeration) {
  for (std::int64_t t = 1; t <= 40; ++t) {
    for (std::int64_t d = 0; d <= t + 2; ++d) {
      ASSERT_EQ(band_area(t, d), oracle::band_cells(t, d)) << "T=" << t << " d=" << d;
    }
  }
}

TEST(BandArea, RejectsBadArguments) {
  EXPECT_THROW(band_area(0, 1), std::domain_error);
  EXPECT_THROW(band_area(10, -1), std::domain_error);
  EXPECT_THROW(band_area(4'000'000'000, 3'999'999'000), std::overflow_error);
}

TEST(CountCoincidences, Examples) {
  EXPECT_EQ(count_coincidences(seq(3, {1, 3}), seq(3, {2, 3}), 1), 3);
  EXPECT_EQ(count_coincidences(seq(8, {1, 4, 7}), seq(8, {}), 5), 0);
  const auto full = EventSequence::full(7);
  EXPECT_EQ(count_coincidences(full, full, 6), 49);
  EXPECT_EQ(count_coincidences(full, full, 100), 49);
}

TEST(CountCoincidences, RejectsBadArguments) {
  EXPECT_THROW(count_coincidences(seq(3, {1}), seq(4, {1}), 0), std::domain_error);
  EXPECT_THROW(count_coincidences(seq(3, {1}), seq(3, {1}), -1), std::domain_error);
}

TEST(CountCoincidences, MatchesDoubleLoopSymmetricAndMonotone) {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 2000; ++n) {
    const auto horizon = std::uniform_int_distribution<std::int64_t>(1, 64)(rng);
    const double px = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double py = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto x = oracle::random_sequence(horizon, px, rng);
    const auto y = oracle::random_sequence(horizon, py, rng);
    std::vector<std::int64_t> lags;
    std::int64_t previous = -1;
    for (std::int64_t d = 0; d <= horizon + 1; ++d) {
      const auto c = count_coincidences(x, y, d);
      ASSERT_EQ(c, oracle::double_loop(x, y, d));
      ASSERT_EQ(c, count_coincidences(y, x, d));
      ASSERT_GE(c, previous);
      previous = c;
      lags.push_back(d);
    }
    const auto batch = count_coincidences(x, y, lags);
    for (std::size_t k = 0; k < lags.size(); ++k) {
      ASSERT_EQ(batch[k], count_coincidences(x, y, lags[k]));
    }
  }
}

TEST(ExpectedMarks, Examples) {
  EXPECT_DOUBLE_EQ(expected_marks({0.5, 0.5}, 10, 2), 11.0);
  EXPECT_DOUBLE_EQ(expected_marks({0.0, 0.7}, 50, 4), 0.0);
  EXPECT_DOUBLE_EQ(expected_marks({1.0, 1.0}, 37, 0), 37.0);
}

TEST(ExpectedMarks, SymmetricAndMonotone) {
  for (std::int64_t d = 0; d < 60; ++d) {
    EXPECT_DOUBLE_EQ(expected_marks({0.2, 0.7}, 50, d), expected_marks({0.7, 0.2}, 50, d));
    EXPECT_LE(expected_marks({0.2, 0.7}, 50, d), expected_marks({0.2, 0.7}, 50, d + 1));
  }
}

TEST(RatePair, CheckedRejectsOutOfRange) {
  EXPECT_THROW(RatePair::checked(-0.1, 0.5), std::domain_error);
  EXPECT_THROW(RatePair::checked(0.5, 1.5), std::domain_error);
  EXPECT_NO_THROW(RatePair::checked(0.0, 1.0));
}

TEST(SigmaDeltaSq, Examples) {
  EXPECT_DOUBLE_EQ(sigma_delta_sq({1.0, 1.0}, 0), 0.0);
  EXPECT_DOUBLE_EQ(sigma_delta_sq({1.0, 1.0}, 7), 0.0);
  const double p = 0.3;
  EXPECT_DOUBLE_EQ(sigma_delta_sq({p, p}, 0), p * p * (1 - p * p));
  EXPECT_DOUBLE_EQ(sigma_delta_sq({0.1, 0.6}, 5), sigma_delta_sq({0.6, 0.1}, 5));
}

TEST(CountVariance, MatchesCellPairEnumeration) {
  for (const auto& [px, py] : {std::pair{0.3, 0.3}, std::pair{0.1, 0.8}, std::pair{1.0, 0.5}}) {
    for (std::int64_t t : {1, 2, 7, 15}) {
      for (std::int64_t d : {0, 1, 3, 20}) {
        const double exact = oracle::pairwise_variance(px, py, t, d);
        EXPECT_NEAR(count_variance({px, py}, t, d), exact, 1e-9 * (1.0 + exact))
            << "T=" << t << " d=" << d;
      }
    }
  }
}

TEST(CountVariance, ApproachesAsymptoticFormula) {
  const RatePair rates{0.05, 0.2};
  for (std::int64_t d : {0, 5, 30}) {
    const double asymptotic = sigma_delta_sq(rates, d);
    double previous = 1.0;
    for (std::int64_t t : {1'000, 10'000, 100'000}) {
      const double gap = std::abs(count_variance(rates, t, d) / t / asymptotic - 1.0);
      EXPECT_LE(gap, previous + 1e-12);
      previous = gap;
    }
    EXPECT_LT(previous, 1e-3);
  }
}

// Moments over 10^5 independent Bernoulli pairs against the closed forms.
TEST(CountMoments, MonteCarloAgreement) {
  constexpr std::size_t kPairs = 100'000;
  struct Case {
    double px, py;
    std::int64_t horizon;
    std::int64_t delta;
  };
  for (const auto& c : {Case{0.05, 0.05, 1000, 5}, Case{0.3, 0.1, 1000, 0},
                        Case{0.5, 0.5, 1000, 20}, Case{0.05, 0.75, 1000, 40}}) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t n = 0; n < kPairs; ++n) {
      const auto x = gen_bernoulli(c.px, c.horizon, derive_seed(99, 1, n));
      const auto y = gen_bernoulli(c.py, c.horizon, derive_seed(99, 2, n));
      const auto count = static_cast<double>(count_coincidences(x, y, c.delta));
      sum += count;
      sum_sq += count * count;
    }
    const double n = static_cast<double>(kPairs);
    const double mean = sum / n;
    const double var = (sum_sq - sum * sum / n) / (n - 1.0);
    const double expected = expected_marks({c.px, c.py}, c.horizon, c.delta);
    EXPECT_LE(std::abs(mean - expected), 3.0 * std::sqrt(var / n))
        << "p=(" << c.px << "," << c.py << ") d=" << c.delta;
    const double asymptotic =
        sigma_delta_sq({c.px, c.py}, c.delta) * static_cast<double>(c.horizon);
    EXPECT_NEAR(var / asymptotic, 1.0, 0.05) << "d=" << c.delta;
  }
}

TEST(ZScore, ZeroWhenObservedEqualsExpected) {
  const auto stat = z_score(seq(4, {1, 2}), seq(4, {1, 3}), 0);
  EXPECT_EQ(stat.observed, 1);
  EXPECT_DOUBLE_EQ(stat.expected, 1.0);
  ASSERT_TRUE(stat.z.has_value());
  EXPECT_DOUBLE_EQ(*stat.z, 0.0);
}

TEST(ZScore, UndefinedForEmptyChannel) {
  const auto stat = z_score(seq(10, {}), seq(10, {2, 5}), 2);
  EXPECT_FALSE(stat.z.has_value());
  EXPECT_EQ(stat.sigma, 0.0);
}

TEST(ZScore, SelfComparisonIsLarge) {
  std::mt19937_64 rng(3);
  const auto x = oracle::random_sequence(5000, 0.01, rng);
  const auto stat = z_score(x, x, 0);
  EXPECT_EQ(stat.observed, static_cast<std::int64_t>(x.size()));
  ASSERT_TRUE(stat.z);
  EXPECT_GT(*stat.z, 20.0);
}

TEST(ZScore, KnownRatesOverrideEstimates) {
  const auto x = seq(100, {5, 20, 50});
  const auto y = seq(100, {6, 21, 80, 90});
  const RatePair rates{0.1, 0.1};
  const auto stat = z_score(x, y, 2, rates);
  const double sigma = std::sqrt(sigma_delta_sq(rates, 2));
  EXPECT_DOUBLE_EQ(stat.expected, expected_marks(rates, 100, 2));
  EXPECT_DOUBLE_EQ(stat.sigma, sigma);
  EXPECT_DOUBLE_EQ(*stat.z, (2.0 - stat.expected) / (sigma * 10.0));
}

// z is undefined exactly when a channel is empty or both are full.
TEST(ZScore, DegeneracyIsExact) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 3000; ++n) {
    const auto horizon = std::uniform_int_distribution<std::int64_t>(1, 12)(rng);
    const double px = std::uniform_int_distribution<int>(0, 4)(rng) / 4.0;
    const double py = std::uniform_int_distribution<int>(0, 4)(rng) / 4.0;
    const auto x = oracle::random_sequence(horizon, px, rng);
    const auto y = oracle::random_sequence(horizon, py, rng);
    const auto d = std::uniform_int_distribution<std::int64_t>(0, horizon)(rng);
    const bool degenerate =
        x.empty() || y.empty() ||
        (x.size() == static_cast<std::size_t>(horizon) &&
         y.size() == static_cast<std::size_t>(horizon));
    ASSERT_EQ(!z_score(x, y, d).z.has_value(), degenerate);
  }
}

TEST(TruncatedCount, FullOccupancy) {
  // Rows 2..8 of a 10x10 grid, three band cells each.
  const auto full = EventSequence::full(10);
  EXPECT_EQ(truncated_count(full, full, 1), 21);
  EXPECT_THROW(truncated_count(full, full, 4), std::domain_error);
}

TEST(TruncatedCount, SquaredBoundIsNotAnUpperBound) {
  const auto full = EventSequence::full(10);
  const auto count = count_coincidences(full, full, 2);
  const auto truncated = truncated_count(full, full, 2);
  EXPECT_EQ(count, 44);
  EXPECT_EQ(truncated, 25);
  EXPECT_GT(count, truncated + 9);
}

TEST(TruncatedCount, SandwichWithExactEdgeBound) {
  std::mt19937_64 rng(17);
  for (int n = 0; n < 3000; ++n) {
    const auto horizon = std::uniform_int_distribution<std::int64_t>(3, 64)(rng);
    const double px = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double py = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto x = oracle::random_sequence(horizon, px, rng);
    const auto y = oracle::random_sequence(horizon, py, rng);
    const auto d = std::uniform_int_distribution<std::int64_t>(0, (horizon - 3) / 2)(rng);
    const auto truncated = truncated_count(x, y, d);
    const auto count = count_coincidences(x, y, d);
    ASSERT_EQ(truncated, oracle::interior_rows(x, y, d));
    ASSERT_LE(truncated, count);
    ASSERT_LE(count, truncated + oracle::excluded_cells(horizon, d));
  }
}
