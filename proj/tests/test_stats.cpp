#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>
#include <stdexcept>

#include "coinc/stats.hpp"

using namespace coinc;

namespace {

// Kolmogorov survival by the alternating series with many terms.
double survival_oracle(double lambda) {
  long double sum = 0.0L;
  for (int k = 1; k <= 400; ++k) {
    const long double term =
        std::exp(-2.0L * k * k * static_cast<long double>(lambda) * lambda);
    sum += (k % 2 == 1 ? term : -term);
  }
  return static_cast<double>(2.0L * sum);
}

std::vector<double> normals(std::size_t n, std::mt19937_64& rng, double mu = 0.0,
                            double sigma = 1.0) {
  std::normal_distribution<double> dist(mu, sigma);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

}  // namespace

TEST(NormalCdf, MatchesBoost) {
  const boost::math::normal_distribution<double> n01;
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    EXPECT_NEAR(normal_cdf(x), boost::math::cdf(n01, x), 1e-14);
  }
}

TEST(KolmogorovSurvival, MatchesSeries) {
  for (double lambda = 0.3; lambda < 3.0; lambda += 0.01) {
    EXPECT_NEAR(kolmogorov_survival(lambda), survival_oracle(lambda), 1e-9) << lambda;
  }
  EXPECT_DOUBLE_EQ(kolmogorov_survival(0.0), 1.0);
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-4);
  EXPECT_LT(kolmogorov_survival(10.0), 1e-80);
}

TEST(KsNormality, ConstantSamples) {
  const std::vector<double> zeros(50, 0.0);
  const auto r = ks_normality(zeros);
  EXPECT_DOUBLE_EQ(r.statistic, 0.5);
  EXPECT_LT(r.p_value, 1e-9);
}

TEST(KsNormality, NeedsEnoughSamples) {
  const std::vector<double> few(7, 0.1);
  EXPECT_THROW(ks_normality(few), std::domain_error);
}

TEST(KsNormality, StatisticMatchesDirectDefinition) {
  std::mt19937_64 rng(1);
  auto x = normals(300, rng, 0.1, 1.2);
  const auto r = ks_normality(x);
  std::sort(x.begin(), x.end());
  double d = 0.0;
  const boost::math::normal_distribution<double> n01;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = boost::math::cdf(n01, x[i]);
    d = std::max({d, (i + 1.0) / x.size() - f, f - static_cast<double>(i) / x.size()});
  }
  EXPECT_NEAR(r.statistic, d, 1e-12);
}

TEST(KsNormality, NullPValuesAreUniform) {
  std::mt19937_64 rng(2024);
  constexpr int kReps = 400;
  std::vector<double> p_values;
  int rejections = 0;
  for (int r = 0; r < kReps; ++r) {
    const auto ks = ks_normality(normals(5000, rng));
    p_values.push_back(ks.p_value);
    if (ks.p_value < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / kReps;
  EXPECT_NEAR(rate, 0.05, 3.0 * std::sqrt(0.05 * 0.95 / kReps));
  const auto uniform = ks_test(p_values, [](double u) { return std::clamp(u, 0.0, 1.0); });
  EXPECT_GT(uniform.p_value, 0.001);
}

TEST(KsNormality, DetectsMisspecification) {
  std::mt19937_64 rng(5);
  EXPECT_LT(ks_normality(normals(5000, rng, 0.1, 1.0)).p_value, 1e-3);
  EXPECT_LT(ks_normality(normals(5000, rng, 0.0, 1.1)).p_value, 1e-3);
}

TEST(Nrmse, Examples) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(*nrmse(a, a), 0.0);
  const std::vector<double> flat{3.0, 3.0, 3.0};
  const std::vector<double> flat_inflated{3.3, 3.3, 3.3};
  EXPECT_NEAR(*nrmse(flat_inflated, flat), 0.1, 1e-12);
  // Normalized by the mean, not the RMS, of |analytical|.
  const std::vector<double> inflated{1.1, 2.2, 3.3};
  EXPECT_NEAR(*nrmse(inflated, a), 0.1 * std::sqrt(14.0 / 3.0) / 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(*nrmse(std::vector<double>{2.0}, std::vector<double>{4.0}), 0.5);
  EXPECT_FALSE(nrmse(std::vector<double>{1.0}, std::vector<double>{0.0}).has_value());
  EXPECT_THROW(nrmse(a, std::vector<double>{1.0}), std::domain_error);
}
