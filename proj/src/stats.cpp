#include "coinc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace coinc {

double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double kolmogorov_survival(double lambda) noexcept {
  constexpr double kTolerance = 1e-10;
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form of the CDF converges quickly for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double scale = std::sqrt(2.0 * std::numbers::pi) / lambda;
    double cdf = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term =
          std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
      cdf += term;
      if (term * scale < kTolerance) break;
    }
    return std::clamp(1.0 - scale * cdf, 0.0, 1.0);
  }
  double survival = 0.0;
  double sign = 1.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    survival += sign * term;
    if (term < kTolerance) break;
    sign = -sign;
  }
  return std::clamp(2.0 * survival, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples,
                 const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::domain_error("KS test needs samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double below = static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n;
    d = std::max({d, f - below, above - f});
  }
  return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

KsResult ks_normality(std::span<const double> samples) {
  if (samples.size() < 8) {
    throw std::domain_error("KS normality test needs at least 8 samples");
  }
  return ks_test(samples, normal_cdf);
}

std::optional<double> nrmse(std::span<const double> empirical,
                            std::span<const double> analytical) {
  if (empirical.empty() || empirical.size() != analytical.size()) {
    throw std::domain_error("nrmse needs equal, non-empty inputs");
  }
  double squared = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    const double diff = empirical[i] - analytical[i];
    squared += diff * diff;
    scale += std::abs(analytical[i]);
  }
  const double n = static_cast<double>(empirical.size());
  scale /= n;
  if (scale == 0.0) return std::nullopt;
  return std::sqrt(squared / n) / scale;
}

}  // namespace coinc
