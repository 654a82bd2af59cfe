#pragma once

#include <functional>
#include <optional>
#include <span>

namespace coinc {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

double normal_cdf(double x) noexcept;

/// P(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_survival(double lambda) noexcept;

/// One-sample Kolmogorov-Smirnov test against a continuous CDF, with the
/// asymptotic p-value.
KsResult ks_test(std::span<const double> samples,
                 const std::function<double(double)>& cdf);

/// KS test of already-standardized samples against N(0, 1). No parameters
/// are estimated from the sample. Needs at least 8 samples.
KsResult ks_normality(std::span<const double> samples);

/// RMSE(empirical - analytical) / mean |analytical|; empty when the
/// analytical values are all zero.
std::optional<double> nrmse(std::span<const double> empirical,
                            std::span<const double> analytical);

}  // namespace coinc
