#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coinc/coincidence.hpp"
#include "coinc/generators.hpp"
#include "coinc/stats.hpp"

namespace coinc {

/// Where the two channels of a simulated trial come from.
struct PairSource {
  Model first;
  /// Model of the second channel; defaults to `first`. Ignored when `first`
  /// is a common shock model, which draws both channels jointly.
  std::optional<Model> second;
  /// Bins merged per output bin after drawing (1 = none).
  std::int64_t subsample_factor = 1;
};

std::pair<EventSequence, EventSequence> draw_pair(const PairSource& source,
                                                  std::uint64_t seed);
/// Per-bin rates the pair is drawn with, after any sub-sampling.
RatePair nominal_rates(const PairSource& source);
std::int64_t pair_horizon(const PairSource& source);

// ---------------------------------------------------------------------------
// Per-lag profile of a single pair.

struct LagProfile {
  std::vector<std::int64_t> lags;
  std::vector<BandStatistic> stats;
  /// dz[k] = z[k + 1] - z[k]; empty where either side is undefined.
  std::vector<std::optional<double>> dz;
  std::int64_t horizon = 0;
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  std::optional<std::uint64_t> seed;
};

/// Z at every lag with plug-in rates. Lags must be strictly ascending and
/// non-negative.
LagProfile z_profile(const EventSequence& x, const EventSequence& y,
                     std::span<const std::int64_t> lags);
/// Same, standardized at known rates.
LagProfile z_profile(const EventSequence& x, const EventSequence& y,
                     std::span<const std::int64_t> lags, RatePair rates);

// ---------------------------------------------------------------------------
// Agreement between simulated and analytical moments.

enum class AnalyticRates {
  /// The generator's per-bin occupancy probabilities.
  nominal,
  /// Per-pair n / T, averaged over each set.
  plug_in,
  /// Poisson rates taken as occupancy probabilities (no binning loss).
  uncorrected,
};

std::string_view to_string(AnalyticRates mode);

struct AgreementConfig {
  std::vector<std::int64_t> lags;
  std::size_t sets = 10;
  std::size_t pairs_per_set = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  AnalyticRates analytic = AnalyticRates::nominal;
};

struct LagAgreement {
  std::int64_t lag = 0;
  double empirical_mean = 0.0;
  double empirical_std = 0.0;
  /// empirical_std / sqrt(trials).
  double standard_error = 0.0;
  double analytical_mean = 0.0;
  /// sigma_delta * sqrt(T).
  double analytical_std = 0.0;
  /// Over sets: per-set estimate against per-set analytical value.
  std::optional<double> nrmse_mean;
  std::optional<double> nrmse_std;
  std::vector<double> set_means;
  std::vector<double> set_stds;
};

struct MonteCarloReport {
  std::vector<LagAgreement> lags;
  std::size_t sets = 0;
  std::size_t pairs_per_set = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  RatePair rates;
  AnalyticRates analytic = AnalyticRates::nominal;
};

MonteCarloReport estimate_agreement(const PairSource& source,
                                    const AgreementConfig& config);

// ---------------------------------------------------------------------------
// Z-score profiles over many simulated pairs.

enum class Standardization { plug_in, known_rates };

struct ZProfileSummary {
  std::vector<std::int64_t> lags;
  std::vector<double> mean_z;
  std::vector<double> std_z;
  /// Trials with a defined z at the lag.
  std::vector<std::size_t> defined;
  /// Fraction of defined trials with |z| > 1.96.
  std::vector<double> exceed_fraction;
  /// First differences of mean_z.
  std::vector<double> mean_dz;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  Standardization standardization = Standardization::plug_in;
};

ZProfileSummary simulate_z_profiles(const PairSource& source,
                                    std::span<const std::int64_t> lags,
                                    std::size_t trials, std::uint64_t seed,
                                    unsigned workers,
                                    Standardization standardization);

// ---------------------------------------------------------------------------
// Normality onset scan.

/// Lag of a scan cell: fixed, or floor(sqrt(T)) at each scanned horizon.
struct ScanLag {
  enum class Kind { fixed, sqrt_horizon };
  Kind kind = Kind::fixed;
  std::int64_t value = 0;

  static ScanLag fixed(std::int64_t lag) { return {Kind::fixed, lag}; }
  static ScanLag sqrt_horizon() { return {Kind::sqrt_horizon, 0}; }
  std::int64_t resolve(std::int64_t horizon) const;
  std::string label() const;
};

struct ScanStep {
  std::int64_t horizon = 0;
  std::int64_t lag = 0;
  KsResult ks;
};

struct ScanCell {
  double rate = 0.0;
  ScanLag lag;
  /// First horizon with KS p > 0.05; empty if never reached.
  std::optional<std::int64_t> onset;
  /// Every horizon tested, ascending, ending at the onset.
  std::vector<ScanStep> steps;
};

struct NormalityScan {
  std::vector<ScanCell> cells;
  std::vector<std::int64_t> horizons;
  std::size_t estimates_per_cell = 0;
  std::uint64_t seed = 0;
};

struct ScanConfig {
  std::vector<double> rates;
  std::vector<ScanLag> lags;
  std::vector<std::int64_t> horizons;
  std::size_t estimates_per_cell = 5000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double significance = 0.05;
};

/// For each (rate, lag) walks the horizons upward and records the first one
/// where the count of independent Bernoulli(rate) pairs, standardized by the
/// analytical mean and sigma_delta sqrt(T), passes the KS normality test.
NormalityScan normality_scan(const ScanConfig& config);

}  // namespace coinc
