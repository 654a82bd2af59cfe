#include "coinc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "coinc/parallel.hpp"

namespace coinc {

namespace {

constexpr std::uint64_t kAgreementStream = 0xa9e3;
constexpr std::uint64_t kProfileStream = 0x2f11;
constexpr std::uint64_t kScanStream = 0x5ca7;

void check_lags(std::span<const std::int64_t> lags) {
  if (lags.empty()) throw std::domain_error("lag list is empty");
  for (std::size_t k = 0; k < lags.size(); ++k) {
    if (lags[k] < 0) throw std::domain_error("lags must be non-negative");
    if (k > 0 && lags[k] <= lags[k - 1]) {
      throw std::domain_error("lags must be strictly ascending");
    }
  }
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

// Two-pass mean and sample standard deviation in a fixed order.
Moments moments(std::span<const double> values) {
  Moments m;
  const double n = static_cast<double>(values.size());
  m.mean = pairwise_sum(values) / n;
  if (values.size() < 2) return m;
  std::vector<double> squares(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - m.mean;
    squares[i] = d * d;
  }
  m.std = std::sqrt(pairwise_sum(squares) / (n - 1.0));
  return m;
}

double uncorrected_rate(const Model& model, bool second) {
  if (const auto* poisson = std::get_if<BinnedPoissonModel>(&model)) {
    return std::min(1.0, poisson->lambda * poisson->bin_size);
  }
  if (const auto* shock = std::get_if<CommonShockModel>(&model)) {
    return std::min(1.0, shock->lambda_z +
                             (second ? shock->lambda_y2 : shock->lambda_y1));
  }
  return second ? nominal_rate_second(model) : nominal_rate(model);
}

LagProfile build_profile(const EventSequence& x, const EventSequence& y,
                         std::span<const std::int64_t> lags,
                         std::optional<RatePair> rates) {
  check_lags(lags);
  LagProfile profile;
  profile.lags.assign(lags.begin(), lags.end());
  profile.horizon = x.horizon();
  profile.n_x = x.size();
  profile.n_y = y.size();
  profile.stats.reserve(lags.size());
  for (const auto lag : lags) {
    profile.stats.push_back(rates ? z_score(x, y, lag, *rates)
                                  : z_score(x, y, lag));
  }
  for (std::size_t k = 0; k + 1 < profile.stats.size(); ++k) {
    const auto& a = profile.stats[k].z;
    const auto& b = profile.stats[k + 1].z;
    profile.dz.push_back(a && b ? std::optional<double>(*b - *a)
                                : std::nullopt);
  }
  return profile;
}

}  // namespace

std::pair<EventSequence, EventSequence> draw_pair(const PairSource& source,
                                                  std::uint64_t seed) {
  std::pair<EventSequence, EventSequence> pair = [&] {
    if (const auto* shock = std::get_if<CommonShockModel>(&source.first)) {
      return gen_common_shock(*shock, seed);
    }
    const Model& second = source.second ? *source.second : source.first;
    return std::pair{generate_one(source.first, derive_seed(seed, 1)),
                     generate_one(second, derive_seed(seed, 2))};
  }();
  if (pair.first.horizon() != pair.second.horizon()) {
    throw std::domain_error("pair source models have different horizons");
  }
  if (source.subsample_factor > 1) {
    pair.first = subsample(pair.first, source.subsample_factor).sequence;
    pair.second = subsample(pair.second, source.subsample_factor).sequence;
  }
  return pair;
}

RatePair nominal_rates(const PairSource& source) {
  double px = nominal_rate(source.first);
  double py = std::holds_alternative<CommonShockModel>(source.first)
                  ? nominal_rate_second(source.first)
                  : nominal_rate(source.second ? *source.second : source.first);
  if (source.subsample_factor > 1) {
    px = subsampled_rate(px, source.subsample_factor);
    py = subsampled_rate(py, source.subsample_factor);
  }
  return {px, py};
}

std::int64_t pair_horizon(const PairSource& source) {
  const auto horizon = model_horizon(source.first);
  const auto factor = std::max<std::int64_t>(1, source.subsample_factor);
  return (horizon + factor - 1) / factor;
}

LagProfile z_profile(const EventSequence& x, const EventSequence& y,
                     std::span<const std::int64_t> lags) {
  return build_profile(x, y, lags, std::nullopt);
}

LagProfile z_profile(const EventSequence& x, const EventSequence& y,
                     std::span<const std::int64_t> lags, RatePair rates) {
  return build_profile(x, y, lags, rates);
}

std::string_view to_string(AnalyticRates mode) {
  switch (mode) {
    case AnalyticRates::nominal:
      return "nominal";
    case AnalyticRates::plug_in:
      return "plug_in";
    case AnalyticRates::uncorrected:
      return "uncorrected";
  }
  return "unknown";
}

MonteCarloReport estimate_agreement(const PairSource& source,
                                    const AgreementConfig& config) {
  check_lags(config.lags);
  if (config.sets < 1) throw std::domain_error("sets must be >= 1");
  if (config.pairs_per_set < 2) {
    throw std::domain_error("pairs_per_set must be >= 2");
  }
  const std::size_t n_lags = config.lags.size();
  const std::size_t trials = config.sets * config.pairs_per_set;
  const std::int64_t horizon = pair_horizon(source);
  const double sqrt_t = std::sqrt(static_cast<double>(horizon));

  RatePair fixed_rates = nominal_rates(source);
  if (config.analytic == AnalyticRates::uncorrected) {
    fixed_rates = {uncorrected_rate(source.first, false),
                   uncorrected_rate(source.second.value_or(source.first),
                                    std::holds_alternative<CommonShockModel>(
                                        source.first))};
    if (source.subsample_factor > 1) {
      fixed_rates = {subsampled_rate(fixed_rates.x, source.subsample_factor),
                     subsampled_rate(fixed_rates.y, source.subsample_factor)};
    }
  }
  const bool plug_in = config.analytic == AnalyticRates::plug_in;

  // Row-major trial x lag tables, each trial writing only its own row.
  std::vector<double> counts(trials * n_lags);
  std::vector<double> plug_mean(plug_in ? trials * n_lags : 0);
  std::vector<double> plug_std(plug_in ? trials * n_lags : 0);

  parallel_for(trials, config.workers, [&](std::size_t t) {
    const auto [x, y] =
        draw_pair(source, derive_seed(config.seed, kAgreementStream, t));
    const auto observed = count_coincidences(x, y, config.lags);
    const auto rates = RatePair::estimate(x, y);
    for (std::size_t k = 0; k < n_lags; ++k) {
      counts[t * n_lags + k] = static_cast<double>(observed[k]);
      if (plug_in) {
        plug_mean[t * n_lags + k] = expected_marks(rates, horizon, config.lags[k]);
        plug_std[t * n_lags + k] =
            std::sqrt(sigma_delta_sq(rates, config.lags[k])) * sqrt_t;
      }
    }
  });

  MonteCarloReport report;
  report.sets = config.sets;
  report.pairs_per_set = config.pairs_per_set;
  report.trials = trials;
  report.seed = config.seed;
  report.horizon = horizon;
  report.rates = fixed_rates;
  report.analytic = config.analytic;

  const double fixed_std_base = sqrt_t;
  std::vector<double> column(trials);
  std::vector<double> slice(config.pairs_per_set);
  for (std::size_t k = 0; k < n_lags; ++k) {
    const auto lag = config.lags[k];
    LagAgreement entry;
    entry.lag = lag;
    for (std::size_t t = 0; t < trials; ++t) column[t] = counts[t * n_lags + k];
    const auto pooled = moments(column);
    entry.empirical_mean = pooled.mean;
    entry.empirical_std = pooled.std;
    entry.standard_error = pooled.std / std::sqrt(static_cast<double>(trials));

    const double fixed_mean = expected_marks(fixed_rates, horizon, lag);
    const double fixed_std =
        std::sqrt(sigma_delta_sq(fixed_rates, lag)) * fixed_std_base;

    std::vector<double> set_mean_analytic(config.sets, fixed_mean);
    std::vector<double> set_std_analytic(config.sets, fixed_std);
    for (std::size_t s = 0; s < config.sets; ++s) {
      const std::size_t begin = s * config.pairs_per_set;
      for (std::size_t j = 0; j < config.pairs_per_set; ++j) {
        slice[j] = column[begin + j];
      }
      const auto m = moments(slice);
      entry.set_means.push_back(m.mean);
      entry.set_stds.push_back(m.std);
      if (plug_in) {
        for (std::size_t j = 0; j < config.pairs_per_set; ++j) {
          slice[j] = plug_mean[(begin + j) * n_lags + k];
        }
        set_mean_analytic[s] = pairwise_sum(slice) /
                               static_cast<double>(config.pairs_per_set);
        for (std::size_t j = 0; j < config.pairs_per_set; ++j) {
          slice[j] = plug_std[(begin + j) * n_lags + k];
        }
        set_std_analytic[s] = pairwise_sum(slice) /
                              static_cast<double>(config.pairs_per_set);
      }
    }
    entry.analytical_mean = pairwise_sum(set_mean_analytic) /
                            static_cast<double>(config.sets);
    entry.analytical_std = pairwise_sum(set_std_analytic) /
                           static_cast<double>(config.sets);
    entry.nrmse_mean = nrmse(entry.set_means, set_mean_analytic);
    entry.nrmse_std = nrmse(entry.set_stds, set_std_analytic);
    report.lags.push_back(std::move(entry));
  }
  return report;
}

ZProfileSummary simulate_z_profiles(const PairSource& source,
                                    std::span<const std::int64_t> lags,
                                    std::size_t trials, std::uint64_t seed,
                                    unsigned workers,
                                    Standardization standardization) {
  check_lags(lags);
  if (trials < 2) throw std::domain_error("trials must be >= 2");
  const std::size_t n_lags = lags.size();
  const auto known = nominal_rates(source);

  // NaN marks an undefined z in the per-trial table; it never leaves here.
  std::vector<double> table(trials * n_lags);
  parallel_for(trials, workers, [&](std::size_t t) {
    const auto [x, y] = draw_pair(source, derive_seed(seed, kProfileStream, t));
    const auto profile = standardization == Standardization::known_rates
                             ? z_profile(x, y, lags, known)
                             : z_profile(x, y, lags);
    for (std::size_t k = 0; k < n_lags; ++k) {
      const auto& z = profile.stats[k].z;
      table[t * n_lags + k] = z ? *z : std::nan("");
    }
  });

  ZProfileSummary summary;
  summary.lags.assign(lags.begin(), lags.end());
  summary.trials = trials;
  summary.seed = seed;
  summary.standardization = standardization;
  std::vector<double> column;
  column.reserve(trials);
  for (std::size_t k = 0; k < n_lags; ++k) {
    column.clear();
    std::size_t exceed = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double z = table[t * n_lags + k];
      if (std::isnan(z)) continue;
      column.push_back(z);
      if (std::abs(z) > 1.96) ++exceed;
    }
    const auto m = column.empty() ? Moments{} : moments(column);
    summary.mean_z.push_back(m.mean);
    summary.std_z.push_back(m.std);
    summary.defined.push_back(column.size());
    summary.exceed_fraction.push_back(
        column.empty() ? 0.0
                       : static_cast<double>(exceed) /
                             static_cast<double>(column.size()));
  }
  for (std::size_t k = 0; k + 1 < n_lags; ++k) {
    summary.mean_dz.push_back(summary.mean_z[k + 1] - summary.mean_z[k]);
  }
  return summary;
}

std::int64_t ScanLag::resolve(std::int64_t horizon) const {
  if (kind == Kind::fixed) return value;
  auto root = static_cast<std::int64_t>(std::sqrt(static_cast<double>(horizon)));
  while (root * root > horizon) --root;
  while ((root + 1) * (root + 1) <= horizon) ++root;
  return root;
}

std::string ScanLag::label() const {
  return kind == Kind::fixed ? std::to_string(value) : "sqrtT";
}

NormalityScan normality_scan(const ScanConfig& config) {
  if (config.rates.empty() || config.lags.empty() || config.horizons.empty()) {
    throw std::domain_error("normality scan needs non-empty grids");
  }
  if (config.estimates_per_cell < 100) {
    throw std::domain_error("normality scan needs >= 100 estimates per cell");
  }
  for (std::size_t h = 0; h < config.horizons.size(); ++h) {
    if (config.horizons[h] < 1 ||
        (h > 0 && config.horizons[h] <= config.horizons[h - 1])) {
      throw std::domain_error("horizons must be positive and ascending");
    }
  }
  for (const double rate : config.rates) {
    if (!(rate > 0.0 && rate < 1.0)) {
      throw std::domain_error("scan rates must lie in (0, 1)");
    }
  }
  for (const auto& lag : config.lags) {
    if (lag.kind == ScanLag::Kind::fixed && lag.value < 0) {
      throw std::domain_error("scan lags must be non-negative");
    }
  }

  NormalityScan scan;
  scan.horizons = config.horizons;
  scan.estimates_per_cell = config.estimates_per_cell;
  scan.seed = config.seed;

  const std::size_t n_est = config.estimates_per_cell;
  for (std::size_t r = 0; r < config.rates.size(); ++r) {
    const double rate = config.rates[r];
    const RatePair rates{rate, rate};
    std::vector<ScanCell> cells;
    for (const auto& lag : config.lags) cells.push_back({rate, lag, {}, {}});

    for (std::size_t h = 0; h < config.horizons.size(); ++h) {
      std::vector<std::size_t> pending;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (!cells[c].onset) pending.push_back(c);
      }
      if (pending.empty()) break;

      const auto horizon = config.horizons[h];
      std::vector<std::int64_t> lags;
      for (const auto c : pending) lags.push_back(cells[c].lag.resolve(horizon));

      // All pending lags reuse the same simulated pairs.
      const std::size_t n_lags = lags.size();
      std::vector<double> table(n_est * n_lags);
      const auto cell_seed = derive_seed(config.seed, kScanStream ^ r, h);
      parallel_for(n_est, config.workers, [&](std::size_t e) {
        const auto trial = derive_seed(cell_seed, e);
        const auto x = gen_bernoulli(rate, horizon, derive_seed(trial, 1));
        const auto y = gen_bernoulli(rate, horizon, derive_seed(trial, 2));
        const auto counts = count_coincidences(x, y, lags);
        for (std::size_t k = 0; k < n_lags; ++k) {
          table[e * n_lags + k] = static_cast<double>(counts[k]);
        }
      });

      const double sqrt_t = std::sqrt(static_cast<double>(horizon));
      std::vector<double> standardized(n_est);
      for (std::size_t k = 0; k < n_lags; ++k) {
        const double mean = expected_marks(rates, horizon, lags[k]);
        const double scale =
            std::sqrt(sigma_delta_sq(rates, std::min(lags[k], horizon - 1))) *
            sqrt_t;
        for (std::size_t e = 0; e < n_est; ++e) {
          standardized[e] = (table[e * n_lags + k] - mean) / scale;
        }
        auto& cell = cells[pending[k]];
        const auto ks = ks_normality(standardized);
        cell.steps.push_back({horizon, lags[k], ks});
        if (ks.p_value > config.significance) cell.onset = horizon;
      }
    }
    for (auto& cell : cells) scan.cells.push_back(std::move(cell));
  }
  return scan;
}

}  // namespace coinc
