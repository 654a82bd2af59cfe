#include "coinc/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "coinc/parallel.hpp"

namespace coinc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool condition, const char* message) {
  if (!condition) throw std::domain_error(message);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }
bool is_rate(double r) { return std::isfinite(r) && r >= 0.0; }

// Offsets of a Bernoulli(p) sequence via geometric gaps.
void bernoulli_offsets(double p, std::int64_t horizon, Rng& rng,
                       std::vector<std::int64_t>& out) {
  if (p <= 0.0) return;
  if (p >= 1.0) {
    for (std::int64_t i = 0; i < horizon; ++i) out.push_back(i);
    return;
  }
  std::geometric_distribution<std::int64_t> gap(p);
  std::int64_t position = -1;
  for (;;) {
    position += 1 + gap(rng);
    if (position >= horizon || position < 0) return;
    out.push_back(position);
  }
}

std::int64_t poisson_draw(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

// Poisson arrivals with `rate` per bin over `horizon` bins, as bin offsets
// (with multiplicity).
void poisson_bins(double rate, std::int64_t horizon, Rng& rng,
                  std::vector<std::int64_t>& out) {
  const auto n = poisson_draw(rate * static_cast<double>(horizon), rng);
  std::uniform_int_distribution<std::int64_t> bin(0, horizon - 1);
  for (std::int64_t k = 0; k < n; ++k) out.push_back(bin(rng));
}

// Stationary geometric AR(1) state on {0, 1, ...}.
class Ar1State {
 public:
  Ar1State(double theta, double alpha, Rng& rng)
      : alpha_(alpha), innovation_(theta), rng_(rng) {
    state_ = innovation_(rng_);
  }

  std::int64_t current() const { return state_; }

  void advance() {
    std::int64_t survivors = 0;
    if (alpha_ > 0.0 && state_ > 0) {
      std::binomial_distribution<std::int64_t> thin(state_, alpha_);
      survivors = thin(rng_);
    }
    std::int64_t fresh = 0;
    if (unit_(rng_) < 1.0 - alpha_) fresh = innovation_(rng_);
    state_ = survivors + fresh;
  }

 private:
  double alpha_;
  std::geometric_distribution<std::int64_t> innovation_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  Rng& rng_;
  std::int64_t state_ = 0;
};

void check_ar1(double p_target, double alpha) {
  require(p_target > 0.0 && p_target < 1.0,
          "geometric AR(1) needs 0 < p_target < 1");
  require(alpha >= 0.0 && alpha < 1.0,
          "geometric AR(1) needs 0 <= alpha < 1 (alpha = 1 is non-stationary)");
}

}  // namespace

void validate(const Model& model) {
  std::visit(
      Overloaded{
          [](const BernoulliModel& m) {
            require(is_probability(m.p), "bernoulli: p must lie in [0, 1]");
            require(m.horizon >= 1, "bernoulli: horizon must be >= 1");
          },
          [](const BinnedPoissonModel& m) {
            require(is_rate(m.lambda), "binned_poisson: lambda must be >= 0");
            require(std::isfinite(m.bin_size) && m.bin_size > 0.0,
                    "binned_poisson: bin_size must be > 0");
            require(std::isfinite(m.duration) && m.duration >= m.bin_size,
                    "binned_poisson: duration must be >= bin_size");
          },
          [](const GeometricAr1Model& m) {
            check_ar1(m.p_target, m.alpha);
            require(m.horizon >= 1, "geometric_ar1: horizon must be >= 1");
          },
          [](const CommonShockModel& m) {
            require(is_rate(m.lambda_y1) && is_rate(m.lambda_y2) &&
                        is_rate(m.lambda_z),
                    "common_shock: rates must be >= 0");
            require(std::isfinite(m.mu_delay),
                    "common_shock: mu_delay must be finite");
            require(std::isfinite(m.sigma_delay) && m.sigma_delay >= 0.0,
                    "common_shock: sigma_delay must be >= 0");
            require(m.horizon >= 1, "common_shock: horizon must be >= 1");
          },
      },
      model);
}

std::string_view model_name(const Model& model) {
  return std::visit(
      Overloaded{
          [](const BernoulliModel&) { return std::string_view("bernoulli"); },
          [](const BinnedPoissonModel&) {
            return std::string_view("binned_poisson");
          },
          [](const GeometricAr1Model&) {
            return std::string_view("geometric_ar1");
          },
          [](const CommonShockModel&) {
            return std::string_view("common_shock");
          },
      },
      model);
}

std::int64_t model_horizon(const Model& model) {
  return std::visit(
      Overloaded{
          [](const BinnedPoissonModel& m) {
            return static_cast<std::int64_t>(std::floor(m.duration / m.bin_size));
          },
          [](const auto& m) { return m.horizon; },
      },
      model);
}

double nominal_rate(const Model& model) {
  return std::visit(
      Overloaded{
          [](const BernoulliModel& m) { return m.p; },
          [](const BinnedPoissonModel& m) {
            return poisson_to_bernoulli(m.lambda, m.bin_size);
          },
          [](const GeometricAr1Model& m) { return m.p_target; },
          [](const CommonShockModel& m) {
            return poisson_to_bernoulli(m.lambda_y1 + m.lambda_z, 1.0);
          },
      },
      model);
}

double nominal_rate_second(const Model& model) {
  if (const auto* shock = std::get_if<CommonShockModel>(&model)) {
    return poisson_to_bernoulli(shock->lambda_y2 + shock->lambda_z, 1.0);
  }
  return nominal_rate(model);
}

EventSequence gen_bernoulli(double p, std::int64_t horizon,
                            std::uint64_t seed) {
  validate(BernoulliModel{p, horizon});
  Rng rng(seed);
  std::vector<std::int64_t> offsets;
  offsets.reserve(static_cast<std::size_t>(
      std::min<double>(static_cast<double>(horizon),
                       p * static_cast<double>(horizon) * 1.2 + 16.0)));
  bernoulli_offsets(p, horizon, rng, offsets);
  return EventSequence::from_offsets(horizon, std::move(offsets));
}

double poisson_to_bernoulli(double lambda, double bin_size) {
  return -std::expm1(-lambda * bin_size);
}

double binning_loss(double lambda, double bin_size, double duration) {
  require(bin_size > 0.0, "binning_loss: bin size must be > 0");
  return lambda * duration -
         (duration / bin_size) * poisson_to_bernoulli(lambda, bin_size);
}

std::pair<EventSequence, PoissonBinningReport> gen_binned_poisson(
    double lambda, double bin_size, double duration, std::uint64_t seed) {
  const BinnedPoissonModel model{lambda, bin_size, duration};
  validate(model);
  const std::int64_t bins = model_horizon(model);
  Rng rng(seed);
  std::vector<std::int64_t> arrivals;
  poisson_bins(lambda * bin_size, bins, rng, arrivals);

  PoissonBinningReport report;
  report.lambda = lambda;
  report.bin = bin_size;
  report.corrected_p = poisson_to_bernoulli(lambda, bin_size);
  report.expected_lost = binning_loss(lambda, bin_size, duration);
  report.arrivals = static_cast<std::int64_t>(arrivals.size());

  auto sequence = EventSequence::from_offsets(bins, std::move(arrivals));
  report.lost = report.arrivals - static_cast<std::int64_t>(sequence.size());
  return {std::move(sequence), report};
}

double subsampled_rate(double p, std::int64_t factor) {
  require(factor >= 1, "subsample factor must be >= 1");
  return -std::expm1(static_cast<double>(factor) * std::log1p(-p));
}

Subsampled subsample(const EventSequence& x, std::int64_t factor) {
  require(factor >= 1, "subsample factor must be >= 1");
  const std::int64_t horizon = (x.horizon() + factor - 1) / factor;
  std::vector<std::int64_t> merged;
  merged.reserve(x.size());
  for (const auto offset : x.offsets()) {
    const auto bin = offset / factor;
    if (merged.empty() || merged.back() != bin) merged.push_back(bin);
  }
  return {EventSequence::from_offsets(horizon, std::move(merged)),
          subsampled_rate(x.rate(), factor)};
}

std::vector<std::int64_t> geometric_ar1_waiting_times(double p_target,
                                                      double alpha,
                                                      std::size_t count,
                                                      std::uint64_t seed) {
  check_ar1(p_target, alpha);
  Rng rng(seed);
  Ar1State state(p_target, alpha, rng);
  std::vector<std::int64_t> waits;
  waits.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (k > 0) state.advance();
    waits.push_back(1 + state.current());
  }
  return waits;
}

EventSequence gen_geometric_ar1(double p_target, double alpha,
                                std::int64_t horizon, std::uint64_t seed) {
  validate(GeometricAr1Model{p_target, alpha, horizon});
  Rng rng(seed);
  Ar1State state(p_target, alpha, rng);

  // Enough waiting times before the origin for the dependence on the
  // starting state to decay below 1e-3.
  double intervals = 10.0;
  if (alpha > 0.0) {
    intervals = std::max(intervals, std::ceil(std::log(1e-3) / std::log(alpha)));
  }
  const auto burn_in =
      static_cast<std::int64_t>(std::ceil(intervals / p_target));

  std::vector<std::int64_t> offsets;
  std::int64_t position = -burn_in - 1;
  for (bool first = true;; first = false) {
    if (!first) state.advance();
    position += 1 + state.current();
    if (position >= horizon) break;
    if (position >= 0) offsets.push_back(position);
  }
  return EventSequence::from_offsets(horizon, std::move(offsets));
}

std::pair<EventSequence, EventSequence> gen_common_shock(
    const CommonShockModel& model, std::uint64_t seed) {
  validate(model);
  const std::int64_t horizon = model.horizon;
  Rng rng(seed);

  std::vector<std::int64_t> shock;
  poisson_bins(model.lambda_z, horizon, rng, shock);
  std::vector<std::int64_t> first;
  poisson_bins(model.lambda_y1, horizon, rng, first);
  std::vector<std::int64_t> second;
  poisson_bins(model.lambda_y2, horizon, rng, second);

  first.insert(first.end(), shock.begin(), shock.end());

  std::normal_distribution<double> jitter(
      model.mu_delay, model.sigma_delay > 0.0 ? model.sigma_delay : 1.0);
  for (const auto event : shock) {
    const double delay = model.sigma_delay > 0.0 ? jitter(rng) : model.mu_delay;
    const auto moved = event + static_cast<std::int64_t>(std::llround(delay));
    // Events pushed outside the horizon are dropped, not wrapped.
    if (moved >= 0 && moved < horizon) second.push_back(moved);
  }

  return {EventSequence::from_offsets(horizon, std::move(first)),
          EventSequence::from_offsets(horizon, std::move(second))};
}

EventSequence generate_one(const Model& model, std::uint64_t seed) {
  return std::visit(
      Overloaded{
          [&](const BernoulliModel& m) {
            return gen_bernoulli(m.p, m.horizon, seed);
          },
          [&](const BinnedPoissonModel& m) {
            return gen_binned_poisson(m.lambda, m.bin_size, m.duration, seed)
                .first;
          },
          [&](const GeometricAr1Model& m) {
            return gen_geometric_ar1(m.p_target, m.alpha, m.horizon, seed);
          },
          [](const CommonShockModel&) -> EventSequence {
            throw std::domain_error(
                "common_shock yields a pair; use generate()");
          },
      },
      model);
}

std::vector<EventSequence> generate(const GeneratorSpec& spec) {
  validate(spec.model);
  if (const auto* shock = std::get_if<CommonShockModel>(&spec.model)) {
    auto [a, b] = gen_common_shock(*shock, spec.seed);
    return {std::move(a), std::move(b)};
  }
  require(spec.channels >= 1, "channels must be >= 1");
  std::vector<EventSequence> out;
  out.reserve(spec.channels);
  for (std::size_t k = 0; k < spec.channels; ++k) {
    out.push_back(generate_one(spec.model, derive_seed(spec.seed, 0x63686eULL, k)));
  }
  return out;
}

}  // namespace coinc
