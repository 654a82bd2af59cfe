#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "coinc/event_sequence.hpp"

namespace coinc {

// Model parameter sets. Rates of the Poisson-based models are events per
// unit time; all other probabilities are per bin.

struct BernoulliModel {
  double p = 0.0;
  std::int64_t horizon = 1;
};

struct BinnedPoissonModel {
  double lambda = 0.0;
  double bin_size = 1.0;
  /// Continuous horizon; the discrete horizon is floor(duration / bin_size).
  double duration = 1.0;
};

struct GeometricAr1Model {
  double p_target = 0.5;
  double alpha = 0.0;
  std::int64_t horizon = 1;
};

/// Delayed common shock: X1 = Y1 u Z, X2 = Y2 u Z*, where Z* moves each Z
/// event by round(Normal(mu_delay, sigma_delay)) bins.
struct CommonShockModel {
  double lambda_y1 = 0.0;
  double lambda_y2 = 0.0;
  double lambda_z = 0.0;
  double mu_delay = 0.0;
  double sigma_delay = 0.0;
  std::int64_t horizon = 1;
};

using Model = std::variant<BernoulliModel, BinnedPoissonModel,
                           GeometricAr1Model, CommonShockModel>;

struct GeneratorSpec {
  Model model;
  std::uint64_t seed = 0;
  /// Independent channels drawn from single-channel models. The common
  /// shock model always yields two coupled channels.
  std::size_t channels = 1;
};

/// Throws std::domain_error if a parameter is outside its domain.
void validate(const Model& model);
std::string_view model_name(const Model& model);
/// Discrete horizon of the sequences the model produces.
std::int64_t model_horizon(const Model& model);
/// Per-bin occupancy probability of the first (or only) channel.
double nominal_rate(const Model& model);
/// Occupancy of the second channel of a common shock model; nominal_rate
/// for single-channel models.
double nominal_rate_second(const Model& model);

/// Statistics of discretising a homogeneous Poisson process into bins.
struct PoissonBinningReport {
  double lambda = 0.0;
  double bin = 1.0;
  /// 1 - exp(-lambda * bin).
  double corrected_p = 0.0;
  /// Expected number of arrivals collapsed by binarization.
  double expected_lost = 0.0;
  /// Realized arrivals and realized lost arrivals of this draw.
  std::int64_t arrivals = 0;
  std::int64_t lost = 0;
};

EventSequence gen_bernoulli(double p, std::int64_t horizon, std::uint64_t seed);

std::pair<EventSequence, PoissonBinningReport> gen_binned_poisson(
    double lambda, double bin_size, double duration, std::uint64_t seed);

/// Probability that a bin of width `bin_size` holds at least one arrival.
double poisson_to_bernoulli(double lambda, double bin_size);

/// lambda T - (T / b)(1 - exp(-lambda b)).
double binning_loss(double lambda, double bin_size, double duration);

struct Subsampled {
  EventSequence sequence;
  double effective_p = 0.0;
};

/// Occupancy of a bin merging `factor` independent Bernoulli(p) bins.
double subsampled_rate(double p, std::int64_t factor);

/// Merges every `factor` consecutive bins into one; the last bin may be
/// shorter. effective_p is computed from the input's plug-in rate.
Subsampled subsample(const EventSequence& x, std::int64_t factor);

/// Geometric AR(1) waiting times W_t = 1 + X_t with
/// X_t = alpha * X_{t-1} + B_t G_t, B_t ~ Bernoulli(1 - alpha),
/// G_t ~ Geometric(theta) on {0, 1, ...}, theta = p_target. X_0 is drawn
/// from the stationary marginal.
std::vector<std::int64_t> geometric_ar1_waiting_times(double p_target,
                                                      double alpha,
                                                      std::size_t count,
                                                      std::uint64_t seed);

/// Events at the cumulative sums of AR(1) waiting times, truncated at T.
/// The recursion starts before the origin so the event process is
/// stationary on [1, T].
EventSequence gen_geometric_ar1(double p_target, double alpha,
                                std::int64_t horizon, std::uint64_t seed);

std::pair<EventSequence, EventSequence> gen_common_shock(
    const CommonShockModel& model, std::uint64_t seed);

/// Draws spec.channels sequences (two for the common shock model). Channel k
/// of a single-channel model uses derive_seed(spec.seed, k).
std::vector<EventSequence> generate(const GeneratorSpec& spec);

/// Draws one sequence from a single-channel model.
EventSequence generate_one(const Model& model, std::uint64_t seed);

}  // namespace coinc
