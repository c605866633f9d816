#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tactful/dataio.hpp"
#include "tactful/fit.hpp"

namespace tactful {

// Regularized upper incomplete gamma Q(a, x) for a > 0, x >= 0.
double regularized_gamma_q(double a, double x);

// Upper tail Pr(X >= x) of a chi-square with `df` degrees of freedom.
double chi_square_sf(double x, int df);

// Upper tail of the standard normal.
double normal_sf(double z);

struct LrtReport {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

// Log-likelihoods (not penalized objectives) of nested fits on the same data.
LrtReport likelihood_ratio_test(double ll_full, double ll_ablated, int df);

// Squared Pearson correlation. Throws DomainError for unequal lengths, fewer
// than three points, or a constant vector on either side.
double r_squared(std::span<const double> model_probs, std::span<const double> empirical_props);

// r^2 over the observed scenario x utterance cells of `data`.
double model_r_squared(const ParamSet& params, const Dataset& data);

// r^2 between two models' choice probabilities over all 24 cells.
double choice_r_squared(const ParamSet& a, const ParamSet& b);

// Two-sided p-value of the pooled two-proportion z-test. Returns 1 when the
// pooled proportion is 0 or 1.
double two_proportion_test(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2, std::uint64_t n2);

enum class BootstrapStatistic {
    r_squared,
    prior_excess,
    prior_virus,
    alpha_explanandum,
    alpha_latents,
    alpha_social_confident,
    alpha_social_insecure,
};

std::string_view to_string(BootstrapStatistic s);
// Accepts "r2"/"r_squared" and the ParamSet field names.
BootstrapStatistic parse_bootstrap_statistic(std::string_view s);

// Evaluated on each refit and the data it was fitted to.
using StatisticFn = std::function<double(const FitResult&, const Dataset&)>;
StatisticFn statistic_function(BootstrapStatistic s);

struct BootstrapReport {
    double point_estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    int replicates = 0;
    int failures = 0;  // non-converged refits, excluded from the interval
    double confidence_level = 0.95;
    std::uint64_t seed = 0;
    std::vector<double> values;  // successful replicates, in replicate order
    std::vector<int> failed_replicates;
    // True when the interval lies strictly on one side of zero.
    bool excludes_zero() const { return lower > 0.0 || upper < 0.0; }
};

// Percentile bootstrap over participants: each replicate draws participants
// with replacement (all of a participant's responses travel together),
// refits, and evaluates `statistic`. Throws NumericError when more than 20%
// of replicates fail to converge.
BootstrapReport bootstrap_ci(const Dataset& data, const FitConfig& config, const StatisticFn& statistic,
                             int replicates, double confidence, std::uint64_t seed);
BootstrapReport bootstrap_ci(const Dataset& data, const FitConfig& config, BootstrapStatistic statistic,
                             int replicates, double confidence, std::uint64_t seed);

// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double q);

}  // namespace tactful
