#pragma once

// Penalized maximum-likelihood fitting of the six free parameters.
//
// Optimization runs in unconstrained coordinates:
//   [logit(prior_excess), logit(prior_virus), alpha_explanandum,
//    alpha_latents, alpha_social_confident, alpha_social_insecure]
// The smooth part (negative log-likelihood) is differentiated by central
// differences; the L1 penalty on the four alphas is applied by proximal
// soft-thresholding.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "tactful/dataio.hpp"
#include "tactful/explainer.hpp"

namespace tactful {

inline constexpr std::size_t kNumFreeParams = 6;
using Coordinates = std::array<double, kNumFreeParams>;

// Utility weights pinned to zero.
struct AblationSet {
    bool regret = false;       // both social weights
    bool latents = false;      // alpha_latents
    bool explanandum = false;  // alpha_explanandum

    bool empty() const { return !regret && !latents && !explanandum; }
    // Number of pinned parameters; the LRT degrees of freedom.
    int pinned_count() const { return (regret ? 2 : 0) + (latents ? 1 : 0) + (explanandum ? 1 : 0); }
    bool pins(std::size_t coordinate) const;

    // "full", or '+'-joined names, e.g. "regret+latents".
    std::string label() const;
    // Accepts the output of label(); "none" and "full" mean no ablation.
    static AblationSet parse(std::string_view text);

    friend constexpr bool operator==(AblationSet, AblationSet) = default;
};

// No regret; no inference; no regret or inference; no understanding reward.
inline constexpr std::array<AblationSet, 4> kStandardAblations = {
    AblationSet{true, false, false}, AblationSet{false, true, false}, AblationSet{true, true, false},
    AblationSet{false, false, true}};

enum class StepRule {
    fixed,     // every iteration starts from initial_step
    adaptive,  // Barzilai-Borwein trial step
};

struct FitConfig {
    double l1_lambda = 0.005;
    int restarts = 20;
    int max_iterations = 5000;
    double convergence_tol = 1e-8;
    StepRule step_rule = StepRule::adaptive;
    double initial_step = 0.01;
    std::uint64_t seed = 0;
    AblationSet ablation;
    double finite_difference_h = 1e-5;
    unsigned threads = 0;  // 0 = hardware concurrency

    // Fixed model settings copied into every candidate ParamSet.
    double epsilon = 0.001;
    double temperature = 1.0;
    ModelOptions options;

    void validate() const;
};

struct FitResult {
    ParamSet params;
    double nll = 0.0;
    double penalized_objective = 0.0;
    bool converged = false;
    int restart_index = 0;
    int iterations = 0;
    int restarts_converged = 0;
};

Coordinates to_coordinates(const ParamSet& params);
// Fitted fields from `coords`, fixed fields from `fixed`.
ParamSet from_coordinates(const Coordinates& coords, const ParamSet& fixed);
// A ParamSet carrying the config's fixed settings and default weights.
ParamSet fixed_settings(const FitConfig& config);

// Starting point of restart `restart_index`; pinned weights are zero.
Coordinates initial_point(const FitConfig& config, std::size_t restart_index);

double negative_log_likelihood(const ParamSet& params, const ResponseCounts& counts);
// Throws DomainError for an empty dataset.
double negative_log_likelihood(const ParamSet& params, const Dataset& data);

double l1_penalty(const ParamSet& params, double lambda);
double penalized_objective(const ParamSet& params, const Dataset& data, const FitConfig& config);

// Gradient of the negative log-likelihood in unconstrained coordinates;
// pinned coordinates report 0. Throws NumericError on a non-finite probe.
Coordinates gradient(const ParamSet& params, const Dataset& data, const FitConfig& config);
Coordinates gradient(const ParamSet& params, const ResponseCounts& counts, const FitConfig& config);

// Best restart by penalized objective (ties to the lowest index), preferring
// converged restarts. Deterministic given config.seed regardless of threads.
FitResult fit(const ResponseCounts& counts, const FitConfig& config);
// Throws DomainError for an empty dataset or one that mixes groups.
FitResult fit(const Dataset& data, const FitConfig& config);

}  // namespace tactful
