#include "tactful/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tactful/errors.hpp"
#include "tactful/parallel.hpp"
#include "tactful/random.hpp"

namespace tactful {

namespace {

constexpr std::size_t kPriorExcess = 0;
constexpr std::size_t kPriorVirus = 1;
constexpr std::size_t kAlphaExplanandum = 2;
constexpr std::size_t kAlphaLatents = 3;
constexpr std::size_t kAlphaSocialConfident = 4;
constexpr std::size_t kAlphaSocialInsecure = 5;

// Prior logits are kept inside this box so the priors stay representable
// strictly inside (0,1).
constexpr double kMaxLogit = 30.0;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p) - std::log1p(-p); }

using FeatureGrid = std::array<std::array<UtilityTerms, 4>, 6>;

FeatureGrid features(const ParamSet& params, const ResponseCounts& counts) {
    FeatureGrid grid{};
    for (std::size_t s = 0; s < kScenarios.size(); ++s) {
        if (counts.scenario_total(s) > 0) grid[s] = utility_table(params, kScenarios[s]);
    }
    return grid;
}

double nll_from_features(const FeatureGrid& grid, const ParamSet& params, const ResponseCounts& counts) {
    double nll = 0.0;
    for (std::size_t s = 0; s < kScenarios.size(); ++s) {
        const auto n = counts.scenario_total(s);
        if (n == 0) continue;
        std::array<double, 4> z{};
        for (std::size_t u = 0; u < 4; ++u) {
            z[u] = params.temperature * combine_utility(params, kScenarios[s].temperament, grid[s][u]);
        }
        const double top = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - top);
        const double log_norm = top + std::log(sum);
        for (std::size_t u = 0; u < 4; ++u) {
            const auto c = counts.counts[s][u];
            if (c > 0) nll -= static_cast<double>(c) * (z[u] - log_norm);
        }
    }
    return nll;
}

double soft_threshold(double x, double threshold) {
    if (x > threshold) return x - threshold;
    if (x < -threshold) return x + threshold;
    return 0.0;
}

// Prox of t*lambda*|alpha|_1 plus the pinned-coordinate and logit-box constraints.
Coordinates proximal_step(const Coordinates& x, const Coordinates& g, double t, const FitConfig& config) {
    Coordinates z{};
    for (std::size_t i = 0; i < kNumFreeParams; ++i) {
        const double moved = x[i] - t * g[i];
        if (i <= kPriorVirus) {
            z[i] = std::clamp(moved, -kMaxLogit, kMaxLogit);
        } else if (config.ablation.pins(i)) {
            z[i] = 0.0;
        } else {
            z[i] = soft_threshold(moved, t * config.l1_lambda);
        }
    }
    return z;
}

double alpha_l1(const Coordinates& x) {
    return std::abs(x[kAlphaExplanandum]) + std::abs(x[kAlphaLatents]) + std::abs(x[kAlphaSocialConfident]) +
           std::abs(x[kAlphaSocialInsecure]);
}

class Objective {
public:
    Objective(const ResponseCounts& counts, const ParamSet& fixed) : counts_(counts), fixed_(fixed) {}

    double value(const Coordinates& x) const {
        const ParamSet p = from_coordinates(x, fixed_);
        return checked(nll_from_features(features(p, counts_), p, counts_));
    }

    Coordinates gradient(const Coordinates& x, const AblationSet& ablation, double h) const {
        Coordinates g{};
        const ParamSet base = from_coordinates(x, fixed_);
        const FeatureGrid base_grid = features(base, counts_);
        for (std::size_t i = 0; i < kNumFreeParams; ++i) {
            if (ablation.pins(i)) continue;
            Coordinates hi = x;
            Coordinates lo = x;
            hi[i] += h;
            lo[i] -= h;
            const ParamSet p_hi = from_coordinates(hi, fixed_);
            const ParamSet p_lo = from_coordinates(lo, fixed_);
            double f_hi;
            double f_lo;
            if (i <= kPriorVirus) {
                f_hi = nll_from_features(features(p_hi, counts_), p_hi, counts_);
                f_lo = nll_from_features(features(p_lo, counts_), p_lo, counts_);
            } else {
                // Alphas enter linearly; the utility terms are unchanged.
                f_hi = nll_from_features(base_grid, p_hi, counts_);
                f_lo = nll_from_features(base_grid, p_lo, counts_);
            }
            g[i] = (checked(f_hi) - checked(f_lo)) / (2.0 * h);
        }
        return g;
    }

private:
    static double checked(double f) {
        if (!std::isfinite(f)) throw NumericError("objective is not finite at a probe point");
        return f;
    }

    const ResponseCounts& counts_;
    ParamSet fixed_;
};

struct RestartOutcome {
    Coordinates x{};
    double nll = 0.0;
    double objective = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

double dot(const Coordinates& a, const Coordinates& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < kNumFreeParams; ++i) s += a[i] * b[i];
    return s;
}

RestartOutcome descend(const Objective& objective, Coordinates x, const FitConfig& config) {
    constexpr double kMinStep = 1e-12;
    constexpr double kMaxStep = 1e4;
    constexpr int kMaxBacktracks = 60;

    RestartOutcome out;
    double f = objective.value(x);
    double total = f + config.l1_lambda * alpha_l1(x);
    Coordinates g = objective.gradient(x, config.ablation, config.finite_difference_h);
    double t = config.initial_step;
    Coordinates prev_x{};
    Coordinates prev_g{};

    for (int it = 1; it <= config.max_iterations; ++it) {
        out.iterations = it;
        if (config.step_rule == StepRule::adaptive && it > 1) {
            Coordinates s{};
            Coordinates y{};
            for (std::size_t i = 0; i < kNumFreeParams; ++i) {
                s[i] = x[i] - prev_x[i];
                y[i] = g[i] - prev_g[i];
            }
            const double sy = dot(s, y);
            t = sy > 0.0 ? std::clamp(dot(s, s) / sy, kMinStep, kMaxStep) : std::min(2.0 * t, kMaxStep);
        } else if (config.step_rule == StepRule::fixed) {
            t = config.initial_step;
        }

        Coordinates z{};
        double fz = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            z = proximal_step(x, g, t, config);
            Coordinates d{};
            for (std::size_t i = 0; i < kNumFreeParams; ++i) d[i] = z[i] - x[i];
            fz = objective.value(z);
            const double model = f + dot(g, d) + dot(d, d) / (2.0 * t);
            if (fz <= model + 1e-12 * std::abs(f)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;

        const double new_total = fz + config.l1_lambda * alpha_l1(z);
        const double change = std::abs(total - new_total);
        prev_x = x;
        prev_g = g;
        x = z;
        f = fz;
        total = new_total;
        if (change < config.convergence_tol) {
            out.converged = true;
            break;
        }
        g = objective.gradient(x, config.ablation, config.finite_difference_h);
    }

    out.x = x;
    out.nll = f;
    out.objective = total;
    return out;
}

}  // namespace

bool AblationSet::pins(std::size_t coordinate) const {
    switch (coordinate) {
        case kAlphaExplanandum: return explanandum;
        case kAlphaLatents: return latents;
        case kAlphaSocialConfident:
        case kAlphaSocialInsecure: return regret;
        default: return false;
    }
}

std::string AblationSet::label() const {
    if (empty()) return "full";
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += '+';
        out += name;
    };
    add(regret, "regret");
    add(latents, "latents");
    add(explanandum, "explanandum");
    return out;
}

AblationSet AblationSet::parse(std::string_view text) {
    AblationSet a;
    if (text == "none" || text == "full") return a;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find('+', start), text.size());
        const auto name = text.substr(start, end - start);
        if (name == "regret") {
            a.regret = true;
        } else if (name == "latents") {
            a.latents = true;
        } else if (name == "explanandum") {
            a.explanandum = true;
        } else {
            throw DomainError("unknown ablation '" + std::string(name) + "' (expected regret, latents, explanandum)");
        }
        start = end + 1;
    }
    return a;
}

void FitConfig::validate() const {
    if (!(l1_lambda >= 0.0) || !std::isfinite(l1_lambda)) throw DomainError("l1_lambda must be nonnegative");
    if (restarts < 1) throw DomainError("restarts must be positive");
    if (max_iterations < 1) throw DomainError("max_iterations must be positive");
    if (!(convergence_tol > 0.0)) throw DomainError("convergence_tol must be positive");
    if (!(initial_step > 0.0) || !std::isfinite(initial_step)) throw DomainError("initial_step must be positive");
    if (!(finite_difference_h > 0.0)) throw DomainError("finite_difference_h must be positive");
    fixed_settings(*this).validate();
}

Coordinates to_coordinates(const ParamSet& params) {
    return {logit(params.prior_excess), logit(params.prior_virus), params.alpha_explanandum, params.alpha_latents,
            params.alpha_social_confident, params.alpha_social_insecure};
}

ParamSet from_coordinates(const Coordinates& coords, const ParamSet& fixed) {
    ParamSet p = fixed;
    p.prior_excess = logistic(coords[kPriorExcess]);
    p.prior_virus = logistic(coords[kPriorVirus]);
    p.alpha_explanandum = coords[kAlphaExplanandum];
    p.alpha_latents = coords[kAlphaLatents];
    p.alpha_social_confident = coords[kAlphaSocialConfident];
    p.alpha_social_insecure = coords[kAlphaSocialInsecure];
    return p;
}

ParamSet fixed_settings(const FitConfig& config) {
    ParamSet p;
    p.epsilon = config.epsilon;
    p.temperature = config.temperature;
    p.options = config.options;
    return p;
}

Coordinates initial_point(const FitConfig& config, std::size_t restart_index) {
    Rng rng(config.seed, restart_index);
    Coordinates x{};
    x[kPriorExcess] = rng.uniform(-3.0, 3.0);
    x[kPriorVirus] = rng.uniform(-3.0, 3.0);
    for (std::size_t i = kAlphaExplanandum; i < kNumFreeParams; ++i) {
        const double draw = rng.uniform(-2.0, 2.0);
        x[i] = config.ablation.pins(i) ? 0.0 : draw;
    }
    return x;
}

double negative_log_likelihood(const ParamSet& params, const ResponseCounts& counts) {
    if (counts.total() == 0) throw DomainError("negative log-likelihood of an empty dataset");
    return nll_from_features(features(params, counts), params, counts);
}

double negative_log_likelihood(const ParamSet& params, const Dataset& data) {
    if (data.records.empty()) throw DomainError("negative log-likelihood of an empty dataset");
    return negative_log_likelihood(params, count_responses(data));
}

double l1_penalty(const ParamSet& params, double lambda) {
    return lambda * alpha_l1(to_coordinates(params));
}

double penalized_objective(const ParamSet& params, const Dataset& data, const FitConfig& config) {
    return negative_log_likelihood(params, data) + l1_penalty(params, config.l1_lambda);
}

Coordinates gradient(const ParamSet& params, const ResponseCounts& counts, const FitConfig& config) {
    params.validate();
    if (counts.total() == 0) throw DomainError("gradient of an empty dataset");
    return Objective(counts, params).gradient(to_coordinates(params), config.ablation, config.finite_difference_h);
}

Coordinates gradient(const ParamSet& params, const Dataset& data, const FitConfig& config) {
    return gradient(params, count_responses(data), config);
}

FitResult fit(const ResponseCounts& counts, const FitConfig& config) {
    config.validate();
    if (counts.total() == 0) throw DomainError("cannot fit an empty dataset");

    const ParamSet fixed = fixed_settings(config);
    const Objective objective(counts, fixed);
    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
    parallel_for(outcomes.size(), config.threads, [&](std::size_t r) {
        outcomes[r] = descend(objective, initial_point(config, r), config);
    });

    const bool any_converged = std::any_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.converged; });
    std::size_t best = outcomes.size();
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        if (any_converged && !outcomes[r].converged) continue;
        if (best == outcomes.size() || outcomes[r].objective < outcomes[best].objective) best = r;
    }

    const auto& o = outcomes[best];
    FitResult result;
    result.params = from_coordinates(o.x, fixed);
    result.nll = o.nll;
    result.penalized_objective = o.objective;
    result.converged = o.converged;
    result.restart_index = static_cast<int>(best);
    result.iterations = o.iterations;
    result.restarts_converged =
        static_cast<int>(std::count_if(outcomes.begin(), outcomes.end(), [](const auto& x) { return x.converged; }));
    return result;
}

FitResult fit(const Dataset& data, const FitConfig& config) {
    if (data.records.empty()) throw DomainError("cannot fit an empty dataset");
    const Group g = data.records.front().group;
    for (const auto& r : data.records) {
        if (r.group != g) throw DomainError("fit expects a single participant group; split the data first");
    }
    return fit(count_responses(data), config);
}

}  // namespace tactful
