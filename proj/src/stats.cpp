#include "tactful/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "tactful/errors.hpp"
#include "tactful/parallel.hpp"
#include "tactful/random.hpp"

namespace tactful {

namespace {

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 10000;

// Series for P(a, x); converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kGammaMaxIter; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kGammaEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw NumericError("incomplete gamma series did not converge");
}

// Continued fraction for Q(a, x) (modified Lentz); for x >= a + 1.
double gamma_q_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kGammaMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kGammaEps) return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
    throw NumericError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0)) throw DomainError("incomplete gamma needs a > 0");
    if (!(x >= 0.0)) throw DomainError("incomplete gamma needs x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

double chi_square_sf(double x, int df) {
    if (df <= 0) throw DomainError("chi-square degrees of freedom must be positive");
    if (!(x >= 0.0)) throw DomainError("chi-square statistic must be nonnegative");
    if (df == 2) return std::exp(-0.5 * x);
    return regularized_gamma_q(0.5 * df, 0.5 * x);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

LrtReport likelihood_ratio_test(double ll_full, double ll_ablated, int df) {
    if (df <= 0) throw DomainError("likelihood ratio test needs df > 0");
    LrtReport r;
    r.df = df;
    r.statistic = std::max(0.0, 2.0 * (ll_full - ll_ablated));
    r.p_value = chi_square_sf(r.statistic, df);
    return r;
}

double r_squared(std::span<const double> model_probs, std::span<const double> empirical_props) {
    if (model_probs.size() != empirical_props.size()) throw DomainError("r_squared inputs differ in length");
    const std::size_t n = model_probs.size();
    if (n < 3) throw DomainError("r_squared needs at least three points");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += model_probs[i];
        my += empirical_props[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = model_probs[i] - mx;
        const double dy = empirical_props[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(syy > 0.0)) throw DomainError("r_squared undefined: empirical vector is constant");
    if (!(sxx > 0.0)) throw DomainError("r_squared undefined: model vector is constant");
    return std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
}

double model_r_squared(const ParamSet& params, const Dataset& data) {
    const ProportionTable props = empirical_proportions(count_responses(data));
    std::vector<double> model;
    std::vector<double> empirical;
    for (std::size_t s = 0; s < kScenarios.size(); ++s) {
        if (!props[s]) continue;
        const ChoiceDistribution d = choice_distribution(params, kScenarios[s]);
        for (std::size_t u = 0; u < 4; ++u) {
            model.push_back(d.probs[u]);
            empirical.push_back((*props[s])[u]);
        }
    }
    return r_squared(model, empirical);
}

double choice_r_squared(const ParamSet& a, const ParamSet& b) {
    std::vector<double> pa;
    std::vector<double> pb;
    for (const Scenario& s : kScenarios) {
        const auto da = choice_distribution(a, s);
        const auto db = choice_distribution(b, s);
        pa.insert(pa.end(), da.probs.begin(), da.probs.end());
        pb.insert(pb.end(), db.probs.begin(), db.probs.end());
    }
    return r_squared(pa, pb);
}

double two_proportion_test(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2, std::uint64_t n2) {
    if (n1 == 0 || n2 == 0) throw DomainError("two_proportion_test needs n > 0 on both sides");
    if (k1 > n1 || k2 > n2) throw DomainError("two_proportion_test needs k <= n");
    const double n1d = static_cast<double>(n1);
    const double n2d = static_cast<double>(n2);
    const double pooled = static_cast<double>(k1 + k2) / (n1d + n2d);
    if (pooled <= 0.0 || pooled >= 1.0) return 1.0;
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1d + 1.0 / n2d));
    const double z = (static_cast<double>(k1) / n1d - static_cast<double>(k2) / n2d) / se;
    return std::min(1.0, 2.0 * normal_sf(std::abs(z)));
}

std::string_view to_string(BootstrapStatistic s) {
    switch (s) {
        case BootstrapStatistic::r_squared: return "r2";
        case BootstrapStatistic::prior_excess: return "prior_excess";
        case BootstrapStatistic::prior_virus: return "prior_virus";
        case BootstrapStatistic::alpha_explanandum: return "alpha_explanandum";
        case BootstrapStatistic::alpha_latents: return "alpha_latents";
        case BootstrapStatistic::alpha_social_confident: return "alpha_social_confident";
        case BootstrapStatistic::alpha_social_insecure: return "alpha_social_insecure";
    }
    return "?";
}

BootstrapStatistic parse_bootstrap_statistic(std::string_view s) {
    if (s == "r_squared") return BootstrapStatistic::r_squared;
    for (auto candidate : {BootstrapStatistic::r_squared, BootstrapStatistic::prior_excess,
                           BootstrapStatistic::prior_virus, BootstrapStatistic::alpha_explanandum,
                           BootstrapStatistic::alpha_latents, BootstrapStatistic::alpha_social_confident,
                           BootstrapStatistic::alpha_social_insecure}) {
        if (to_string(candidate) == s) return candidate;
    }
    throw DomainError("unknown statistic '" + std::string(s) + "'");
}

StatisticFn statistic_function(BootstrapStatistic s) {
    switch (s) {
        case BootstrapStatistic::r_squared:
            return [](const FitResult& f, const Dataset& d) { return model_r_squared(f.params, d); };
        case BootstrapStatistic::prior_excess:
            return [](const FitResult& f, const Dataset&) { return f.params.prior_excess; };
        case BootstrapStatistic::prior_virus:
            return [](const FitResult& f, const Dataset&) { return f.params.prior_virus; };
        case BootstrapStatistic::alpha_explanandum:
            return [](const FitResult& f, const Dataset&) { return f.params.alpha_explanandum; };
        case BootstrapStatistic::alpha_latents:
            return [](const FitResult& f, const Dataset&) { return f.params.alpha_latents; };
        case BootstrapStatistic::alpha_social_confident:
            return [](const FitResult& f, const Dataset&) { return f.params.alpha_social_confident; };
        case BootstrapStatistic::alpha_social_insecure:
            return [](const FitResult& f, const Dataset&) { return f.params.alpha_social_insecure; };
    }
    throw DomainError("unknown statistic");
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw DomainError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

BootstrapReport bootstrap_ci(const Dataset& data, const FitConfig& config, const StatisticFn& statistic,
                             int replicates, double confidence, std::uint64_t seed) {
    if (replicates < 1) throw DomainError("bootstrap needs at least one replicate");
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie inside (0,1)");

    // Participant -> record indices, in order of first appearance.
    std::vector<std::string> ids = data.participants();
    if (ids.size() < 2) throw DomainError("bootstrap needs at least two participants");
    std::vector<std::vector<std::size_t>> rows(ids.size());
    {
        std::unordered_map<std::string, std::size_t> slot;
        for (std::size_t i = 0; i < ids.size(); ++i) slot.emplace(ids[i], i);
        for (std::size_t r = 0; r < data.records.size(); ++r) rows[slot.at(data.records[r].participant_id)].push_back(r);
    }

    BootstrapReport report;
    report.replicates = replicates;
    report.confidence_level = confidence;
    report.seed = seed;
    report.point_estimate = statistic(fit(data, config), data);

    FitConfig inner = config;
    inner.threads = 1;
    std::vector<double> values(static_cast<std::size_t>(replicates));
    std::vector<char> ok(values.size(), 0);
    parallel_for(values.size(), config.threads, [&](std::size_t rep) {
        Rng rng(seed, rep);
        Dataset sample;
        sample.records.reserve(data.records.size());
        for (std::size_t k = 0; k < ids.size(); ++k) {
            for (std::size_t r : rows[rng.below(ids.size())]) sample.records.push_back(data.records[r]);
        }
        FitConfig rep_config = inner;
        rep_config.seed = stream_seed(config.seed, rep);
        const FitResult f = fit(sample, rep_config);
        if (!f.converged) return;
        values[rep] = statistic(f, sample);
        ok[rep] = 1;
    });

    for (std::size_t i = 0; i < values.size(); ++i) {
        if (ok[i]) {
            report.values.push_back(values[i]);
        } else {
            ++report.failures;
            report.failed_replicates.push_back(static_cast<int>(i));
        }
    }
    if (report.failures * 5 > replicates) {
        throw NumericError(std::to_string(report.failures) + " of " + std::to_string(replicates) +
                           " bootstrap refits failed to converge");
    }
    const double tail = 0.5 * (1.0 - confidence);
    report.lower = quantile(report.values, tail);
    report.upper = quantile(report.values, 1.0 - tail);
    return report;
}

BootstrapReport bootstrap_ci(const Dataset& data, const FitConfig& config, BootstrapStatistic statistic,
                             int replicates, double confidence, std::uint64_t seed) {
    return bootstrap_ci(data, config, statistic_function(statistic), replicates, confidence, seed);
}

}  // namespace tactful
