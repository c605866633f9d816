#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <vector>

#include "tactful/errors.hpp"
#include "tactful/fit.hpp"
#include "tactful/stats.hpp"

using namespace tactful;

namespace {

ParamSet generator() {
    ParamSet p;
    p.alpha_social_insecure = 5.0;
    return p;
}

double objective_at(const Coordinates& x, const Dataset& d, const FitConfig& c) {
    return penalized_objective(from_coordinates(x, fixed_settings(c)), d, c);
}

// Five-point stencil with a step 100x larger than the library's; an
// independent finite-difference route.
Coordinates stencil_gradient(const ParamSet& p, const Dataset& d) {
    const double h = 1e-3;
    const Coordinates x = to_coordinates(p);
    Coordinates g{};
    for (std::size_t i = 0; i < kNumFreeParams; ++i) {
        auto f = [&](double step) {
            Coordinates y = x;
            y[i] += step;
            return negative_log_likelihood(from_coordinates(y, p), d);
        };
        g[i] = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("negative_log_likelihood") {
    ParamSet flat;
    flat.alpha_explanandum = flat.alpha_latents = 0;
    Dataset one = simulate_dataset(flat, 1, Group::tactful, 1);
    one.records.resize(1);
    CHECK(negative_log_likelihood(flat, one) == doctest::Approx(std::log(4.0)).epsilon(1e-14));

    const Dataset d = simulate_dataset(generator(), 40, Group::tactful, 9);
    Dataset doubled = d;
    doubled.records.insert(doubled.records.end(), d.records.begin(), d.records.end());
    CHECK(negative_log_likelihood(generator(), doubled) == 2.0 * negative_log_likelihood(generator(), d));

    SUBCASE("aggregated counts give the per-record sum") {
        double direct = 0;
        for (const auto& r : d.records) direct -= std::log(choice_distribution(generator(), r.scenario)[r.said]);
        CHECK(negative_log_likelihood(generator(), d) == doctest::Approx(direct).epsilon(1e-12));
    }
    SUBCASE("ten identical choices") {
        Dataset ten;
        for (int i = 0; i < 10; ++i) ten.records.push_back({"p", Group::tactful, Structure::conjunctive, kScenarios[5], kRevealBoth});
        const double p_both = choice_distribution(generator(), kScenarios[5])[kRevealBoth];
        CHECK(negative_log_likelihood(generator(), ten) == doctest::Approx(-10 * std::log(p_both)).epsilon(1e-13));
        const double e = std::exp(1.0);
        CHECK(-10 * std::log(e / (e + 3)) == doctest::Approx(7.4367).epsilon(1e-4));
    }
    CHECK_THROWS_AS(negative_log_likelihood(generator(), Dataset{}), DomainError);
}

TEST_CASE("penalized_objective") {
    const Dataset d = simulate_dataset(generator(), 10, Group::tactful, 3);
    FitConfig c;
    ParamSet p = generator();
    p.alpha_latents = 1;
    const double nll = negative_log_likelihood(p, d);
    CHECK(penalized_objective(p, d, c) == doctest::Approx(nll + 0.035).epsilon(1e-14));
    c.l1_lambda = 0;
    CHECK(penalized_objective(p, d, c) == nll);
    c.l1_lambda = 0.005;
    p.alpha_explanandum = p.alpha_latents = p.alpha_social_insecure = 0;
    CHECK(penalized_objective(p, d, c) == negative_log_likelihood(p, d));
}

TEST_CASE("gradient agrees with an independent stencil") {
    const Dataset d = simulate_dataset(generator(), 100, Group::tactful, 21);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1, 1);
    const FitConfig c;
    for (int trial = 0; trial < 10; ++trial) {
        ParamSet p;
        p.prior_excess = 0.5 + 0.45 * u(gen);
        p.prior_virus = 0.5 + 0.45 * u(gen);
        p.alpha_explanandum = 3 * u(gen);
        p.alpha_latents = 3 * u(gen);
        p.alpha_social_confident = 3 * u(gen);
        p.alpha_social_insecure = 3 * u(gen);
        const Coordinates g = gradient(p, d, c);
        const Coordinates ref = stencil_gradient(p, d);
        for (std::size_t i = 0; i < kNumFreeParams; ++i) {
            CHECK(std::abs(g[i] - ref[i]) <= 1e-4 * std::max(1.0, std::abs(ref[i])));
        }
        // Central-difference self-consistency along each axis.
        const Coordinates x = to_coordinates(p);
        for (std::size_t i = 0; i < kNumFreeParams; ++i) {
            Coordinates hi = x, lo = x;
            hi[i] += c.finite_difference_h;
            lo[i] -= c.finite_difference_h;
            const double diff = negative_log_likelihood(from_coordinates(hi, p), d) -
                                negative_log_likelihood(from_coordinates(lo, p), d);
            CHECK(diff == doctest::Approx(2 * c.finite_difference_h * g[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("gradient symmetry between social conditions") {
    // Mirror every record into the other temperament.
    Dataset d = simulate_dataset(generator(), 60, Group::tactful, 8);
    const auto n = d.records.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto r = d.records[i];
        r.scenario.temperament =
            r.scenario.temperament == Temperament::insecure ? Temperament::confident : Temperament::insecure;
        d.records.push_back(r);
    }
    ParamSet p;
    p.alpha_social_confident = p.alpha_social_insecure = 1.7;
    const Coordinates g = gradient(p, d, FitConfig{});
    CHECK(g[4] == doctest::Approx(g[5]).epsilon(1e-9));
}

TEST_CASE("gradient reports zero on pinned coordinates") {
    const Dataset d = simulate_dataset(generator(), 20, Group::tactful, 2);
    FitConfig c;
    c.ablation = AblationSet::parse("regret+explanandum");
    const Coordinates g = gradient(generator(), d, c);
    CHECK(g[2] == 0.0);
    CHECK(g[4] == 0.0);
    CHECK(g[5] == 0.0);
    CHECK(g[3] != 0.0);
}

TEST_CASE("ablation sets") {
    CHECK(AblationSet::parse("regret+latents") == AblationSet{true, true, false});
    CHECK(AblationSet::parse("full").empty());
    CHECK(AblationSet::parse("none").empty());
    CHECK_THROWS_AS(AblationSet::parse("guilt"), DomainError);
    CHECK_THROWS_AS(AblationSet::parse("regret+"), DomainError);
    for (const auto& a : kStandardAblations) CHECK(AblationSet::parse(a.label()) == a);
    CHECK(kStandardAblations[0].pinned_count() == 2);
    CHECK(kStandardAblations[2].pinned_count() == 3);
    CHECK(kStandardAblations[3].pinned_count() == 1);
}

TEST_CASE("FitConfig validation") {
    FitConfig c;
    CHECK_NOTHROW(c.validate());
    c.restarts = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.l1_lambda = -1;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.epsilon = 0.3;
    CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("fit preconditions") {
    FitConfig c;
    CHECK_THROWS_AS(fit(Dataset{}, c), DomainError);
    Dataset mixed = simulate_dataset(generator(), 3, Group::tactful, 1);
    mixed.records[0].group = Group::candid;
    CHECK_THROWS_AS(fit(mixed, c), DomainError);
}

TEST_CASE("fully ablated model is uniform") {
    const Dataset d = simulate_dataset(generator(), 50, Group::tactful, 4);
    FitConfig c;
    c.ablation = AblationSet{true, true, true};
    c.restarts = 3;
    const FitResult r = fit(d, c);
    CHECK(r.converged);
    CHECK(r.params.alpha_explanandum == 0.0);
    CHECK(r.params.alpha_latents == 0.0);
    CHECK(r.params.alpha_social_confident == 0.0);
    CHECK(r.params.alpha_social_insecure == 0.0);
    CHECK(r.nll == doctest::Approx(300 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("fit is deterministic and independent of thread count") {
    const Dataset d = simulate_dataset(generator(), 80, Group::tactful, 12);
    FitConfig c;
    c.restarts = 6;
    c.seed = 99;
    c.threads = 1;
    const FitResult a = fit(d, c);
    const FitResult b = fit(d, c);
    c.threads = 4;
    const FitResult t = fit(d, c);
    for (const FitResult* other : {&b, &t}) {
        CHECK(other->params == a.params);
        CHECK(other->nll == a.nll);
        CHECK(other->penalized_objective == a.penalized_objective);
        CHECK(other->restart_index == a.restart_index);
        CHECK(other->iterations == a.iterations);
    }
}

TEST_CASE("fit beats every starting point and keeps priors interior") {
    const Dataset d = simulate_dataset(generator(), 100, Group::tactful, 13);
    FitConfig c;
    c.restarts = 8;
    c.seed = 5;
    const FitResult r = fit(d, c);
    CHECK(r.converged);
    CHECK(r.penalized_objective == doctest::Approx(penalized_objective(r.params, d, c)).epsilon(1e-12));
    for (int k = 0; k < c.restarts; ++k) CHECK(r.penalized_objective <= objective_at(initial_point(c, k), d, c));
    CHECK(r.params.prior_excess > 0.0);
    CHECK(r.params.prior_excess < 1.0);
    CHECK(r.params.prior_virus > 0.0);
    CHECK(r.params.prior_virus < 1.0);
}

TEST_CASE("ablation nesting: the full model is never worse") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        ParamSet gen = generator();
        gen.alpha_social_insecure = seed == 2 ? 0.0 : 5.0;
        const Dataset d = simulate_dataset(gen, 100, Group::tactful, 300 + seed);
        FitConfig c;
        c.seed = seed;
        const FitResult full = fit(d, c);
        for (const auto& a : kStandardAblations) {
            FitConfig ac = c;
            ac.ablation = a;
            const FitResult ablated = fit(d, ac);
            CHECK(full.penalized_objective <= ablated.penalized_objective + 1e-9);
        }
    }
}

TEST_CASE("stationarity at the optimum of the smooth objective") {
    const Dataset d = simulate_dataset(generator(), 200, Group::tactful, 17);
    FitConfig c;
    c.l1_lambda = 0;
    c.convergence_tol = 1e-13;
    c.restarts = 4;
    const FitResult r = fit(d, c);
    const Coordinates g = gradient(r.params, d, c);
    double norm2 = 0;
    for (double v : g) norm2 += v * v;
    CHECK(std::sqrt(norm2) < 1e-4);
}

TEST_CASE("non-convergence is reported, not hidden") {
    const Dataset d = simulate_dataset(generator(), 50, Group::tactful, 6);
    FitConfig c;
    c.restarts = 2;
    c.max_iterations = 2;
    const FitResult r = fit(d, c);
    CHECK_FALSE(r.converged);
    CHECK(r.restarts_converged == 0);
}

TEST_CASE("fixed step rule also converges") {
    const Dataset d = simulate_dataset(generator(), 100, Group::tactful, 8);
    FitConfig c;
    c.step_rule = StepRule::fixed;
    c.initial_step = 0.005;
    c.restarts = 4;
    c.max_iterations = 20000;
    const FitResult fixed = fit(d, c);
    c.step_rule = StepRule::adaptive;
    const FitResult adaptive = fit(d, c);
    CHECK(fixed.converged);
    CHECK(fixed.penalized_objective == doctest::Approx(adaptive.penalized_objective).epsilon(1e-6));
}

TEST_CASE("parameter recovery from 200 simulated participants") {
    // Sampling noise moves single-seed r2 around 0.99; check the median over ten datasets.
    std::vector<double> r2;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Dataset d = simulate_dataset(generator(), 200, Group::tactful, seed);
        FitConfig c;
        c.seed = seed;
        const FitResult r = fit(d, c);
        CHECK(r.converged);
        CHECK(r.params.alpha_social_insecure > r.params.alpha_social_confident);
        r2.push_back(choice_r_squared(generator(), r.params));
    }
    CHECK(quantile(r2, 0.5) >= 0.98);
    CHECK(*std::min_element(r2.begin(), r2.end()) >= 0.95);
}
