#include "tactful/explainer.hpp"

#include <algorithm>
#include <cmath>

#include "tactful/errors.hpp"

namespace tactful {

std::string_view to_string(Temperament t) { return t == Temperament::insecure ? "insecure" : "confident"; }

Temperament parse_temperament(std::string_view s) {
    if (s == "confident") return Temperament::confident;
    if (s == "insecure") return Temperament::insecure;
    throw DomainError("unknown temperament '" + std::string(s) + "'");
}

std::string Scenario::label() const {
    std::string out(to_string(temperament));
    out += ':';
    out += truth.excess ? '1' : '0';
    out += truth.virus ? '1' : '0';
    return out;
}

std::size_t Scenario::index() const {
    for (std::size_t i = 0; i < kScenarios.size(); ++i) {
        if (kScenarios[i] == *this) return i;
    }
    throw DomainError("scenario " + label() + " is not modeled (a sick patient has at least one cause)");
}

Scenario parse_scenario_label(std::string_view label) {
    const auto colon = label.find(':');
    if (colon == std::string_view::npos) throw DomainError("scenario label must look like 'insecure:11'");
    const auto bits = label.substr(colon + 1);
    if (bits.size() != 2 || (bits[0] != '0' && bits[0] != '1') || (bits[1] != '0' && bits[1] != '1')) {
        throw DomainError("scenario label '" + std::string(label) + "' needs two 0/1 digits after ':'");
    }
    Scenario s{{bits[0] == '1', bits[1] == '1'}, parse_temperament(label.substr(0, colon))};
    s.index();
    return s;
}

void ParamSet::validate() const {
    auto interior = [](double p, const char* name) {
        if (!(p > 0.0 && p < 1.0)) throw DomainError(std::string(name) + " must lie strictly inside (0,1)");
    };
    auto finite = [](double x, const char* name) {
        if (!std::isfinite(x)) throw DomainError(std::string(name) + " must be finite");
    };
    interior(prior_excess, "prior_excess");
    interior(prior_virus, "prior_virus");
    finite(alpha_explanandum, "alpha_explanandum");
    finite(alpha_latents, "alpha_latents");
    finite(alpha_social_confident, "alpha_social_confident");
    finite(alpha_social_insecure, "alpha_social_insecure");
    if (!(epsilon > 0.0 && epsilon < 0.125)) throw DomainError("epsilon must lie inside (0,0.125)");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw DomainError("temperature must be positive");
}

LikelihoodTable ParamSet::likelihood() const {
    return options.table ? *options.table : LikelihoodTable::from_epsilon(epsilon);
}

Utterance ChoiceDistribution::argmax() const {
    const auto it = std::max_element(probs.begin(), probs.end());
    return kUtterances[static_cast<std::size_t>(it - probs.begin())];
}

namespace {

UtilityTerms terms_for(const BeliefState& prior, const LikelihoodTable& table, const ModelOptions& options,
                       const Scenario& scenario, Utterance u) {
    const BeliefState told = restrict(prior, scenario.truth, u);
    UtilityTerms t;
    t.explanandum = prob_sick(told, table);
    t.latents = options.latents_condition_on_sick ? condition_on_sick(told, table).weight(scenario.truth)
                                                  : told.weight(scenario.truth);
    t.social = expected_regret(told, table, options.counterfactual);
    return t;
}

}  // namespace

UtilityTerms utility_terms(const ParamSet& params, const Scenario& scenario, Utterance u) {
    return terms_for(params.prior(), params.likelihood(), params.options, scenario, u);
}

std::array<UtilityTerms, 4> utility_table(const ParamSet& params, const Scenario& scenario) {
    const BeliefState prior = params.prior();
    const LikelihoodTable table = params.likelihood();
    std::array<UtilityTerms, 4> out;
    for (Utterance u : kUtterances) out[u.index()] = terms_for(prior, table, params.options, scenario, u);
    return out;
}

double v_explanandum(const ParamSet& params, const Scenario& scenario, Utterance u) {
    return prob_sick(restrict(params.prior(), scenario.truth, u), params.likelihood());
}

double v_latents(const ParamSet& params, const Scenario& scenario, Utterance u) {
    return utility_terms(params, scenario, u).latents;
}

double social_cost(const ParamSet& params, const Scenario& scenario, Utterance u) {
    return expected_regret(restrict(params.prior(), scenario.truth, u), params.likelihood(),
                           params.options.counterfactual);
}

double combine_utility(const ParamSet& params, Temperament temperament, const UtilityTerms& terms) {
    return params.alpha_explanandum * terms.explanandum + params.alpha_latents * terms.latents -
           params.alpha_social(temperament) * terms.social;
}

double total_utility(const ParamSet& params, const Scenario& scenario, Utterance u) {
    return combine_utility(params, scenario.temperament, utility_terms(params, scenario, u));
}

ChoiceDistribution softmax(const std::array<double, 4>& utilities, double temperature) {
    const double top = *std::max_element(utilities.begin(), utilities.end());
    ChoiceDistribution d;
    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        d.probs[i] = std::exp(temperature * (utilities[i] - top));
        total += d.probs[i];
    }
    for (double& p : d.probs) p /= total;
    return d;
}

ChoiceDistribution choice_distribution(const ParamSet& params, const Scenario& scenario) {
    const auto terms = utility_table(params, scenario);
    std::array<double, 4> utilities{};
    for (std::size_t i = 0; i < 4; ++i) utilities[i] = combine_utility(params, scenario.temperament, terms[i]);
    return softmax(utilities, params.temperature);
}

}  // namespace tactful
