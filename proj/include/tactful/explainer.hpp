#pragma once

// The explainer (doctor) agent. For each utterance it scores how well the
// patient would understand the sickness afterwards and how much regret the
// utterance would provoke, then chooses by softmax over the weighted total.

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "tactful/causal.hpp"

namespace tactful {

enum class Temperament { confident, insecure };

std::string_view to_string(Temperament t);
Temperament parse_temperament(std::string_view s);

// What the explainer privately knows.
struct Scenario {
    FactorState truth;
    Temperament temperament = Temperament::confident;

    // "<temperament>:<excess bit><virus bit>", e.g. "insecure:11".
    std::string label() const;
    // Position in kScenarios; throws DomainError for the (0,0) truth.
    std::size_t index() const;

    friend constexpr bool operator==(Scenario, Scenario) = default;
};

Scenario parse_scenario_label(std::string_view label);

// The six analysed cells: temperament x {virus only, excess only, both}.
inline constexpr std::array<Scenario, 6> kScenarios = {
    Scenario{{false, true}, Temperament::confident}, Scenario{{true, false}, Temperament::confident},
    Scenario{{true, true}, Temperament::confident},  Scenario{{false, true}, Temperament::insecure},
    Scenario{{true, false}, Temperament::insecure},  Scenario{{true, true}, Temperament::insecure}};

// Settings that change the model's semantics but are never fitted.
struct ModelOptions {
    CounterfactualMode counterfactual = CounterfactualMode::twin;
    // When false, the latents term scores the true world under the belief
    // restricted by the utterance alone, without the S=1 observation.
    bool latents_condition_on_sick = true;
    // Replaces the epsilon-derived table, e.g. for a conjunctive or
    // disjunctive mechanism.
    std::optional<LikelihoodTable> table;

    friend bool operator==(const ModelOptions&, const ModelOptions&) = default;
};

struct ParamSet {
    // Fitted.
    double prior_excess = 0.1;
    double prior_virus = 0.1;
    double alpha_explanandum = 1.0;
    double alpha_latents = 1.0;
    double alpha_social_confident = 0.0;
    double alpha_social_insecure = 0.0;
    // Fixed.
    double epsilon = 0.001;
    double temperature = 1.0;
    ModelOptions options;

    // Throws DomainError naming the offending field.
    void validate() const;

    LikelihoodTable likelihood() const;
    BeliefState prior() const { return independent_prior(prior_excess, prior_virus); }
    double alpha_social(Temperament t) const {
        return t == Temperament::insecure ? alpha_social_insecure : alpha_social_confident;
    }

    friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

struct UtilityTerms {
    double explanandum = 0.0;  // Pr(S=1 | utterance)
    double latents = 0.0;      // posterior probability of the true world
    double social = 0.0;       // expected regret
};

// Indexed like kUtterances.
struct ChoiceDistribution {
    std::array<double, 4> probs{};

    double operator[](Utterance u) const { return probs[u.index()]; }
    Utterance argmax() const;
};

double v_explanandum(const ParamSet& params, const Scenario& scenario, Utterance u);
double v_latents(const ParamSet& params, const Scenario& scenario, Utterance u);
double social_cost(const ParamSet& params, const Scenario& scenario, Utterance u);

// All three terms with one shared belief update.
UtilityTerms utility_terms(const ParamSet& params, const Scenario& scenario, Utterance u);

// Terms for every utterance, indexed like kUtterances. Depends only on the
// priors and the fixed settings, not on the alpha weights.
std::array<UtilityTerms, 4> utility_table(const ParamSet& params, const Scenario& scenario);

double combine_utility(const ParamSet& params, Temperament temperament, const UtilityTerms& terms);
double total_utility(const ParamSet& params, const Scenario& scenario, Utterance u);

// Pr(i) proportional to exp(temperature * utilities[i]), max-subtracted.
ChoiceDistribution softmax(const std::array<double, 4>& utilities, double temperature);

ChoiceDistribution choice_distribution(const ParamSet& params, const Scenario& scenario);

}  // namespace tactful
