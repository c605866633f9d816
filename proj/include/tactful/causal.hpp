#pragma once

// Discrete causal model of the disease: two binary causes (excess drinking,
// virus) and one binary effect (sick). Beliefs are distributions over the
// four cause worlds.

#include <array>
#include <cstddef>
#include <string_view>

namespace tactful {

// One of the four latent worlds. `excess` is 1 when the patient's drinking
// exceeded their personal threshold.
struct FactorState {
    bool excess = false;
    bool virus = false;

    constexpr std::size_t index() const { return (excess ? 2U : 0U) + (virus ? 1U : 0U); }
    static constexpr FactorState from_index(std::size_t i) { return {(i & 2U) != 0, (i & 1U) != 0}; }

    friend constexpr bool operator==(FactorState, FactorState) = default;
};

inline constexpr std::array<FactorState, 4> kWorlds = {
    FactorState{false, false}, FactorState{false, true}, FactorState{true, false}, FactorState{true, true}};

// Pr(sick | excess, virus). Entries are validated to lie in [0,1] and to be
// monotone in each cause.
class LikelihoodTable {
public:
    LikelihoodTable(double p00, double p10, double p01, double p11);

    // The factor-count table: epsilon / 0.25 / 0.25 / 0.5.
    static LikelihoodTable from_epsilon(double epsilon);

    double operator()(FactorState w) const { return p_[w.index()]; }
    double p00() const { return p_[0]; }
    double p10() const { return p_[2]; }
    double p01() const { return p_[1]; }
    double p11() const { return p_[3]; }

    friend bool operator==(const LikelihoodTable&, const LikelihoodTable&) = default;

private:
    std::array<double, 4> p_;  // indexed by FactorState::index()
};

class BeliefState {
public:
    // Normalizes `weights` (indexed by FactorState::index()). Throws
    // DomainError on negative or non-finite entries or a zero total.
    static BeliefState from_weights(const std::array<double, 4>& weights);

    static BeliefState point_mass(FactorState w);

    double weight(FactorState w) const { return w_[w.index()]; }
    const std::array<double, 4>& weights() const { return w_; }

    double marginal_excess() const { return w_[2] + w_[3]; }
    double marginal_virus() const { return w_[1] + w_[3]; }

    friend bool operator==(const BeliefState&, const BeliefState&) = default;

private:
    explicit BeliefState(const std::array<double, 4>& w) : w_(w) {}
    std::array<double, 4> w_;
};

// Which true facts the explainer mentions.
struct Utterance {
    bool reveal_excess = false;
    bool reveal_virus = false;

    // Position in kUtterances.
    constexpr std::size_t index() const {
        return reveal_excess ? (reveal_virus ? 0U : 1U) : (reveal_virus ? 2U : 3U);
    }
    // "TV", "T", "V" or "none".
    std::string_view label() const;

    friend constexpr bool operator==(Utterance, Utterance) = default;
};

inline constexpr Utterance kRevealBoth{true, true};
inline constexpr Utterance kRevealExcess{true, false};
inline constexpr Utterance kRevealVirus{false, true};
inline constexpr Utterance kRevealNothing{false, false};
inline constexpr std::array<Utterance, 4> kUtterances = {kRevealBoth, kRevealExcess, kRevealVirus, kRevealNothing};

Utterance parse_utterance_label(std::string_view label);

enum class CounterfactualMode {
    twin,            // abduct shared noise from S=1, then intervene
    interventional,  // Pr(S=1 | do(excess=0)) under the unconditioned belief
};

std::string_view to_string(CounterfactualMode mode);
CounterfactualMode parse_counterfactual_mode(std::string_view s);

BeliefState independent_prior(double prior_excess, double prior_virus);

// Zeroes worlds that contradict a revealed fact and renormalizes.
BeliefState restrict(const BeliefState& belief, FactorState truth, Utterance utterance);

double prob_sick(const BeliefState& belief, const LikelihoodTable& table);

// Posterior over worlds after observing S=1.
BeliefState condition_on_sick(const BeliefState& belief, const LikelihoodTable& table);

// Pr(S'=1 | S=1, world, do(excess:=0)) under a single shared uniform noise:
// table(0,V) / table(E,V).
double counterfactual_sick_given_world(const LikelihoodTable& table, FactorState world);

// 1 - expected counterfactual sickness had the patient abstained.
// twin: expectation under the S=1 posterior of the per-world twin value.
// interventional: Pr(S=1 | do(excess=0)) under `belief` itself.
double expected_regret(const BeliefState& belief_after_utterance, const LikelihoodTable& table,
                       CounterfactualMode mode = CounterfactualMode::twin);

}  // namespace tactful
