#include "tactful/causal.hpp"

#include <cmath>
#include <string>

#include "tactful/errors.hpp"

namespace tactful {

LikelihoodTable::LikelihoodTable(double p00, double p10, double p01, double p11) {
    p_ = {p00, p01, p10, p11};
    for (double p : p_) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("likelihood table entry outside [0,1]");
    }
    if (!(p00 <= p10 && p10 <= p11 && p00 <= p01 && p01 <= p11)) {
        throw DomainError("likelihood table is not monotone in each cause");
    }
}

LikelihoodTable LikelihoodTable::from_epsilon(double epsilon) {
    return LikelihoodTable(epsilon, 0.25, 0.25, 0.5);
}

BeliefState BeliefState::from_weights(const std::array<double, 4>& weights) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("belief weight negative or non-finite");
        total += w;
    }
    if (!(total > 0.0)) throw DomainError("belief has zero total weight");
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) out[i] = weights[i] / total;
    return BeliefState(out);
}

BeliefState BeliefState::point_mass(FactorState w) {
    std::array<double, 4> out{};
    out[w.index()] = 1.0;
    return BeliefState(out);
}

std::string_view Utterance::label() const {
    static constexpr std::string_view labels[] = {"TV", "T", "V", "none"};
    return labels[index()];
}

Utterance parse_utterance_label(std::string_view label) {
    for (Utterance u : kUtterances) {
        if (u.label() == label) return u;
    }
    throw DomainError("unknown utterance label '" + std::string(label) + "'");
}

std::string_view to_string(CounterfactualMode mode) {
    return mode == CounterfactualMode::twin ? "twin" : "interventional";
}

CounterfactualMode parse_counterfactual_mode(std::string_view s) {
    if (s == "twin") return CounterfactualMode::twin;
    if (s == "interventional") return CounterfactualMode::interventional;
    throw DomainError("unknown counterfactual mode '" + std::string(s) + "'");
}

BeliefState independent_prior(double prior_excess, double prior_virus) {
    if (!(prior_excess > 0.0 && prior_excess < 1.0) || !(prior_virus > 0.0 && prior_virus < 1.0)) {
        throw DomainError("priors must lie strictly inside (0,1)");
    }
    std::array<double, 4> w{};
    for (FactorState s : kWorlds) {
        w[s.index()] = (s.excess ? prior_excess : 1.0 - prior_excess) * (s.virus ? prior_virus : 1.0 - prior_virus);
    }
    return BeliefState::from_weights(w);
}

BeliefState restrict(const BeliefState& belief, FactorState truth, Utterance utterance) {
    if (!utterance.reveal_excess && !utterance.reveal_virus) return belief;
    std::array<double, 4> w{};
    double total = 0.0;
    for (FactorState s : kWorlds) {
        const bool consistent = (!utterance.reveal_excess || s.excess == truth.excess) &&
                                (!utterance.reveal_virus || s.virus == truth.virus);
        if (consistent) {
            w[s.index()] = belief.weight(s);
            total += w[s.index()];
        }
    }
    if (!(total > 0.0)) throw InvariantError("utterance eliminated every world the listener considers possible");
    if (w == belief.weights()) return belief;  // already restricted
    return BeliefState::from_weights(w);
}

double prob_sick(const BeliefState& belief, const LikelihoodTable& table) {
    double p = 0.0;
    for (FactorState s : kWorlds) p += belief.weight(s) * table(s);
    return p;
}

BeliefState condition_on_sick(const BeliefState& belief, const LikelihoodTable& table) {
    std::array<double, 4> w{};
    for (FactorState s : kWorlds) w[s.index()] = belief.weight(s) * table(s);
    if (!(w[0] + w[1] + w[2] + w[3] > 0.0)) throw DomainError("observation S=1 has zero likelihood under belief");
    return BeliefState::from_weights(w);
}

double counterfactual_sick_given_world(const LikelihoodTable& table, FactorState world) {
    const double actual = table(world);
    if (!(actual > 0.0)) throw DomainError("cannot abduct noise from an impossible observation");
    if (!world.excess) return 1.0;
    return table({false, world.virus}) / actual;
}

double expected_regret(const BeliefState& belief_after_utterance, const LikelihoodTable& table,
                       CounterfactualMode mode) {
    double cf = 0.0;
    if (mode == CounterfactualMode::twin) {
        const BeliefState posterior = condition_on_sick(belief_after_utterance, table);
        for (FactorState s : kWorlds) {
            if (posterior.weight(s) > 0.0) cf += posterior.weight(s) * counterfactual_sick_given_world(table, s);
        }
    } else {
        for (FactorState s : kWorlds) cf += belief_after_utterance.weight(s) * table({false, s.virus});
    }
    return 1.0 - cf;
}

}  // namespace tactful
