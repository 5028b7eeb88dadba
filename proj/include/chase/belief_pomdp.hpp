#pragma once

// Hidden pitch type: Bayes-rule belief tracking from observed deliveries and
// QMDP action ranking on top of per-type exact value tables.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "chase/dp_solver.hpp"
#include "chase/match_model.hpp"

namespace chase {

struct PitchType {
    std::string name;
    TransitionModel model;
};

/// Static for the whole chase.
struct PitchSet {
    std::vector<PitchType> types;

    void validate() const {
        if (types.size() < 2) throw ModelError("a pitch set needs at least 2 types");
        for (const auto& t : types) {
            try {
                t.model.validate();
            } catch (const ModelError& e) {
                throw ModelError("pitch type " + t.name + ": " + e.what());
            }
        }
    }

    std::size_t indexOf(const std::string& name) const {
        for (std::size_t i = 0; i < types.size(); ++i)
            if (types[i].name == name) return i;
        throw ModelError("unknown pitch type '" + name + "'");
    }
};

/// Weights aligned with PitchSet::types.
struct Belief {
    std::vector<double> weights;

    static Belief uniform(std::size_t n) { return {std::vector<double>(n, 1.0 / static_cast<double>(n))}; }
    static Belief pointMass(std::size_t n, std::size_t at) {
        Belief b{std::vector<double>(n, 0.0)};
        b.weights.at(at) = 1.0;
        return b;
    }

    void validate() const {
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw ModelError("negative belief weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance) throw ModelError("belief weights do not sum to 1");
    }
};

/// Default types: each action row of the default model tilted by 0.8 (GREEN),
/// 1.0 (FLAT), 1.3 (DUSTY).
inline PitchSet defaultPitchSet() {
    const std::vector<std::pair<std::string, double>> factors{{"GREEN", 0.8}, {"FLAT", 1.0}, {"DUSTY", 1.3}};
    const auto base = defaultModel();
    PitchSet set;
    for (const auto& [name, factor] : factors) {
        TransitionModel m;
        for (BattingAction a : kActions) m.setRow(a, tiltDistribution(base.row(a), factor).distribution);
        set.types.push_back({name, m});
    }
    return set;
}

/// b'(type) proportional to b(type) p(outcome | action, type). Throws
/// ModelError when no weighted type can produce the outcome.
inline Belief updatePitchBelief(const PitchSet& pitches, const Belief& belief, BattingAction action,
                                BallOutcome outcome, const MatchState* state = nullptr) {
    if (belief.weights.size() != pitches.types.size()) throw ModelError("belief and pitch set sizes differ");
    belief.validate();
    Belief post{std::vector<double>(belief.weights.size())};
    double z = 0.0;
    for (std::size_t i = 0; i < post.weights.size(); ++i) {
        const auto& model = pitches.types[i].model;
        const double lik = state ? model.row(action, *state)[outcome] : model.row(action)[outcome];
        post.weights[i] = belief.weights[i] * lik;
        z += post.weights[i];
    }
    if (!(z > 0.0))
        throw ModelError("outcome " + std::string(outcomeName(outcome)) + " is impossible under every weighted pitch type");
    for (double& w : post.weights) w /= z;
    return post;
}

/// Q(b, a) = sum_type b(type) Q_type(s, a), ranked like recommend().
/// `per_type_values` maps pitch name to that type's solved value table.
inline std::vector<ActionValue> qmdpRecommend(const PitchSet& pitches, const Belief& belief,
                                              const std::map<std::string, ValueTable>& per_type_values,
                                              const RewardSpec& reward, const MatchState& state) {
    if (belief.weights.size() != pitches.types.size()) throw ModelError("belief and pitch set sizes differ");
    belief.validate();
    std::vector<ActionValue> items;
    for (BattingAction a : kActions) items.push_back({a, 0.0});
    bool checked = false;
    for (std::size_t i = 0; i < pitches.types.size(); ++i) {
        if (belief.weights[i] == 0.0) continue;
        const auto& type = pitches.types[i];
        auto it = per_type_values.find(type.name);
        if (it == per_type_values.end()) throw ModelError("missing value table for pitch type " + type.name);
        if (!checked) {
            requireDecisionState(it->second.bounds(), state);
            checked = true;
        }
        for (auto& item : items)
            item.value += belief.weights[i] * lookaheadValue(it->second, type.model, reward, state, item.action);
    }
    return rankActions(std::move(items));
}

/// Solves every type; the tables are independent and immutable afterwards.
inline std::map<std::string, ValueTable> solvePitchSet(const PitchSet& pitches, const RewardSpec& reward,
                                                       const Bounds& bounds) {
    std::map<std::string, ValueTable> out;
    for (const auto& t : pitches.types) out.emplace(t.name, solveChase(t.model, reward, bounds).values);
    return out;
}

// ---------------------------------------------------------------------------
// Persistence: one section per type, each a transition model document.
// ---------------------------------------------------------------------------

inline json pitchSetToJson(const PitchSet& set) {
    json doc = makeDocument("pitch_types");
    json types = json::array();
    for (const auto& t : set.types) types.push_back({{"name", t.name}, {"model", modelToJson(t.model)}});
    doc["types"] = types;
    return doc;
}

inline PitchSet pitchSetFromJson(const json& doc) {
    requireDocument(doc, "pitch_types");
    PitchSet set;
    for (const auto& t : doc.at("types")) set.types.push_back({t.at("name").get<std::string>(), modelFromJson(t.at("model"))});
    set.validate();
    return set;
}

}  // namespace chase
