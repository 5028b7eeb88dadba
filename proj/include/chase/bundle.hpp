#pragma once

// A solved model packaged for decision support: transition model, reward,
// bounds and the value/policy tables solved from exactly that model.

#include <string>
#include <vector>

#include "chase/document.hpp"
#include "chase/dp_solver.hpp"
#include "chase/match_model.hpp"

namespace chase {

struct ModelBundle {
    std::string bundle_id;
    TransitionModel model;
    RewardSpec reward;
    Bounds bounds;
    ValueTable values;
    PolicyTable policy;
    std::string model_hash;  ///< fingerprint of the persisted model document
};

inline std::string modelFingerprint(const TransitionModel& model) { return fingerprint(writeDocument(modelToJson(model))); }

inline ModelBundle makeBundle(std::string bundle_id, const TransitionModel& model, const RewardSpec& reward,
                              const Bounds& bounds) {
    auto sol = solveChase(model, reward, bounds);
    return {std::move(bundle_id), model, reward, bounds, std::move(sol.values), std::move(sol.policy),
            modelFingerprint(model)};
}

/// {schema_version, kind, bundle_id, model_hash, model, reward_spec, bounds, tables, created_by}
inline json bundleToJson(const ModelBundle& b) {
    json doc = makeDocument("model_bundle");
    doc["bundle_id"] = b.bundle_id;
    doc["model_hash"] = b.model_hash;
    doc["model"] = modelToJson(b.model);
    doc["reward_spec"] = rewardToJson(b.reward);
    doc["bounds"] = boundsToJson(b.bounds);
    doc["tables"] = valueTableToJson(b.values, &b.policy, b.reward);
    doc["created_by"] = "chase solve";
    return doc;
}

/// Rejects bundles whose tables were not solved from the embedded model.
inline ModelBundle bundleFromJson(const json& doc) {
    requireDocument(doc, "model_bundle");
    ModelBundle b;
    b.bundle_id = doc.at("bundle_id").get<std::string>();
    b.model_hash = doc.at("model_hash").get<std::string>();
    if (fingerprint(writeDocument(doc.at("model"))) != b.model_hash)
        throw ModelError("bundle " + b.bundle_id + ": model does not match model_hash");
    b.model = modelFromJson(doc.at("model"));
    b.reward = rewardFromJson(doc.at("reward_spec"));
    b.bounds = boundsFromJson(doc.at("bounds"));
    auto tables = valueTableFromJson(doc.at("tables"));
    if (!(tables.values.bounds() == b.bounds)) throw ModelError("bundle " + b.bundle_id + ": table bounds mismatch");
    if (!(tables.reward == b.reward)) throw ModelError("bundle " + b.bundle_id + ": table reward spec mismatch");
    b.values = std::move(tables.values);
    b.policy = std::move(tables.policy);
    return b;
}

// ---------------------------------------------------------------------------
// What-if
// ---------------------------------------------------------------------------

struct OutcomeBranch {
    BallOutcome outcome;
    double probability = 0.0;
    MatchState successor;
    double successor_value = 0.0;
};

struct ActionBreakdown {
    BattingAction action;
    double win_probability = 0.0;
    std::vector<OutcomeBranch> outcomes;
};

struct WhatIfResult {
    MatchState state;
    double state_value = 0.0;
    std::vector<ActionBreakdown> per_action;  ///< recommend() order
};

/// Every action's value with its outcome branches; the value is
/// recommend()'s value for the action.
inline WhatIfResult whatIf(const ModelBundle& bundle, const MatchState& s) {
    const auto ranked = recommend(bundle.values, bundle.model, bundle.reward, s);
    WhatIfResult out{s, bundle.values.at(s), {}};
    for (const auto& av : ranked) {
        ActionBreakdown bd{av.action, av.value, {}};
        const auto& row = bundle.model.row(av.action, s);
        for (BallOutcome o : kOutcomes) {
            const auto next = applyOutcome(s, o);
            bd.outcomes.push_back({o, row[o], next, bundle.values[next]});
        }
        out.per_action.push_back(std::move(bd));
    }
    return out;
}

}  // namespace chase
