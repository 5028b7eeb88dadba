#pragma once

// Exact planning for the run chase: backward induction over the balls axis,
// fixed-policy evaluation, one-step lookahead recommendations, and the
// generic-MDP encoding of the chase.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "chase/document.hpp"
#include "chase/match_model.hpp"
#include "chase/mdp.hpp"

namespace chase {

struct Bounds {
    int max_runs = 0;
    int max_balls = 0;
    int max_wickets = 0;

    std::size_t stateCount() const noexcept {
        return static_cast<std::size_t>(max_runs + 1) * static_cast<std::size_t>(max_balls + 1) *
               static_cast<std::size_t>(max_wickets + 1);
    }

    bool contains(const MatchState& s) const noexcept {
        return s.runs_needed >= 0 && s.runs_needed <= max_runs && s.balls_remaining >= 0 &&
               s.balls_remaining <= max_balls && s.wickets_in_hand >= 0 && s.wickets_in_hand <= max_wickets;
    }

    /// Layout: wickets fastest, then runs, then balls (one contiguous layer per ball count).
    std::size_t index(const MatchState& s) const noexcept {
        return (static_cast<std::size_t>(s.balls_remaining) * static_cast<std::size_t>(max_runs + 1) +
                static_cast<std::size_t>(s.runs_needed)) *
                   static_cast<std::size_t>(max_wickets + 1) +
               static_cast<std::size_t>(s.wickets_in_hand);
    }

    MatchState stateAt(std::size_t i) const noexcept {
        const auto w = static_cast<int>(i % static_cast<std::size_t>(max_wickets + 1));
        i /= static_cast<std::size_t>(max_wickets + 1);
        const auto r = static_cast<int>(i % static_cast<std::size_t>(max_runs + 1));
        const auto b = static_cast<int>(i / static_cast<std::size_t>(max_runs + 1));
        return {r, b, w};
    }

    void validate() const {
        if (max_runs < 1 || max_balls < 1 || max_wickets < 1) throw std::invalid_argument("bounds must each be >= 1");
    }

    friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Calls f(state) for every state in bounds, ball layers ascending.
template <typename F>
void forEachState(const Bounds& bounds, F&& f) {
    for (int b = 0; b <= bounds.max_balls; ++b)
        for (int r = 0; r <= bounds.max_runs; ++r)
            for (int w = 0; w <= bounds.max_wickets; ++w) f(MatchState{r, b, w});
}

class ValueTable {
public:
    ValueTable() = default;
    explicit ValueTable(Bounds bounds, double fill = 0.0) : bounds_(bounds), values_(bounds.stateCount(), fill) {}

    const Bounds& bounds() const noexcept { return bounds_; }
    double at(const MatchState& s) const {
        if (!bounds_.contains(s)) throw std::out_of_range("state " + stateKey(s) + " outside value table bounds");
        return values_[bounds_.index(s)];
    }
    double operator[](const MatchState& s) const noexcept { return values_[bounds_.index(s)]; }
    double& operator[](const MatchState& s) noexcept { return values_[bounds_.index(s)]; }
    const std::vector<double>& data() const noexcept { return values_; }

private:
    Bounds bounds_;
    std::vector<double> values_;
};

class PolicyTable {
public:
    PolicyTable() = default;
    explicit PolicyTable(Bounds bounds) : bounds_(bounds), actions_(bounds.stateCount()) {}

    /// Same action in every non-terminal state.
    static PolicyTable constant(Bounds bounds, BattingAction a) {
        PolicyTable p(bounds);
        forEachState(bounds, [&](const MatchState& s) {
            if (!isTerminal(s)) p.set(s, a);
        });
        return p;
    }

    const Bounds& bounds() const noexcept { return bounds_; }
    std::optional<BattingAction> find(const MatchState& s) const noexcept {
        if (!bounds_.contains(s)) return std::nullopt;
        return actions_[bounds_.index(s)];
    }
    /// Throws std::out_of_range naming the state when no action is stored.
    BattingAction at(const MatchState& s) const {
        auto a = find(s);
        if (!a) throw std::out_of_range("policy has no action for state " + stateKey(s));
        return *a;
    }
    void set(const MatchState& s, BattingAction a) { actions_.at(bounds_.index(s)) = a; }
    void erase(const MatchState& s) { actions_.at(bounds_.index(s)).reset(); }

    friend bool operator==(const PolicyTable&, const PolicyTable&) = default;

private:
    Bounds bounds_;
    std::vector<std::optional<BattingAction>> actions_;
};

struct ChaseSolution {
    ValueTable values;
    PolicyTable policy;
    SolveReport report;
};

/// Q(s, a) = sum_o p(o | a, s) V(next(s, o)) - p(W | a, s) * per_wicket_penalty.
/// Successors of a state inside the bounds are always inside the bounds.
inline double lookaheadValue(const ValueTable& values, const TransitionModel& model, const RewardSpec& reward,
                             const MatchState& s, BattingAction a) {
    const auto& row = model.row(a, s);
    double q = 0.0;
    for (BallOutcome o : kOutcomes) {
        const double p = row[o];
        if (p == 0.0) continue;
        q += p * values[applyOutcome(s, o)];
    }
    return q - row[BallOutcome::Wicket] * reward.per_wicket_penalty;
}

/// Exact optimal win probability (or expected reward) for every state in
/// bounds, by backward induction over balls_remaining = 0..max_balls.
/// Ties resolve to the less aggressive action.
inline ChaseSolution solveChase(const TransitionModel& model, const RewardSpec& reward, const Bounds& bounds) {
    bounds.validate();
    reward.validate();
    model.validate();
    ChaseSolution sol{ValueTable(bounds), PolicyTable(bounds), {}};
    std::vector<double> q(kActionCount);
    forEachState(bounds, [&](const MatchState& s) {
        ++sol.report.states_evaluated;
        if (const auto status = terminalStatus(s); status != Status::NonTerminal) {
            sol.values[s] = reward.terminalValue(status);
            return;
        }
        for (BattingAction a : kActions) q[indexOf(a)] = lookaheadValue(sol.values, model, reward, s, a);
        const auto best = tieBreakArgmax(q);
        sol.values[s] = *std::max_element(q.begin(), q.end());
        sol.policy.set(s, kActions[best]);
    });
    sol.report.sweeps = 1;
    sol.report.max_residual = 0.0;
    return sol;
}

/// Value of following `policy` (no maximization). Throws std::out_of_range
/// naming the first non-terminal state the policy does not cover.
inline ValueTable evaluatePolicy(const TransitionModel& model, const RewardSpec& reward, const PolicyTable& policy) {
    const Bounds& bounds = policy.bounds();
    reward.validate();
    model.validate();
    ValueTable v(bounds);
    forEachState(bounds, [&](const MatchState& s) {
        if (const auto status = terminalStatus(s); status != Status::NonTerminal) {
            v[s] = reward.terminalValue(status);
            return;
        }
        v[s] = lookaheadValue(v, model, reward, s, policy.at(s));
    });
    return v;
}

struct ActionValue {
    BattingAction action;
    double value = 0.0;

    friend bool operator==(const ActionValue&, const ActionValue&) = default;
};

/// Orders action values descending; values within kTieTolerance of the
/// remaining maximum go to the less aggressive action first.
inline std::vector<ActionValue> rankActions(std::vector<ActionValue> items) {
    std::vector<ActionValue> ranked;
    ranked.reserve(items.size());
    std::sort(items.begin(), items.end(), [](const auto& x, const auto& y) { return indexOf(x.action) < indexOf(y.action); });
    while (!items.empty()) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& it : items) best = std::max(best, it.value);
        auto pick = std::find_if(items.begin(), items.end(), [&](const auto& it) { return it.value >= best - kTieTolerance; });
        ranked.push_back(*pick);
        items.erase(pick);
    }
    return ranked;
}

/// Thrown when a recommendation is requested for a finished chase.
class TerminalStateError : public ModelError {
public:
    TerminalStateError(const MatchState& s, Status status)
        : ModelError("state is terminal (" + std::string(statusName(status)) + ")"), state_(s), status_(status) {}
    const MatchState& state() const noexcept { return state_; }
    Status status() const noexcept { return status_; }

private:
    MatchState state_;
    Status status_;
};

inline void requireDecisionState(const Bounds& bounds, const MatchState& s) {
    if (!isValid(s)) throw ModelError("state " + stateKey(s) + " has negative components");
    if (const auto status = terminalStatus(s); status != Status::NonTerminal) throw TerminalStateError(s, status);
    if (!bounds.contains(s)) throw ModelError("state " + stateKey(s) + " outside table bounds");
}

/// All five actions with their one-step lookahead values, best first.
inline std::vector<ActionValue> recommend(const ValueTable& values, const TransitionModel& model, const RewardSpec& reward,
                                          const MatchState& s) {
    requireDecisionState(values.bounds(), s);
    std::vector<ActionValue> items;
    for (BattingAction a : kActions) items.push_back({a, lookaheadValue(values, model, reward, s, a)});
    return rankActions(std::move(items));
}

/// The chase as a generic MdpInstance over the same state layout as
/// ValueTable: terminal states absorb with their terminal value, WICKET
/// transitions carry -per_wicket_penalty, discount 1.
inline MdpInstance chaseMdp(const TransitionModel& model, const RewardSpec& reward, const Bounds& bounds) {
    bounds.validate();
    model.validate();
    MdpInstance mdp;
    const auto n = bounds.stateCount();
    mdp.state_labels.resize(n);
    mdp.actions.resize(n);
    mdp.terminal_value.assign(n, 0.0);
    mdp.discount = 1.0;
    mdp.horizon = bounds.max_balls;
    forEachState(bounds, [&](const MatchState& s) {
        const auto i = bounds.index(s);
        mdp.state_labels[i] = stateKey(s);
        if (const auto status = terminalStatus(s); status != Status::NonTerminal) {
            mdp.terminal_value[i] = reward.terminalValue(status);
            return;
        }
        for (BattingAction a : kActions) {
            MdpAction act{std::string(actionName(a)), {}};
            const auto& row = model.row(a, s);
            for (BallOutcome o : kOutcomes) {
                if (row[o] == 0.0) continue;
                const double r = o == BallOutcome::Wicket ? -reward.per_wicket_penalty : 0.0;
                act.successors.push_back({bounds.index(applyOutcome(s, o)), row[o], r});
            }
            mdp.actions[i].push_back(std::move(act));
        }
    });
    return mdp;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline json boundsToJson(const Bounds& b) {
    return {{"max_runs", b.max_runs}, {"max_balls", b.max_balls}, {"max_wickets", b.max_wickets}};
}

inline Bounds boundsFromJson(const json& j) {
    Bounds b{j.at("max_runs").get<int>(), j.at("max_balls").get<int>(), j.at("max_wickets").get<int>()};
    b.validate();
    return b;
}

/// {schema_version, kind, bounds, reward_spec, entries: {"r,b,w": {value, action?}}}
inline json valueTableToJson(const ValueTable& values, const PolicyTable* policy, const RewardSpec& reward) {
    json doc = makeDocument("value_table");
    doc["bounds"] = boundsToJson(values.bounds());
    doc["reward_spec"] = rewardToJson(reward);
    json entries = json::object();
    forEachState(values.bounds(), [&](const MatchState& s) {
        json e = {{"value", values[s]}};
        if (policy) {
            if (auto a = policy->find(s)) e["action"] = std::string(actionName(*a));
        }
        entries[stateKey(s)] = e;
    });
    doc["entries"] = entries;
    return doc;
}

struct LoadedValueTable {
    ValueTable values;
    PolicyTable policy;
    RewardSpec reward;
};

inline LoadedValueTable valueTableFromJson(const json& doc) {
    requireDocument(doc, "value_table");
    const Bounds bounds = boundsFromJson(doc.at("bounds"));
    LoadedValueTable out{ValueTable(bounds), PolicyTable(bounds), rewardFromJson(doc.at("reward_spec"))};
    const auto& entries = doc.at("entries");
    forEachState(bounds, [&](const MatchState& s) {
        const auto key = stateKey(s);
        if (!entries.contains(key)) throw ModelError("value table missing entry " + key);
        const auto& e = entries[key];
        out.values[s] = e.at("value").get<double>();
        if (e.contains("action")) {
            auto a = parseAction(e["action"].get<std::string>());
            if (!a) throw ModelError("unknown action in entry " + key);
            out.policy.set(s, *a);
        }
    });
    return out;
}

}  // namespace chase
