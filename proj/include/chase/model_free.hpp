#pragma once

// Tabular learning from simulated chases: Q-learning, SARSA, first-visit
// Monte Carlo and TD(0) policy evaluation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "chase/dp_solver.hpp"
#include "chase/rng.hpp"
#include "chase/simulator.hpp"

namespace chase {

class QTable {
public:
    QTable() = default;
    QTable(Bounds bounds, double initial_q)
        : bounds_(bounds), initial_q_(initial_q), q_(bounds.stateCount() * kActionCount, initial_q),
          visits_(bounds.stateCount() * kActionCount, 0) {}

    const Bounds& bounds() const noexcept { return bounds_; }
    double initialValue() const noexcept { return initial_q_; }

    double& operator()(const MatchState& s, BattingAction a) noexcept { return q_[slot(s, a)]; }
    double operator()(const MatchState& s, BattingAction a) const noexcept { return q_[slot(s, a)]; }
    std::uint64_t visits(const MatchState& s, BattingAction a) const noexcept { return visits_[slot(s, a)]; }
    void countVisit(const MatchState& s, BattingAction a) noexcept { ++visits_[slot(s, a)]; }

    std::vector<double> row(const MatchState& s) const {
        const auto base = bounds_.index(s) * kActionCount;
        return {q_.begin() + static_cast<std::ptrdiff_t>(base),
                q_.begin() + static_cast<std::ptrdiff_t>(base + kActionCount)};
    }

    double maxValue(const MatchState& s) const noexcept {
        const double* r = &q_[bounds_.index(s) * kActionCount];
        return *std::max_element(r, r + kActionCount);
    }

    /// Greedy action, ties (within kTieTolerance) to the less aggressive one.
    BattingAction greedyAction(const MatchState& s) const noexcept {
        const double* r = &q_[bounds_.index(s) * kActionCount];
        const double best = *std::max_element(r, r + kActionCount);
        for (std::size_t i = 0; i < kActionCount; ++i)
            if (r[i] >= best - kTieTolerance) return kActions[i];
        return kActions[0];
    }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::size_t slot(const MatchState& s, BattingAction a) const noexcept {
        return bounds_.index(s) * kActionCount + indexOf(a);
    }

    Bounds bounds_;
    double initial_q_ = 0.0;
    std::vector<double> q_;
    std::vector<std::uint64_t> visits_;
};

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

/// Linear from `start` to `end` over the first `fraction` of episodes, then flat.
struct LinearDecay {
    double start = 0.3;
    double end = 0.01;
    double fraction = 0.8;

    double at(std::uint64_t episode, std::uint64_t total) const noexcept {
        const double horizon = fraction * static_cast<double>(total);
        if (horizon <= 0.0 || static_cast<double>(episode) >= horizon) return end;
        return start + (end - start) * static_cast<double>(episode) / horizon;
    }
};

/// alpha = c / (c + n), n = prior updates of the same entry.
struct VisitDecay {
    double c = 100.0;
    double at(std::uint64_t visits) const noexcept { return c / (c + static_cast<double>(visits)); }
};

using EpsilonSchedule = std::variant<double, LinearDecay>;
using RateSchedule = std::variant<double, VisitDecay>;

inline double epsilonAt(const EpsilonSchedule& s, std::uint64_t episode, std::uint64_t total) {
    if (const auto* c = std::get_if<double>(&s)) return *c;
    return std::get<LinearDecay>(s).at(episode, total);
}

inline double rateAt(const RateSchedule& s, std::uint64_t visits) {
    if (const auto* c = std::get_if<double>(&s)) return *c;
    return std::get<VisitDecay>(s).at(visits);
}

struct LearnConfig {
    std::uint64_t episodes = 200000;
    RateSchedule learning_rate = VisitDecay{100.0};
    EpsilonSchedule epsilon = LinearDecay{0.3, 0.01, 0.8};
    double discount = 1.0;
    double initial_q = 0.5;
    std::uint64_t seed = 0;
    std::uint64_t checkpoints = 10;  ///< evenly spaced learning-curve points
};

struct CurvePoint {
    std::uint64_t episode = 0;
    double greedy_win_rate = 0.0;
    std::optional<double> max_q_error;
};

struct LearningCurve {
    std::vector<CurvePoint> points;

    /// "episode,greedy_win_rate,max_q_error" rows; the last column is empty
    /// without a reference.
    std::string toCsv() const {
        std::ostringstream os;
        os.precision(12);
        os << std::fixed << "episode,greedy_win_rate,max_q_error\n";
        for (const auto& p : points) {
            os << p.episode << ',' << p.greedy_win_rate << ',';
            if (p.max_q_error) os << *p.max_q_error;
            os << '\n';
        }
        return os.str();
    }
};

struct LearnResult {
    QTable q;
    LearningCurve curve;
};

/// Per-state argmax, ties to the less aggressive action.
inline PolicyTable greedyPolicyFrom(const QTable& q) {
    PolicyTable p(q.bounds());
    forEachState(q.bounds(), [&](const MatchState& s) {
        if (!isTerminal(s)) p.set(s, q.greedyAction(s));
    });
    return p;
}

namespace detail {

inline BattingAction epsilonGreedy(const QTable& q, const MatchState& s, double epsilon, SplitMix64& rng) {
    const double u = uniform01(rng);
    if (u < epsilon) return kActions[uniformIndex(rng, kActionCount)];
    return q.greedyAction(s);
}

inline MatchState curveState(const ChaseEnvironment& env) {
    if (env.start) return *env.start;
    return {env.bounds.max_runs, env.bounds.max_balls, env.bounds.max_wickets};
}

inline CurvePoint checkpoint(const ChaseEnvironment& env, const QTable& q, std::uint64_t episode,
                             const std::optional<ValueTable>& reference) {
    CurvePoint p;
    p.episode = episode;
    const auto greedy = evaluatePolicy(env.model, env.reward, greedyPolicyFrom(q));
    p.greedy_win_rate = greedy[curveState(env)];
    if (reference) {
        double worst = 0.0;
        forEachState(env.bounds, [&](const MatchState& s) {
            if (isTerminal(s)) return;
            for (BattingAction a : kActions)
                worst = std::max(worst, std::abs(q(s, a) - lookaheadValue(*reference, env.model, env.reward, s, a)));
        });
        p.max_q_error = worst;
    }
    return p;
}

enum class TdControl { QLearning, Sarsa };

inline LearnResult tdControl(TdControl kind, const ChaseEnvironment& env, const LearnConfig& config,
                             const std::optional<ValueTable>& reference) {
    env.bounds.validate();
    env.model.validate();
    LearnResult out{QTable(env.bounds, config.initial_q), {}};
    QTable& q = out.q;
    const auto states = env.decisionStates();
    const std::uint64_t every = config.checkpoints ? std::max<std::uint64_t>(1, config.episodes / config.checkpoints) : 0;

    auto update = [&](const MatchState& s, BattingAction a, double target) {
        const double alpha = rateAt(config.learning_rate, q.visits(s, a));
        q(s, a) += alpha * (target - q(s, a));
        q.countVisit(s, a);
    };

    for (std::uint64_t ep = 0; ep < config.episodes; ++ep) {
        SplitMix64 rng(deriveSeed(config.seed, ep));
        const double eps = epsilonAt(config.epsilon, ep, config.episodes);
        MatchState s = env.reset(rng, states);
        BattingAction a = epsilonGreedy(q, s, eps, rng);
        for (;;) {
            const auto step = env.step(s, a, rng);
            if (step.done) {
                update(s, a, step.reward);
                break;
            }
            // Both variants draw the next action here, before the update, so
            // with epsilon 0 they consume identical random streams.
            const BattingAction nextAction = epsilonGreedy(q, step.next, eps, rng);
            // The off-policy max uses the tie-broken greedy action, so the two
            // targets coincide exactly whenever nextAction is greedy.
            const BattingAction target = kind == TdControl::QLearning ? q.greedyAction(step.next) : nextAction;
            const double bootstrap = q(step.next, target);
            update(s, a, step.reward + config.discount * bootstrap);
            s = step.next;
            a = nextAction;
        }
        if (every && (ep + 1) % every == 0) out.curve.points.push_back(checkpoint(env, q, ep + 1, reference));
    }
    return out;
}

}  // namespace detail

/// Off-policy TD control: target reward + discount * max_a' Q(s', a'),
/// epsilon-greedy behaviour on the current table.
inline LearnResult qLearn(const ChaseEnvironment& env, const LearnConfig& config,
                          const std::optional<ValueTable>& reference = std::nullopt) {
    return detail::tdControl(detail::TdControl::QLearning, env, config, reference);
}

/// On-policy TD control: target reward + discount * Q(s', a') with a' drawn
/// by the behaviour policy.
inline LearnResult sarsa(const ChaseEnvironment& env, const LearnConfig& config,
                         const std::optional<ValueTable>& reference = std::nullopt) {
    return detail::tdControl(detail::TdControl::Sarsa, env, config, reference);
}

struct ValueEstimates {
    std::map<MatchState, double> values;
    std::map<MatchState, std::uint64_t> visits;
};

/// First-visit Monte Carlo: each state's estimate is the mean undiscounted
/// return following its first visit in each episode. Unvisited states are absent.
inline ValueEstimates mcEvaluate(const ChaseEnvironment& env, const PolicyTable& policy, std::uint64_t episodes,
                                 std::uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    env.model.validate();
    const auto states = env.decisionStates();
    std::map<MatchState, double> sums;
    ValueEstimates out;
    std::vector<std::pair<MatchState, double>> visited;  // state, reward received on leaving it
    for (std::uint64_t ep = 0; ep < episodes; ++ep) {
        SplitMix64 rng(deriveSeed(seed, ep));
        visited.clear();
        MatchState s = env.reset(rng, states);
        for (;;) {
            const auto step = env.step(s, policy.at(s), rng);
            visited.emplace_back(s, step.reward);
            if (step.done) break;
            s = step.next;
        }
        // balls_remaining strictly decreases, so every visit is a first visit.
        double g = 0.0;
        for (auto it = visited.rbegin(); it != visited.rend(); ++it) {
            g += it->second;
            sums[it->first] += g;
            ++out.visits[it->first];
        }
    }
    for (const auto& [s, total] : sums) out.values[s] = total / static_cast<double>(out.visits[s]);
    return out;
}

/// TD(0): V(s) += alpha * (reward + discount * V(s') - V(s)) along episodes
/// under the fixed policy; terminal successors contribute 0. Uses
/// config.episodes, learning_rate, discount, seed, and initial_q as the
/// starting value of every decision state.
inline ValueEstimates tdZeroEvaluate(const ChaseEnvironment& env, const PolicyTable& policy, const LearnConfig& config) {
    env.model.validate();
    const auto states = env.decisionStates();
    ValueEstimates out;
    for (const auto& s : states) {
        out.values[s] = config.initial_q;
        out.visits[s] = 0;
    }
    for (std::uint64_t ep = 0; ep < config.episodes; ++ep) {
        SplitMix64 rng(deriveSeed(config.seed, ep));
        MatchState s = env.reset(rng, states);
        for (;;) {
            const auto step = env.step(s, policy.at(s), rng);
            const double bootstrap = step.done ? 0.0 : out.values[step.next];
            auto& v = out.values[s];
            auto& n = out.visits[s];
            v += rateAt(config.learning_rate, n) * (step.reward + config.discount * bootstrap - v);
            ++n;
            if (step.done) break;
            s = step.next;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

/// {schema_version, kind, bounds, initial_q, entries: {"r,b,w,ACTION": {q, visits}}}
inline json qTableToJson(const QTable& q) {
    json doc = makeDocument("q_table");
    doc["bounds"] = boundsToJson(q.bounds());
    doc["initial_q"] = q.initialValue();
    json entries = json::object();
    forEachState(q.bounds(), [&](const MatchState& s) {
        if (isTerminal(s)) return;
        for (BattingAction a : kActions)
            entries[stateKey(s) + "," + std::string(actionName(a))] = {{"q", q(s, a)}, {"visits", q.visits(s, a)}};
    });
    doc["entries"] = entries;
    return doc;
}

}  // namespace chase
