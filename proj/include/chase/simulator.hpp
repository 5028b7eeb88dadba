#pragma once

// Seeded rollouts of the chase. All randomness comes from SplitMix64; episode
// i of a run with master seed m uses deriveSeed(m, i).

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "chase/dp_solver.hpp"
#include "chase/match_model.hpp"
#include "chase/rng.hpp"

namespace chase {

/// Inverse-transform draw over the canonical outcome order {0,1,2,3,4,6,W}.
inline BallOutcome sampleOutcome(const OutcomeDistribution& dist, SplitMix64& rng) {
    const double u = uniform01(rng);
    double cumulative = 0.0;
    std::size_t lastPositive = 0;
    for (std::size_t i = 0; i < kOutcomeCount; ++i) {
        const double p = dist.probabilities()[i];
        if (p <= 0.0) continue;
        cumulative += p;
        lastPositive = i;
        if (u < cumulative) return kOutcomes[i];
    }
    return kOutcomes[lastPositive];  // rounding left u above the final cumulative sum
}

struct BallResult {
    BallOutcome outcome;
    MatchState next;
};

inline BallResult simulateBall(const MatchState& s, BattingAction a, const TransitionModel& model, SplitMix64& rng) {
    if (isTerminal(s)) throw std::logic_error("simulateBall on terminal state " + stateKey(s));
    const auto o = sampleOutcome(model.row(a, s), rng);
    return {o, applyOutcome(s, o)};
}

struct EpisodeStep {
    MatchState state;
    BattingAction action;
    BallOutcome outcome;
    MatchState next;

    friend bool operator==(const EpisodeStep&, const EpisodeStep&) = default;
};

struct EpisodeTrace {
    MatchState start;
    std::vector<EpisodeStep> steps;
    Status result = Status::NonTerminal;
    std::uint64_t seed = 0;

    friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;

    /// One "r,b,w,action,outcome" line per step.
    std::string toText() const {
        std::ostringstream os;
        for (const auto& st : steps)
            os << stateKey(st.state) << ',' << actionName(st.action) << ',' << outcomeName(st.outcome) << '\n';
        return os.str();
    }
};

/// Plays from `start` to a terminal state. A policy gap on a reached state
/// throws std::out_of_range naming that state.
inline EpisodeTrace simulateChase(const MatchState& start, const PolicyTable& policy, const TransitionModel& model,
                                  std::uint64_t seed) {
    if (!isValid(start) || isTerminal(start)) throw std::invalid_argument("start state must be non-terminal");
    EpisodeTrace trace{start, {}, Status::NonTerminal, seed};
    SplitMix64 rng(seed);
    MatchState s = start;
    while (!isTerminal(s)) {
        const auto a = policy.at(s);
        const auto [o, next] = simulateBall(s, a, model, rng);
        trace.steps.push_back({s, a, o, next});
        s = next;
    }
    trace.result = terminalStatus(s);
    return trace;
}

struct SimulationSummary {
    std::uint64_t episodes = 0;
    std::uint64_t wins = 0;
    double win_rate = 0.0;
    double standard_error = 0.0;
    std::uint64_t seed = 0;
};

/// Monte Carlo win rate. Episodes are split across `threads` workers; the
/// result is identical for any thread count because each episode's seed
/// depends only on (seed, episode index) and wins are summed as integers.
inline SimulationSummary estimateWinProbability(const MatchState& start, const PolicyTable& policy,
                                                const TransitionModel& model, std::uint64_t episodes,
                                                std::uint64_t seed, unsigned threads = 1) {
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (!isValid(start) || isTerminal(start)) throw std::invalid_argument("start state must be non-terminal");
    model.validate();
    threads = std::max(1u, threads);

    auto runRange = [&](std::uint64_t begin, std::uint64_t end) {
        std::uint64_t wins = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
            SplitMix64 rng(deriveSeed(seed, i));
            MatchState s = start;
            while (!isTerminal(s)) s = simulateBall(s, policy.at(s), model, rng).next;
            wins += terminalStatus(s) == Status::Win ? 1 : 0;
        }
        return wins;
    };

    std::uint64_t wins = 0;
    if (threads == 1) {
        wins = runRange(0, episodes);
    } else {
        std::vector<std::uint64_t> partial(threads, 0);
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (episodes + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t b = std::min<std::uint64_t>(episodes, t * chunk);
            const std::uint64_t e = std::min<std::uint64_t>(episodes, b + chunk);
            pool.emplace_back([&, t, b, e] { partial[t] = runRange(b, e); });
        }
        for (auto& th : pool) th.join();
        for (auto w : partial) wins += w;
    }

    SimulationSummary out;
    out.episodes = episodes;
    out.wins = wins;
    out.seed = seed;
    out.win_rate = static_cast<double>(wins) / static_cast<double>(episodes);
    out.standard_error = std::sqrt(out.win_rate * (1.0 - out.win_rate) / static_cast<double>(episodes));
    return out;
}

// ---------------------------------------------------------------------------
// Step-wise environment for model-free learners
// ---------------------------------------------------------------------------

/// Where episodes begin: a fixed state, or (when unset) a state drawn
/// uniformly from all non-terminal states in bounds ("exploring starts").
struct ChaseEnvironment {
    TransitionModel model;
    RewardSpec reward;
    Bounds bounds;
    std::optional<MatchState> start;

    struct StepResult {
        BallOutcome outcome;
        MatchState next;
        double reward = 0.0;
        bool done = false;
    };

    std::vector<MatchState> decisionStates() const {
        std::vector<MatchState> out;
        forEachState(bounds, [&](const MatchState& s) {
            if (!isTerminal(s)) out.push_back(s);
        });
        return out;
    }

    MatchState reset(SplitMix64& rng, const std::vector<MatchState>& decision_states) const {
        if (start) return *start;
        return decision_states[uniformIndex(rng, decision_states.size())];
    }

    /// Reward: win/loss reward on the terminal transition, minus the
    /// per-wicket penalty on WICKET; zero otherwise.
    StepResult step(const MatchState& s, BattingAction a, SplitMix64& rng) const {
        const auto [o, next] = simulateBall(s, a, model, rng);
        StepResult r{o, next, 0.0, false};
        if (o == BallOutcome::Wicket) r.reward -= reward.per_wicket_penalty;
        if (const auto status = terminalStatus(next); status != Status::NonTerminal) {
            r.done = true;
            r.reward += reward.terminalValue(status);
        }
        return r;
    }
};

}  // namespace chase
