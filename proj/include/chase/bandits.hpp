#pragma once

// Bowler selection as a Bernoulli multi-armed bandit: one pull is one over
// by the chosen bowler, reward 1 a successful over.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chase/rng.hpp"

namespace chase {

struct ArmState {
    std::uint64_t pulls = 0;
    std::uint64_t successes = 0;
    double mean_estimate = 0.0;

    void record(bool success) noexcept {
        ++pulls;
        successes += success ? 1 : 0;
        mean_estimate = static_cast<double>(successes) / static_cast<double>(pulls);
    }
};

struct BanditInstance {
    std::vector<double> true_means;
    std::uint64_t horizon = 1;

    void validate() const {
        if (true_means.size() < 2) throw std::invalid_argument("a bandit needs at least 2 arms");
        if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
        for (double m : true_means)
            if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("arm means must lie in [0, 1]");
    }
};

struct RegretTrace {
    std::vector<std::size_t> selections;
    std::vector<int> rewards;
    std::vector<double> cumulative_pseudo_regret;

    double finalRegret() const noexcept {
        return cumulative_pseudo_regret.empty() ? 0.0 : cumulative_pseudo_regret.back();
    }

    /// "step,arm,reward,cumulative_pseudo_regret", steps 1-based.
    std::string toCsv() const {
        std::ostringstream os;
        os.precision(12);
        os << std::fixed << "step,arm,reward,cumulative_pseudo_regret\n";
        for (std::size_t t = 0; t < selections.size(); ++t)
            os << t + 1 << ',' << selections[t] << ',' << rewards[t] << ',' << cumulative_pseudo_regret[t] << '\n';
        return os.str();
    }
};

namespace detail {

/// Lowest-index arm never pulled, if any.
inline std::optional<std::size_t> firstUnpulled(std::span<const ArmState> arms) {
    for (std::size_t i = 0; i < arms.size(); ++i)
        if (arms[i].pulls == 0) return i;
    return std::nullopt;
}

inline std::size_t argmaxLowestIndex(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

}  // namespace detail

/// With probability epsilon a uniform arm, else the best mean estimate.
/// Unpulled arms are taken first, in index order.
inline std::size_t selectEpsilonGreedy(std::span<const ArmState> arms, double epsilon, SplitMix64& rng) {
    if (arms.empty()) throw std::invalid_argument("no arms");
    if (auto fresh = detail::firstUnpulled(arms)) return *fresh;
    if (uniform01(rng) < epsilon) return uniformIndex(rng, arms.size());
    std::vector<double> means;
    for (const auto& a : arms) means.push_back(a.mean_estimate);
    return detail::argmaxLowestIndex(means);
}

/// Boltzmann exploration over mean estimates; max-subtracted exponents.
inline std::size_t selectSoftmax(std::span<const ArmState> arms, double temperature, SplitMix64& rng) {
    if (arms.empty()) throw std::invalid_argument("no arms");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (auto fresh = detail::firstUnpulled(arms)) return *fresh;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& a : arms) top = std::max(top, a.mean_estimate);
    std::vector<double> weights;
    double total = 0.0;
    for (const auto& a : arms) {
        weights.push_back(std::exp((a.mean_estimate - top) / temperature));
        total += weights.back();
    }
    const double u = uniform01(rng) * total;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cumulative += weights[i];
        if (u < cumulative) return i;
    }
    return detail::argmaxLowestIndex(weights);
}

/// UCB1: mean + sqrt(2 ln t / pulls); unpulled arms first, lowest index on ties.
inline std::size_t selectUcb1(std::span<const ArmState> arms, std::uint64_t t, SplitMix64& /*rng*/) {
    if (arms.empty()) throw std::invalid_argument("no arms");
    if (auto fresh = detail::firstUnpulled(arms)) return *fresh;
    const double logT = std::log(static_cast<double>(std::max<std::uint64_t>(t, 1)));
    std::vector<double> scores;
    for (const auto& a : arms) scores.push_back(a.mean_estimate + std::sqrt(2.0 * logT / static_cast<double>(a.pulls)));
    return detail::argmaxLowestIndex(scores);
}

/// Thompson sampling with Beta(1 + successes, 1 + failures) posteriors.
inline std::size_t selectThompson(std::span<const ArmState> arms, SplitMix64& rng) {
    if (arms.empty()) throw std::invalid_argument("no arms");
    std::vector<double> draws;
    for (const auto& a : arms)
        draws.push_back(betaSample(rng, 1.0 + static_cast<double>(a.successes),
                                   1.0 + static_cast<double>(a.pulls - a.successes)));
    return detail::argmaxLowestIndex(draws);
}

/// Named policy: "epsilon-greedy" (epsilon), "softmax" (temperature), "ucb1",
/// "thompson", "uniform".
struct BanditPolicy {
    std::string name = "ucb1";
    double epsilon = 0.1;
    double temperature = 0.1;
};

/// Selector signature: (arms, pulls so far, rng) -> arm.
using ArmSelector = std::function<std::size_t(std::span<const ArmState>, std::uint64_t, SplitMix64&)>;

inline ArmSelector makeSelector(const BanditPolicy& policy) {
    if (policy.name == "epsilon-greedy")
        return [e = policy.epsilon](std::span<const ArmState> arms, std::uint64_t, SplitMix64& rng) {
            return selectEpsilonGreedy(arms, e, rng);
        };
    if (policy.name == "softmax")
        return [t = policy.temperature](std::span<const ArmState> arms, std::uint64_t, SplitMix64& rng) {
            return selectSoftmax(arms, t, rng);
        };
    if (policy.name == "ucb1")
        return [](std::span<const ArmState> arms, std::uint64_t t, SplitMix64& rng) { return selectUcb1(arms, t, rng); };
    if (policy.name == "thompson")
        return [](std::span<const ArmState> arms, std::uint64_t, SplitMix64& rng) { return selectThompson(arms, rng); };
    if (policy.name == "uniform")
        return [](std::span<const ArmState> arms, std::uint64_t, SplitMix64& rng) {
            return static_cast<std::size_t>(uniformIndex(rng, arms.size()));
        };
    throw std::invalid_argument("unknown bandit policy '" + policy.name + "'");
}

/// Runs `horizon` pulls with Bernoulli rewards. Per step: select (may draw),
/// then one uniform draw decides the reward. Pseudo-regret accumulates the
/// gap of each chosen arm, so it equals t * best - sum_i pulls_i * mean_i.
inline RegretTrace runBanditSim(const BanditInstance& instance, const ArmSelector& select, std::uint64_t seed,
                                std::vector<ArmState>* final_arms = nullptr) {
    instance.validate();
    SplitMix64 rng(seed);
    const double best = *std::max_element(instance.true_means.begin(), instance.true_means.end());
    std::vector<ArmState> arms(instance.true_means.size());
    RegretTrace trace;
    trace.selections.reserve(instance.horizon);
    trace.rewards.reserve(instance.horizon);
    trace.cumulative_pseudo_regret.reserve(instance.horizon);
    double regret = 0.0;
    for (std::uint64_t t = 0; t < instance.horizon; ++t) {
        const std::size_t arm = select(arms, t, rng);
        if (arm >= arms.size()) throw std::logic_error("selector returned an invalid arm");
        const bool success = uniform01(rng) < instance.true_means[arm];
        arms[arm].record(success);
        regret += best - instance.true_means[arm];
        trace.selections.push_back(arm);
        trace.rewards.push_back(success ? 1 : 0);
        trace.cumulative_pseudo_regret.push_back(regret);
    }
    if (final_arms) *final_arms = std::move(arms);
    return trace;
}

inline RegretTrace runBanditSim(const BanditInstance& instance, const BanditPolicy& policy, std::uint64_t seed,
                                std::vector<ArmState>* final_arms = nullptr) {
    return runBanditSim(instance, makeSelector(policy), seed, final_arms);
}

}  // namespace chase
