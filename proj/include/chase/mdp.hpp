#pragma once

// Generic finite MDP and discounted value iteration. Used for the transfer
// domains and as an independent route for the run chase.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chase/errors.hpp"

namespace chase {

struct Transition {
    std::size_t next = 0;
    double probability = 0.0;
    double reward = 0.0;
};

struct MdpAction {
    std::string label;
    std::vector<Transition> successors;
};

/// States with no actions are absorbing and keep `terminal_value` (their
/// absorption reward, counted once). Action order is the tie-break order.
struct MdpInstance {
    std::vector<std::string> state_labels;
    std::vector<std::vector<MdpAction>> actions;
    std::vector<double> terminal_value;
    double discount = 1.0;
    std::optional<int> horizon;  ///< nullopt: unbounded

    std::size_t size() const noexcept { return actions.size(); }

    void validate() const {
        if (state_labels.size() != actions.size() || terminal_value.size() != actions.size())
            throw ModelError("MDP component sizes disagree");
        if (!(discount >= 0.0 && discount <= 1.0)) throw ModelError("discount must lie in [0, 1]");
        for (std::size_t s = 0; s < actions.size(); ++s) {
            for (const auto& a : actions[s]) {
                double sum = 0.0;
                for (const auto& t : a.successors) {
                    if (t.next >= actions.size()) throw ModelError("successor out of range in state " + state_labels[s]);
                    if (!(t.probability >= 0.0)) throw ModelError("negative probability in state " + state_labels[s]);
                    sum += t.probability;
                }
                if (std::abs(sum - 1.0) > 1e-12)
                    throw ModelError("successor probabilities of " + state_labels[s] + "/" + a.label + " sum to " +
                                     std::to_string(sum));
            }
        }
    }
};

struct SolveReport {
    std::size_t states_evaluated = 0;
    std::size_t sweeps = 0;
    double max_residual = 0.0;
    bool converged = true;
    std::vector<double> residuals;  ///< per sweep (value iteration only)
};

struct MdpSolution {
    std::vector<double> values;
    std::vector<int> policy;  ///< -1 for absorbing states
    SolveReport report;
};

inline constexpr double kTieTolerance = 1e-12;

/// Index of the first entry within kTieTolerance of the maximum.
inline std::size_t tieBreakArgmax(const std::vector<double>& q) {
    const double best = *std::max_element(q.begin(), q.end());
    for (std::size_t i = 0; i < q.size(); ++i)
        if (q[i] >= best - kTieTolerance) return i;
    return 0;
}

inline double actionValue(const MdpInstance& mdp, const MdpAction& a, const std::vector<double>& v) {
    double q = 0.0;
    for (const auto& t : a.successors) q += t.probability * (t.reward + mdp.discount * v[t.next]);
    return q;
}

/// Synchronous (Jacobi) sweeps from V = terminal values / 0 until the largest
/// per-state change is below `tolerance` or `max_sweeps` is hit; the latter
/// returns with report.converged = false. Greedy policy from the final values.
inline MdpSolution valueIterate(const MdpInstance& mdp, double tolerance, std::size_t max_sweeps) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    mdp.validate();
    const std::size_t n = mdp.size();
    MdpSolution sol;
    sol.values.assign(n, 0.0);
    for (std::size_t s = 0; s < n; ++s)
        if (mdp.actions[s].empty()) sol.values[s] = mdp.terminal_value[s];

    std::vector<double> next = sol.values;
    sol.report.converged = false;
    sol.report.max_residual = std::numeric_limits<double>::infinity();
    while (sol.report.sweeps < max_sweeps) {
        double residual = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            if (mdp.actions[s].empty()) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& a : mdp.actions[s]) best = std::max(best, actionValue(mdp, a, sol.values));
            next[s] = best;
            residual = std::max(residual, std::abs(best - sol.values[s]));
        }
        sol.values.swap(next);
        ++sol.report.sweeps;
        sol.report.states_evaluated += n;
        sol.report.max_residual = residual;
        sol.report.residuals.push_back(residual);
        if (residual < tolerance) {
            sol.report.converged = true;
            break;
        }
    }
    if (n == 0 || std::all_of(mdp.actions.begin(), mdp.actions.end(), [](const auto& a) { return a.empty(); })) {
        sol.report.converged = true;
        sol.report.max_residual = 0.0;
    }

    sol.policy.assign(n, -1);
    std::vector<double> q;
    for (std::size_t s = 0; s < n; ++s) {
        if (mdp.actions[s].empty()) continue;
        q.clear();
        for (const auto& a : mdp.actions[s]) q.push_back(actionValue(mdp, a, sol.values));
        sol.policy[s] = static_cast<int>(tieBreakArgmax(q));
    }
    return sol;
}

}  // namespace chase
