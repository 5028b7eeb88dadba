#include <gtest/gtest.h>

#include <cmath>

#include "chase/dp_solver.hpp"
#include "support/enumeration_oracle.hpp"

using namespace chase;

namespace {

const TransitionModel kAggressiveOnly = TransitionModel::singleRow(referenceAggressiveRow());

}  // namespace

// ---------------------------------------------------------------------------
// Hand-computed values
// ---------------------------------------------------------------------------

TEST(SolveChase, OneRunOneBallOneWicket) {
    // Win unless dot (0.25) or wicket (0.10).
    const auto sol = solveChase(kAggressiveOnly, {}, {1, 1, 1});
    EXPECT_NEAR(sol.values.at({1, 1, 1}), 0.65, 1e-12);
}

TEST(SolveChase, TwoRunsTwoBalls) {
    // 0.40 immediate + 0.25 * V(1,1,1) + 0.25 * V(2,1,1) = 0.40 + 0.1625 + 0.10
    const auto sol = solveChase(kAggressiveOnly, {}, {2, 2, 1});
    EXPECT_NEAR(sol.values.at({2, 2, 1}), 0.6625, 1e-12);
    EXPECT_NEAR(sol.values.at({2, 1, 1}), 0.40, 1e-12);
}

TEST(SolveChase, DefaultModelPicksAggressiveForOneOffOne) {
    // Win probabilities: UD 0.40, D 0.45, B 0.50, A 0.65, UA 0.60.
    const auto sol = solveChase(defaultModel(), {}, {1, 1, 1});
    EXPECT_NEAR(sol.values.at({1, 1, 1}), 0.65, 1e-12);
    EXPECT_EQ(sol.policy.at({1, 1, 1}), BattingAction::Aggressive);
}

TEST(SolveChase, TerminalValuesUseRewardSpec) {
    const RewardSpec reward{3.0, -1.0, 0.0};
    const auto sol = solveChase(kAggressiveOnly, reward, {3, 3, 2});
    EXPECT_EQ(sol.values.at({0, 2, 1}), 3.0);
    EXPECT_EQ(sol.values.at({0, 0, 0}), 3.0);
    EXPECT_EQ(sol.values.at({2, 0, 1}), -1.0);
    EXPECT_EQ(sol.values.at({2, 2, 0}), -1.0);
    EXPECT_FALSE(sol.policy.find({0, 2, 1}));
}

TEST(SolveChase, WicketPenaltyChargedOnWicketProbability) {
    const auto sol = solveChase(kAggressiveOnly, {1.0, 0.0, 0.5}, {1, 1, 1});
    EXPECT_NEAR(sol.values.at({1, 1, 1}), 0.65 - 0.10 * 0.5, 1e-12);
}

TEST(SolveChase, InvalidInputsRejected) {
    EXPECT_THROW(solveChase(defaultModel(), {}, {0, 5, 5}), std::invalid_argument);
    EXPECT_THROW(solveChase(defaultModel(), {0.0, 1.0, 0.0}, {5, 5, 5}), ModelError);
    EXPECT_THROW(solveChase(defaultModel(), {1.0, 0.0, -1.0}, {5, 5, 5}), ModelError);
}

// ---------------------------------------------------------------------------
// Enumeration oracle and structural properties
// ---------------------------------------------------------------------------

TEST(SolveChase, MatchesOutcomeSequenceEnumeration) {
    const auto model = defaultModel();
    for (const RewardSpec reward : {RewardSpec{}, RewardSpec{1.0, 0.0, 0.05}}) {
        const Bounds bounds{12, 3, 3};
        const auto sol = solveChase(model, reward, bounds);
        forEachState(bounds, [&](const MatchState& s) {
            EXPECT_NEAR(sol.values.at(s), oracle::enumerateOptimal(model, reward, s), 1e-12) << stateKey(s);
        });
    }
}

TEST(SolveChase, MonotoneInResources) {
    const Bounds bounds{20, 12, 4};
    const auto v = solveChase(defaultModel(), {}, bounds).values;
    forEachState(bounds, [&](const MatchState& s) {
        EXPECT_GE(v[s], 0.0);
        EXPECT_LE(v[s], 1.0);
        const MatchState moreRuns{s.runs_needed + 1, s.balls_remaining, s.wickets_in_hand};
        const MatchState moreBalls{s.runs_needed, s.balls_remaining + 1, s.wickets_in_hand};
        const MatchState moreWickets{s.runs_needed, s.balls_remaining, s.wickets_in_hand + 1};
        if (s.runs_needed < bounds.max_runs) {
            EXPECT_GE(v[s] + 1e-12, v[moreRuns]);
        }
        if (s.balls_remaining < bounds.max_balls && s.runs_needed > 0) {
            EXPECT_LE(v[s], v[moreBalls] + 1e-12);
        }
        if (s.wickets_in_hand < bounds.max_wickets && s.runs_needed > 0) {
            EXPECT_LE(v[s], v[moreWickets] + 1e-12);
        }
    });
}

TEST(EvaluatePolicy, OptimalPolicyReproducesOptimalValues) {
    const Bounds bounds{15, 10, 3};
    const auto model = defaultModel();
    const auto sol = solveChase(model, {}, bounds);
    const auto v = evaluatePolicy(model, {}, sol.policy);
    forEachState(bounds, [&](const MatchState& s) { EXPECT_NEAR(v[s], sol.values[s], 1e-12); });
}

TEST(EvaluatePolicy, EveryFixedPolicyIsDominated) {
    const Bounds bounds{15, 10, 3};
    const auto model = defaultModel();
    const auto opt = solveChase(model, {}, bounds).values;
    for (BattingAction a : kActions) {
        const auto v = evaluatePolicy(model, {}, PolicyTable::constant(bounds, a));
        forEachState(bounds, [&](const MatchState& s) { EXPECT_LE(v[s], opt[s] + 1e-12); });
    }
}

TEST(EvaluatePolicy, MissingActionNamesState) {
    auto policy = PolicyTable::constant({3, 3, 1}, BattingAction::Balanced);
    policy.erase({2, 3, 1});
    try {
        evaluatePolicy(defaultModel(), {}, policy);
        FAIL() << "expected out_of_range";
    } catch (const std::out_of_range& e) {
        EXPECT_NE(std::string(e.what()).find("2,3,1"), std::string::npos);
    }
}

// ---------------------------------------------------------------------------
// Recommendations
// ---------------------------------------------------------------------------

TEST(Recommend, TopActionMatchesPolicyAndValue) {
    const Bounds bounds{20, 12, 3};
    const auto model = defaultModel();
    const auto sol = solveChase(model, {}, bounds);
    forEachState(bounds, [&](const MatchState& s) {
        if (isTerminal(s)) return;
        const auto ranked = recommend(sol.values, model, {}, s);
        ASSERT_EQ(ranked.size(), kActionCount);
        EXPECT_EQ(ranked.front().action, sol.policy.at(s));
        EXPECT_NEAR(ranked.front().value, sol.values[s], 1e-12);
        for (std::size_t i = 1; i < ranked.size(); ++i) EXPECT_LE(ranked[i].value, ranked[i - 1].value + 1e-12);
    });
}

TEST(Recommend, TiesGoToLeastAggressive) {
    // Identical rows for every action: every value ties.
    const auto model = TransitionModel::singleRow(balancedBaseline());
    const auto sol = solveChase(model, {}, {6, 4, 2});
    EXPECT_EQ(sol.policy.at({6, 4, 2}), BattingAction::UltraDefensive);
    const auto ranked = recommend(sol.values, model, {}, {6, 4, 2});
    for (std::size_t i = 0; i < kActionCount; ++i) EXPECT_EQ(ranked[i].action, kActions[i]);
}

TEST(Recommend, RankActionsToleranceBoundary) {
    const auto ranked = rankActions({{BattingAction::UltraAggressive, 0.5},
                                     {BattingAction::Balanced, 0.5 - 5e-13},
                                     {BattingAction::Defensive, 0.5 - 1e-9}});
    EXPECT_EQ(ranked[0].action, BattingAction::Balanced);
    EXPECT_EQ(ranked[1].action, BattingAction::UltraAggressive);
    EXPECT_EQ(ranked[2].action, BattingAction::Defensive);
}

TEST(Recommend, TerminalAndOutOfBoundsStatesRejected) {
    const auto sol = solveChase(defaultModel(), {}, {5, 5, 2});
    try {
        recommend(sol.values, defaultModel(), {}, {0, 3, 1});
        FAIL();
    } catch (const TerminalStateError& e) {
        EXPECT_EQ(e.status(), Status::Win);
        EXPECT_STREQ(e.what(), "state is terminal (WIN)");
    }
    EXPECT_THROW(recommend(sol.values, defaultModel(), {}, {4, 0, 1}), TerminalStateError);
    EXPECT_THROW(recommend(sol.values, defaultModel(), {}, {9, 3, 1}), ModelError);
}

// ---------------------------------------------------------------------------
// Generic value iteration
// ---------------------------------------------------------------------------

TEST(ValueIterate, AllAbsorbingKeepsTerminalValues) {
    MdpInstance mdp{{"a", "b"}, {{}, {}}, {0.3, -2.0}, 1.0, std::nullopt};
    const auto sol = valueIterate(mdp, 1e-12, 10);
    EXPECT_EQ(sol.values, (std::vector<double>{0.3, -2.0}));
    EXPECT_EQ(sol.policy, (std::vector<int>{-1, -1}));
    EXPECT_TRUE(sol.report.converged);
}

TEST(ValueIterate, DiscountedTwoStateExample) {
    // s0: "stay" loops with reward 0, "go" reaches absorbing s1 (value 1).
    MdpInstance mdp;
    mdp.state_labels = {"s0", "s1"};
    mdp.actions = {{{"stay", {{0, 1.0, 0.0}}}, {"go", {{1, 1.0, 0.0}}}}, {}};
    mdp.terminal_value = {0.0, 1.0};
    mdp.discount = 0.9;
    const auto sol = valueIterate(mdp, 1e-12, 1000);
    EXPECT_TRUE(sol.report.converged);
    EXPECT_NEAR(sol.values[0], 0.9, 1e-12);
    EXPECT_EQ(sol.values[1], 1.0);
    EXPECT_EQ(sol.policy[0], 1);
}

TEST(ValueIterate, ResidualsNonIncreasingWhenDiscounted) {
    // Random-looking three-state loop with rewards.
    MdpInstance mdp;
    mdp.state_labels = {"x", "y", "z"};
    mdp.actions = {{{"a", {{1, 0.5, 1.0}, {2, 0.5, 0.0}}}, {"b", {{0, 1.0, 0.2}}}},
                   {{"a", {{0, 0.7, 0.0}, {2, 0.3, 2.0}}}},
                   {{"a", {{2, 1.0, 0.5}}}, {"b", {{0, 0.4, 1.0}, {1, 0.6, 0.0}}}}};
    mdp.terminal_value = {0, 0, 0};
    mdp.discount = 0.8;
    const auto sol = valueIterate(mdp, 1e-10, 10000);
    ASSERT_TRUE(sol.report.converged);
    for (std::size_t i = 1; i < sol.report.residuals.size(); ++i)
        EXPECT_LE(sol.report.residuals[i], sol.report.residuals[i - 1] + 1e-15);
}

TEST(ValueIterate, SweepCapReportsNonConvergence) {
    MdpInstance mdp;
    mdp.state_labels = {"s"};
    mdp.actions = {{{"loop", {{0, 1.0, 1.0}}}}};
    mdp.terminal_value = {0.0};
    mdp.discount = 0.99;
    const auto sol = valueIterate(mdp, 1e-12, 5);
    EXPECT_FALSE(sol.report.converged);
    EXPECT_EQ(sol.report.sweeps, 5u);
    EXPECT_EQ(sol.report.residuals.size(), 5u);
}

TEST(ValueIterate, ChaseEncodingMatchesBackwardInduction) {
    const Bounds bounds{12, 8, 3};
    const RewardSpec reward{1.0, 0.0, 0.02};
    const auto model = defaultModel();
    const auto exact = solveChase(model, reward, bounds);
    const auto mdp = chaseMdp(model, reward, bounds);
    const auto vi = valueIterate(mdp, 1e-14, 100);
    ASSERT_TRUE(vi.report.converged);
    EXPECT_LE(vi.report.sweeps, static_cast<std::size_t>(bounds.max_balls + 1));
    forEachState(bounds, [&](const MatchState& s) {
        const auto i = bounds.index(s);
        EXPECT_NEAR(vi.values[i], exact.values[s], 1e-12);
        if (!isTerminal(s)) {
            EXPECT_EQ(kActions[vi.policy[i]], exact.policy.at(s)) << stateKey(s);
        }
    });
}

TEST(ValueIterate, RejectsMalformedInstances) {
    MdpInstance mdp{{"s"}, {{{"a", {{0, 0.5, 0.0}}}}}, {0.0}, 1.0, std::nullopt};
    EXPECT_THROW(valueIterate(mdp, 1e-9, 10), ModelError);
    mdp.actions[0][0].successors = {{3, 1.0, 0.0}};
    EXPECT_THROW(valueIterate(mdp, 1e-9, 10), ModelError);
    mdp.actions[0][0].successors = {{0, 1.0, 0.0}};
    EXPECT_THROW(valueIterate(mdp, 0.0, 10), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

TEST(ValueTableDocument, RoundTripKeepsValuesAndPolicy) {
    const Bounds bounds{10, 6, 2};
    const RewardSpec reward{1.0, 0.0, 0.01};
    const auto sol = solveChase(defaultModel(), reward, bounds);
    const auto text = writeDocument(valueTableToJson(sol.values, &sol.policy, reward));
    const auto back = valueTableFromJson(parseDocument(text));
    EXPECT_EQ(back.reward, reward);
    EXPECT_EQ(back.policy, sol.policy);
    forEachState(bounds, [&](const MatchState& s) { EXPECT_NEAR(back.values[s], sol.values[s], 5e-13); });
    EXPECT_EQ(writeDocument(valueTableToJson(back.values, &back.policy, back.reward)), text);
}

TEST(ValueTableDocument, MissingEntryRejected) {
    const auto sol = solveChase(defaultModel(), {}, {2, 2, 1});
    auto doc = valueTableToJson(sol.values, &sol.policy, {});
    doc["entries"].erase("1,1,1");
    EXPECT_THROW(valueTableFromJson(doc), ModelError);
}
