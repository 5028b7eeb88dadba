#pragma once

// Run-chase decision state, action space, single-ball outcome model and the
// transition semantics every other component builds on.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "chase/context.hpp"
#include "chase/document.hpp"
#include "chase/errors.hpp"

namespace chase {

inline constexpr double kProbabilityTolerance = 1e-12;

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

struct MatchState {
    int runs_needed = 0;
    int balls_remaining = 0;
    int wickets_in_hand = 0;

    friend auto operator<=>(const MatchState&, const MatchState&) = default;
};

enum class Status { NonTerminal, Win, Loss };

constexpr std::string_view statusName(Status s) noexcept {
    switch (s) {
    case Status::Win: return "WIN";
    case Status::Loss: return "LOSS";
    default: return "NON_TERMINAL";
    }
}

/// WIN takes precedence: a chase completed on the final ball is a win.
constexpr Status terminalStatus(const MatchState& s) noexcept {
    if (s.runs_needed <= 0) return Status::Win;
    if (s.balls_remaining <= 0 || s.wickets_in_hand <= 0) return Status::Loss;
    return Status::NonTerminal;
}

constexpr bool isTerminal(const MatchState& s) noexcept {
    return terminalStatus(s) != Status::NonTerminal;
}

constexpr bool isValid(const MatchState& s) noexcept {
    return s.runs_needed >= 0 && s.balls_remaining >= 0 && s.wickets_in_hand >= 0;
}

/// "r,b,w"
inline std::string stateKey(const MatchState& s) {
    return std::to_string(s.runs_needed) + "," + std::to_string(s.balls_remaining) + "," +
           std::to_string(s.wickets_in_hand);
}

inline std::optional<MatchState> parseState(std::string_view text) {
    MatchState s;
    int* fields[3] = {&s.runs_needed, &s.balls_remaining, &s.wickets_in_hand};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        const std::size_t end = i < 2 ? text.find(',', pos) : text.size();
        if (end == std::string_view::npos) return std::nullopt;
        const std::string part(text.substr(pos, end - pos));
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
        try {
            *fields[i] = std::stoi(part);
        } catch (const std::exception&) {
            return std::nullopt;
        }
        pos = end + 1;
    }
    return s;
}

inline std::ostream& operator<<(std::ostream& os, const MatchState& s) {
    return os << "(" << stateKey(s) << ")";
}

// ---------------------------------------------------------------------------
// Actions and outcomes
// ---------------------------------------------------------------------------

/// Ordered by aggression; the enumerator value is the tie-break rank.
enum class BattingAction : std::uint8_t { UltraDefensive, Defensive, Balanced, Aggressive, UltraAggressive };

inline constexpr std::size_t kActionCount = 5;
inline constexpr std::array<BattingAction, kActionCount> kActions{
    BattingAction::UltraDefensive, BattingAction::Defensive, BattingAction::Balanced,
    BattingAction::Aggressive, BattingAction::UltraAggressive};

constexpr std::size_t indexOf(BattingAction a) noexcept { return static_cast<std::size_t>(a); }

constexpr std::string_view actionName(BattingAction a) noexcept {
    constexpr std::array<std::string_view, kActionCount> names{
        "ULTRA_DEFENSIVE", "DEFENSIVE", "BALANCED", "AGGRESSIVE", "ULTRA_AGGRESSIVE"};
    return names[indexOf(a)];
}

inline std::optional<BattingAction> parseAction(std::string_view name) {
    for (BattingAction a : kActions)
        if (actionName(a) == name) return a;
    return std::nullopt;
}

/// Canonical order {0,1,2,3,4,6,W}; sampling and serialization follow it.
enum class BallOutcome : std::uint8_t { Dot, One, Two, Three, Four, Six, Wicket };

inline constexpr std::size_t kOutcomeCount = 7;
inline constexpr std::array<BallOutcome, kOutcomeCount> kOutcomes{
    BallOutcome::Dot, BallOutcome::One, BallOutcome::Two, BallOutcome::Three,
    BallOutcome::Four, BallOutcome::Six, BallOutcome::Wicket};

constexpr std::size_t indexOf(BallOutcome o) noexcept { return static_cast<std::size_t>(o); }

/// Runs credited by an outcome; WICKET scores nothing.
constexpr int runsOf(BallOutcome o) noexcept {
    constexpr std::array<int, kOutcomeCount> runs{0, 1, 2, 3, 4, 6, 0};
    return runs[indexOf(o)];
}

constexpr std::string_view outcomeName(BallOutcome o) noexcept {
    constexpr std::array<std::string_view, kOutcomeCount> names{"0", "1", "2", "3", "4", "6", "W"};
    return names[indexOf(o)];
}

inline std::optional<BallOutcome> parseOutcome(std::string_view name) {
    if (name == "WICKET") return BallOutcome::Wicket;
    for (BallOutcome o : kOutcomes)
        if (outcomeName(o) == name) return o;
    return std::nullopt;
}

/// Maps a delivery's total runs (bat + extras) onto the model support:
/// 5 becomes 4, anything above 6 becomes 6.
constexpr BallOutcome outcomeForRuns(int runs) noexcept {
    if (runs <= 0) return BallOutcome::Dot;
    if (runs <= 4) return static_cast<BallOutcome>(runs);
    if (runs == 5) return BallOutcome::Four;
    return BallOutcome::Six;
}

/// Advances the chase by one delivery. Throws std::logic_error on a terminal state.
inline MatchState applyOutcome(const MatchState& s, BallOutcome o) {
    if (isTerminal(s))
        throw std::logic_error("applyOutcome on terminal state " + stateKey(s) + " (" +
                               std::string(statusName(terminalStatus(s))) + ")");
    if (o == BallOutcome::Wicket) return {s.runs_needed, s.balls_remaining - 1, s.wickets_in_hand - 1};
    return {std::max(s.runs_needed - runsOf(o), 0), s.balls_remaining - 1, s.wickets_in_hand};
}

// ---------------------------------------------------------------------------
// Outcome distribution
// ---------------------------------------------------------------------------

class OutcomeDistribution {
public:
    using Array = std::array<double, kOutcomeCount>;

    OutcomeDistribution() : p_{1.0, 0, 0, 0, 0, 0, 0} {}

    /// Validating constructor: non-negative, sums to 1 within 1e-12.
    explicit OutcomeDistribution(const Array& p) : p_(p) {
        if (auto problem = check(); !problem.empty()) throw ModelError(problem);
    }

    /// No validation; for builders and loaders that validate later.
    static OutcomeDistribution unchecked(const Array& p) {
        OutcomeDistribution d;
        d.p_ = p;
        return d;
    }

    /// Divides by the sum. Rejects negative entries and sums further than
    /// `tolerance` from 1 (documents printed at 12 decimals drift by a few 1e-12).
    static OutcomeDistribution normalized(Array p, double tolerance) {
        double sum = 0.0;
        for (double x : p) {
            if (!(x >= 0.0)) throw ModelError("negative or NaN probability");
            sum += x;
        }
        if (std::abs(sum - 1.0) > tolerance) throw ModelError("probabilities sum to " + std::to_string(sum));
        for (double& x : p) x /= sum;
        return OutcomeDistribution(p);
    }

    static OutcomeDistribution pointMass(BallOutcome o) {
        Array p{};
        p[indexOf(o)] = 1.0;
        return OutcomeDistribution(p);
    }

    double operator[](BallOutcome o) const noexcept { return p_[indexOf(o)]; }
    const Array& probabilities() const noexcept { return p_; }

    /// Empty string when valid, otherwise a description of the defect.
    std::string check() const {
        double sum = 0.0;
        for (std::size_t i = 0; i < kOutcomeCount; ++i) {
            if (!(p_[i] >= 0.0) || !std::isfinite(p_[i]))
                return "probability of outcome " + std::string(outcomeName(kOutcomes[i])) + " is invalid";
            sum += p_[i];
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance) {
            std::ostringstream os;
            os.precision(17);
            os << "probabilities sum to " << sum;
            return os.str();
        }
        return {};
    }

    friend bool operator==(const OutcomeDistribution&, const OutcomeDistribution&) = default;

private:
    Array p_;
};

inline double expectedRuns(const OutcomeDistribution& d) noexcept {
    double e = 0.0;
    for (BallOutcome o : kOutcomes) e += runsOf(o) * d[o];
    return e;
}

struct TiltResult {
    OutcomeDistribution distribution;
    bool clipped = false;  ///< dot-ball mass would have gone negative
};

/// Scales boundary (4, 6) and WICKET mass by `aggression`; the dot ball
/// absorbs the difference and the row is renormalized. aggression in [0.25, 4].
inline TiltResult tiltDistribution(const OutcomeDistribution& base, double aggression) {
    if (!(aggression >= 0.25 && aggression <= 4.0))
        throw std::invalid_argument("aggression must lie in [0.25, 4]");
    auto p = base.probabilities();
    const auto dot = indexOf(BallOutcome::Dot);
    double shifted = 0.0;
    for (BallOutcome o : {BallOutcome::Four, BallOutcome::Six, BallOutcome::Wicket}) {
        const double before = p[indexOf(o)];
        p[indexOf(o)] = before * aggression;
        shifted += before - p[indexOf(o)];
    }
    p[dot] += shifted;
    bool clipped = false;
    if (p[dot] < 0.0) {
        p[dot] = 0.0;
        clipped = true;
    }
    double sum = 0.0;
    for (double x : p) sum += x;
    for (double& x : p) x /= sum;
    return {OutcomeDistribution(p), clipped};
}

// ---------------------------------------------------------------------------
// Transition model and reward
// ---------------------------------------------------------------------------

using ActionRows = std::array<OutcomeDistribution, kActionCount>;

/// One outcome row per action, with optional per-context-bucket overrides.
/// Context for a MatchState is derived assuming an innings of
/// `innings_balls` deliveries and `squad_wickets` wickets.
class TransitionModel {
public:
    TransitionModel() = default;
    explicit TransitionModel(ActionRows rows) : rows_(std::move(rows)) {}

    static TransitionModel singleRow(const OutcomeDistribution& row) {
        ActionRows rows;
        rows.fill(row);
        return TransitionModel(rows);
    }

    const OutcomeDistribution& row(BattingAction a) const noexcept { return rows_[indexOf(a)]; }

    const OutcomeDistribution& row(BattingAction a, const MatchState& s) const {
        if (!overrides_.empty()) {
            if (auto it = overrides_.find(contextOf(s).key()); it != overrides_.end()) return it->second[indexOf(a)];
        }
        return rows_[indexOf(a)];
    }

    const ActionRows& rows() const noexcept { return rows_; }
    const std::map<std::string, ActionRows>& overrides() const noexcept { return overrides_; }

    void setRow(BattingAction a, const OutcomeDistribution& d) { rows_[indexOf(a)] = d; }
    void setOverride(const ContextBucket& bucket, ActionRows rows) { overrides_[bucket.key()] = std::move(rows); }

    int inningsBalls() const noexcept { return innings_balls_; }
    int squadWickets() const noexcept { return squad_wickets_; }
    void setInnings(int balls, int wickets) {
        innings_balls_ = balls;
        squad_wickets_ = wickets;
    }

    ContextBucket contextOf(const MatchState& s) const noexcept {
        const int bowled = std::max(innings_balls_ - s.balls_remaining, 0);
        const double rate = s.balls_remaining > 0 ? 6.0 * s.runs_needed / s.balls_remaining : 1e9;
        return bucketOf(bowled / 6, std::max(squad_wickets_ - s.wickets_in_hand, 0), rate);
    }

    /// Throws ModelError naming the first invalid row's action and context.
    void validate() const {
        auto checkRows = [](const ActionRows& rows, std::string_view context) {
            for (BattingAction a : kActions) {
                if (auto problem = rows[indexOf(a)].check(); !problem.empty())
                    throw ModelError("invalid distribution for action " + std::string(actionName(a)) +
                                     " in context " + std::string(context) + ": " + problem);
            }
        };
        checkRows(rows_, "default");
        for (const auto& [key, rows] : overrides_) checkRows(rows, key);
    }

    friend bool operator==(const TransitionModel&, const TransitionModel&) = default;

private:
    ActionRows rows_;
    std::map<std::string, ActionRows> overrides_;
    int innings_balls_ = 120;
    int squad_wickets_ = 10;
};

struct RewardSpec {
    double win_reward = 1.0;
    double loss_reward = 0.0;
    double per_wicket_penalty = 0.0;

    void validate() const {
        if (!(win_reward > loss_reward)) throw ModelError("win_reward must exceed loss_reward");
        if (!(per_wicket_penalty >= 0.0)) throw ModelError("per_wicket_penalty must be non-negative");
    }

    double terminalValue(Status s) const noexcept { return s == Status::Win ? win_reward : loss_reward; }

    friend bool operator==(const RewardSpec&, const RewardSpec&) = default;
};

// ---------------------------------------------------------------------------
// Reference rows
// ---------------------------------------------------------------------------

/// Aggressive row for 50-from-30: {6:.05, 4:.15, 2:.20, 1:.25, 0:.25, W:.10}, p(3) = 0.
inline OutcomeDistribution referenceAggressiveRow() {
    return OutcomeDistribution({0.25, 0.25, 0.20, 0.0, 0.15, 0.05, 0.10});
}

/// Balanced baseline: dots 40%, singles 30%, boundaries 20% (split 15% fours,
/// 5% sixes), wickets 10%.
inline OutcomeDistribution balancedBaseline() {
    return OutcomeDistribution({0.40, 0.30, 0.0, 0.0, 0.15, 0.05, 0.10});
}

inline constexpr std::array<double, kActionCount> kDefaultTilts{0.5, 0.75, 1.0, 1.0, 1.5};

/// Five-action default: tilts 0.5 / 0.75 / 1.5 of the balanced baseline for the
/// ultra-defensive, defensive and ultra-aggressive rows; the reference
/// aggressive row as AGGRESSIVE.
inline TransitionModel defaultModel() {
    const auto base = balancedBaseline();
    TransitionModel m;
    m.setRow(BattingAction::UltraDefensive, tiltDistribution(base, kDefaultTilts[0]).distribution);
    m.setRow(BattingAction::Defensive, tiltDistribution(base, kDefaultTilts[1]).distribution);
    m.setRow(BattingAction::Balanced, base);
    m.setRow(BattingAction::Aggressive, referenceAggressiveRow());
    m.setRow(BattingAction::UltraAggressive, tiltDistribution(base, kDefaultTilts[4]).distribution);
    return m;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json rowToJson(const OutcomeDistribution& d) {
    json row = json::object();
    for (BallOutcome o : kOutcomes) row[std::string(outcomeName(o))] = d[o];
    return row;
}

inline OutcomeDistribution rowFromJson(const json& row, double tolerance = 1e-9) {
    OutcomeDistribution::Array p{};
    for (BallOutcome o : kOutcomes) {
        const auto name = std::string(outcomeName(o));
        if (!row.contains(name) || !row[name].is_number())
            throw ModelError("row is missing outcome '" + name + "'");
        p[indexOf(o)] = row[name].get<double>();
    }
    return OutcomeDistribution::normalized(p, tolerance);
}

inline json rowsToJson(const ActionRows& rows) {
    json out = json::object();
    for (BattingAction a : kActions) out[std::string(actionName(a))] = rowToJson(rows[indexOf(a)]);
    return out;
}

inline ActionRows rowsFromJson(const json& j) {
    ActionRows rows;
    for (BattingAction a : kActions) {
        const auto name = std::string(actionName(a));
        if (!j.contains(name)) throw ModelError("model is missing action " + name);
        try {
            rows[indexOf(a)] = rowFromJson(j[name]);
        } catch (const ModelError& e) {
            throw ModelError("action " + name + ": " + e.what());
        }
    }
    return rows;
}

/// {schema_version, kind, context_key, innings_balls, squad_wickets, rows, overrides}
inline json modelToJson(const TransitionModel& m) {
    json doc = makeDocument("transition_model");
    doc["context_key"] = "default";
    doc["innings_balls"] = m.inningsBalls();
    doc["squad_wickets"] = m.squadWickets();
    doc["rows"] = rowsToJson(m.rows());
    json overrides = json::array();
    for (const auto& [key, rows] : m.overrides()) overrides.push_back({{"context_key", key}, {"rows", rowsToJson(rows)}});
    doc["overrides"] = overrides;
    return doc;
}

inline TransitionModel modelFromJson(const json& doc) {
    requireDocument(doc, "transition_model");
    if (!doc.contains("rows")) throw ModelError("transition_model has no rows");
    TransitionModel m(rowsFromJson(doc["rows"]));
    m.setInnings(doc.value("innings_balls", 120), doc.value("squad_wickets", 10));
    if (doc.contains("overrides")) {
        for (const auto& o : doc["overrides"]) {
            const auto key = o.value("context_key", std::string{});
            const auto bucket = parseBucketKey(key);
            if (!bucket) throw ModelError("unknown context_key '" + key + "'");
            m.setOverride(*bucket, rowsFromJson(o.at("rows")));
        }
    }
    return m;
}

inline json rewardToJson(const RewardSpec& r) {
    return {{"win_reward", r.win_reward}, {"loss_reward", r.loss_reward}, {"per_wicket_penalty", r.per_wicket_penalty}};
}

inline RewardSpec rewardFromJson(const json& j) {
    RewardSpec r;
    r.win_reward = j.value("win_reward", 1.0);
    r.loss_reward = j.value("loss_reward", 0.0);
    r.per_wicket_penalty = j.value("per_wicket_penalty", 0.0);
    r.validate();
    return r;
}

}  // namespace chase
