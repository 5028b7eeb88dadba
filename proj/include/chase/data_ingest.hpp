#pragma once

// Ball-by-ball record parsing, cleaning and per-context outcome estimation.

#include <charconv>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "chase/context.hpp"
#include "chase/errors.hpp"
#include "chase/match_model.hpp"

namespace chase {

inline constexpr std::string_view kBallByBallHeader =
    "match_id,innings,over,ball_in_over,batter_id,bowler_id,runs_batter,extras,wicket,dismissal_type";

struct BallRecord {
    std::string match_id;
    int innings = 1;
    int over = 0;
    int ball_in_over = 1;
    std::string batter_id;
    std::string bowler_id;
    int runs_batter = 0;
    int extras = 0;
    bool wicket = false;
    std::optional<std::string> dismissal_type;

    friend bool operator==(const BallRecord&, const BallRecord&) = default;
};

struct ParseIssue {
    std::size_t line = 0;  ///< 1-based, header is line 1
    std::string reason;
};

struct ParseResult {
    std::vector<BallRecord> records;
    std::vector<ParseIssue> issues;
};

namespace detail {

inline std::vector<std::string_view> splitFields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::optional<int> parseInt(std::string_view text) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
    return value;
}

}  // namespace detail

/// Header-first comma-separated text. Malformed rows become issues; a missing
/// or wrong header throws DataError.
inline ParseResult parseBallByBall(std::istream& in) {
    if (!in) throw DataError("unreadable ball-by-ball stream");
    std::string line;
    if (!std::getline(in, line)) throw DataError("missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kBallByBallHeader) throw DataError("unexpected header: " + line);

    ParseResult result;
    std::size_t lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto issue = [&](std::string reason) { result.issues.push_back({lineNo, std::move(reason)}); };

        const auto f = detail::splitFields(line);
        if (f.size() != 10) {
            issue("expected 10 fields, found " + std::to_string(f.size()));
            continue;
        }
        static constexpr std::array<std::string_view, 10> names{
            "match_id", "innings", "over", "ball_in_over", "batter_id",
            "bowler_id", "runs_batter", "extras", "wicket", "dismissal_type"};
        std::array<int, 10> ints{};
        bool ok = true;
        for (int idx : {1, 2, 3, 6, 7, 8}) {
            auto v = detail::parseInt(f[idx]);
            if (!v) {
                issue("invalid integer in " + std::string(names[idx]));
                ok = false;
                break;
            }
            ints[idx] = *v;
        }
        if (!ok) continue;
        if (f[0].empty()) { issue("missing match_id"); continue; }
        if (ints[1] != 1 && ints[1] != 2) { issue("innings out of range"); continue; }
        if (ints[2] < 0) { issue("over out of range"); continue; }
        if (ints[3] < 1 || ints[3] > 6) { issue("ball_in_over out of range"); continue; }
        if (ints[6] < 0 || ints[6] > 6) { issue("runs out of range"); continue; }
        if (ints[7] < 0) { issue("extras out of range"); continue; }
        if (ints[8] != 0 && ints[8] != 1) { issue("wicket must be 0 or 1"); continue; }

        BallRecord r;
        r.match_id = std::string(f[0]);
        r.innings = ints[1];
        r.over = ints[2];
        r.ball_in_over = ints[3];
        r.batter_id = std::string(f[4]);
        r.bowler_id = std::string(f[5]);
        r.runs_batter = ints[6];
        r.extras = ints[7];
        r.wicket = ints[8] == 1;
        if (!f[9].empty()) r.dismissal_type = std::string(f[9]);
        result.records.push_back(std::move(r));
    }
    return result;
}

/// Inverse of one parsed row (no trailing newline).
inline std::string formatBallRecord(const BallRecord& r) {
    std::string s;
    s += r.match_id + ',' + std::to_string(r.innings) + ',' + std::to_string(r.over) + ',' +
         std::to_string(r.ball_in_over) + ',' + r.batter_id + ',' + r.bowler_id + ',' +
         std::to_string(r.runs_batter) + ',' + std::to_string(r.extras) + ',' + (r.wicket ? "1" : "0") + ',';
    if (r.dismissal_type) s += *r.dismissal_type;
    return s;
}

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

struct CleaningReport {
    std::size_t duplicates = 0;
    std::size_t dismissals_imputed = 0;
    std::size_t overthrows_remapped = 0;  ///< runs_batter 5 -> 4

    friend bool operator==(const CleaningReport&, const CleaningReport&) = default;
};

struct CleanResult {
    std::vector<BallRecord> records;
    CleaningReport report;
};

/// Drops repeated (match_id, innings, over, ball_in_over) keys keeping the
/// first, labels wickets without a dismissal type "unknown", remaps 5 runs to 4.
inline CleanResult cleanRecords(const std::vector<BallRecord>& records) {
    CleanResult out;
    std::set<std::tuple<std::string, int, int, int>> seen;
    for (const auto& rec : records) {
        if (!seen.emplace(rec.match_id, rec.innings, rec.over, rec.ball_in_over).second) {
            ++out.report.duplicates;
            continue;
        }
        BallRecord r = rec;
        if (r.wicket && (!r.dismissal_type || r.dismissal_type->empty())) {
            r.dismissal_type = "unknown";
            ++out.report.dismissals_imputed;
        }
        if (r.runs_batter == 5) {
            r.runs_batter = 4;
            ++out.report.overthrows_remapped;
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Context assignment and estimation
// ---------------------------------------------------------------------------

/// Model outcome of a delivery: WICKET if a wicket fell, else bat + extras
/// folded onto {0,1,2,3,4,6}.
inline BallOutcome outcomeOf(const BallRecord& r) noexcept {
    return r.wicket ? BallOutcome::Wicket : outcomeForRuns(r.runs_batter + r.extras);
}

/// Context bucket of every record, aligned with the input. Second-innings
/// rows use the required rate against the first-innings total + 1 over a
/// `innings_balls` innings; first-innings rows (and chases whose first
/// innings is absent) use the current run rate. State is taken before the
/// delivery, accumulated in input order per (match, innings).
inline std::vector<ContextBucket> assignContexts(const std::vector<BallRecord>& records, int innings_balls = 120) {
    std::map<std::string, int> firstInningsTotal;
    for (const auto& r : records)
        if (r.innings == 1) firstInningsTotal[r.match_id] += r.runs_batter + r.extras;

    struct Progress { int runs = 0; int wickets = 0; };
    std::map<std::pair<std::string, int>, Progress> progress;
    std::vector<ContextBucket> buckets;
    buckets.reserve(records.size());
    for (const auto& r : records) {
        auto& p = progress[{r.match_id, r.innings}];
        const int bowled = r.over * 6 + (r.ball_in_over - 1);
        double rate = 0.0;
        auto target = firstInningsTotal.find(r.match_id);
        if (r.innings == 2 && target != firstInningsTotal.end()) {
            const int needed = target->second + 1 - p.runs;
            const int remaining = innings_balls - bowled;
            rate = needed <= 0 ? 0.0 : remaining > 0 ? 6.0 * needed / remaining : 1e9;
        } else {
            rate = bowled > 0 ? 6.0 * p.runs / bowled : 0.0;
        }
        buckets.push_back(bucketOf(r.over, p.wickets, rate));
        p.runs += r.runs_batter + r.extras;
        p.wickets += r.wicket ? 1 : 0;
    }
    return buckets;
}

struct EstimationConfig {
    double smoothing_alpha = 1.0;
    std::size_t min_samples = 50;
};

struct OutcomeEstimate {
    OutcomeDistribution distribution;
    std::size_t samples = 0;   ///< records that fell in the requested bucket
    bool substituted = false;  ///< bucket too sparse, global estimate returned
};

namespace detail {

inline OutcomeDistribution smoothedFrequencies(const std::array<std::size_t, kOutcomeCount>& counts, double alpha) {
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c) + alpha;
    if (!(total > 0.0)) throw DataError("no records and no smoothing: distribution undefined");
    OutcomeDistribution::Array p{};
    for (std::size_t i = 0; i < kOutcomeCount; ++i) p[i] = (static_cast<double>(counts[i]) + alpha) / total;
    return OutcomeDistribution::normalized(p, 1e-9);
}

}  // namespace detail

/// Additive-smoothed outcome frequencies of the records in `bucket`; falls
/// back to the all-records estimate when the bucket holds fewer than
/// min_samples records.
inline OutcomeEstimate estimateOutcomeDistribution(const std::vector<BallRecord>& records, const ContextBucket& bucket,
                                                   const EstimationConfig& config = {}) {
    if (!(config.smoothing_alpha >= 0.0)) throw std::invalid_argument("smoothing_alpha must be >= 0");
    const auto contexts = assignContexts(records);
    std::array<std::size_t, kOutcomeCount> inBucket{}, global{};
    std::size_t samples = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto o = indexOf(outcomeOf(records[i]));
        ++global[o];
        if (contexts[i] == bucket) {
            ++inBucket[o];
            ++samples;
        }
    }
    OutcomeEstimate est;
    est.samples = samples;
    if (samples < config.min_samples) {
        est.substituted = true;
        est.distribution = detail::smoothedFrequencies(global, config.smoothing_alpha);
    } else {
        est.distribution = detail::smoothedFrequencies(inBucket, config.smoothing_alpha);
    }
    return est;
}

/// Tilts applied to an estimated baseline to obtain the five action rows.
/// The estimated baseline is taken as BALANCED.
inline constexpr std::array<double, kActionCount> kEstimatedActionTilts{0.5, 0.75, 1.0, 1.25, 1.5};

inline ActionRows actionRowsFromBaseline(const OutcomeDistribution& baseline) {
    ActionRows rows;
    for (BattingAction a : kActions) rows[indexOf(a)] = tiltDistribution(baseline, kEstimatedActionTilts[indexOf(a)]).distribution;
    return rows;
}

/// Full model from history: global baseline rows plus an override for every
/// bucket holding at least min_samples records.
inline TransitionModel estimateTransitionModel(const std::vector<BallRecord>& records, const EstimationConfig& config = {}) {
    std::array<std::size_t, kOutcomeCount> global{};
    std::map<std::string, std::array<std::size_t, kOutcomeCount>> perBucket;
    std::map<std::string, ContextBucket> bucketByKey;
    const auto contexts = assignContexts(records);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto o = indexOf(outcomeOf(records[i]));
        ++global[o];
        const auto key = contexts[i].key();
        ++perBucket[key][o];
        bucketByKey.emplace(key, contexts[i]);
    }
    TransitionModel model(actionRowsFromBaseline(detail::smoothedFrequencies(global, config.smoothing_alpha)));
    for (const auto& [key, counts] : perBucket) {
        std::size_t n = 0;
        for (auto c : counts) n += c;
        if (n >= config.min_samples && n > 0)
            model.setOverride(bucketByKey[key], actionRowsFromBaseline(detail::smoothedFrequencies(counts, config.smoothing_alpha)));
    }
    return model;
}

}  // namespace chase
