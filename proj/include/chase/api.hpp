#pragma once

// Request handling shared by the HTTP service and the CLI. Bodies are JSON
// with snake_case fields and a schema_version; numbers are written at full
// precision so clients see exactly the library's values.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "chase/bundle.hpp"
#include "chase/document.hpp"
#include "chase/simulator.hpp"

namespace chase::api {

using BundleMap = std::map<std::string, ModelBundle>;

struct Response {
    int status = 200;
    json body;
    std::optional<std::string> plain;  ///< non-JSON body (health check)

    Response(int status_code, json json_body, std::optional<std::string> plain_body = std::nullopt)
        : status(status_code), body(std::move(json_body)), plain(std::move(plain_body)) {}

    /// Compact serialization; deterministic (sorted keys, shortest round-trip floats).
    std::string text() const { return plain ? *plain : body.dump(); }
    std::string contentType() const { return plain ? "text/plain" : "application/json"; }
};

/// Client error carrying the HTTP status it maps to.
class RequestError : public std::runtime_error {
public:
    RequestError(int status, std::string code, const std::string& reason)
        : std::runtime_error(reason), status_(status), code_(std::move(code)) {}
    int status() const noexcept { return status_; }
    const std::string& code() const noexcept { return code_; }

private:
    int status_;
    std::string code_;
};

inline json stateToJson(const MatchState& s) {
    return {{"runs_needed", s.runs_needed}, {"balls_remaining", s.balls_remaining}, {"wickets_in_hand", s.wickets_in_hand}};
}

inline MatchState stateFromJson(const json& j) {
    if (!j.is_object()) throw RequestError(400, "bad_request", "state must be an object");
    MatchState s;
    for (auto [name, field] : {std::pair{"runs_needed", &s.runs_needed}, std::pair{"balls_remaining", &s.balls_remaining},
                               std::pair{"wickets_in_hand", &s.wickets_in_hand}}) {
        if (!j.contains(name) || !j[name].is_number_integer())
            throw RequestError(400, "bad_request", std::string("state.") + name + " must be an integer");
        *field = j[name].get<int>();
        if (*field < 0) throw RequestError(400, "bad_request", std::string("state.") + name + " must be >= 0");
    }
    return s;
}

inline json envelope() { return {{"schema_version", kSchemaVersion}}; }

inline Response errorResponse(int status, const std::string& code, const std::string& reason,
                              const json& extra = json::object()) {
    json body = envelope();
    body["error"] = {{"code", code}, {"reason", reason}};
    for (auto it = extra.begin(); it != extra.end(); ++it) body[it.key()] = it.value();
    return {status, body};
}

inline const ModelBundle& findBundle(const BundleMap& bundles, const json& req) {
    if (!req.contains("bundle_id") || !req["bundle_id"].is_string())
        throw RequestError(400, "bad_request", "bundle_id must be a string");
    const auto id = req["bundle_id"].get<std::string>();
    auto it = bundles.find(id);
    if (it == bundles.end()) throw RequestError(404, "unknown_bundle", "unknown bundle '" + id + "'");
    return it->second;
}

/// 422 for terminal states (with their status) and states outside the tables.
inline void requireDecision(const ModelBundle& bundle, const MatchState& s) {
    try {
        requireDecisionState(bundle.bounds, s);
    } catch (const TerminalStateError& e) {
        throw RequestError(422, "terminal_state", e.what());
    } catch (const ModelError& e) {
        throw RequestError(422, "out_of_bounds", e.what());
    }
}

// ---------------------------------------------------------------------------
// Bodies
// ---------------------------------------------------------------------------

inline json recommendBody(const ModelBundle& bundle, const MatchState& s) {
    requireDecision(bundle, s);
    const auto ranked = recommend(bundle.values, bundle.model, bundle.reward, s);
    json body = envelope();
    body["bundle_id"] = bundle.bundle_id;
    body["state"] = stateToJson(s);
    body["win_probability"] = bundle.values.at(s);
    body["recommended_action"] = std::string(actionName(ranked.front().action));
    json actions = json::array();
    for (const auto& av : ranked) actions.push_back({{"action", std::string(actionName(av.action))}, {"value", av.value}});
    body["actions"] = actions;
    return body;
}

inline json whatIfBody(const ModelBundle& bundle, const MatchState& s) {
    requireDecision(bundle, s);
    const auto w = whatIf(bundle, s);
    json body = envelope();
    body["bundle_id"] = bundle.bundle_id;
    body["state"] = stateToJson(s);
    body["win_probability"] = w.state_value;
    json per = json::array();
    for (const auto& a : w.per_action) {
        json outcomes = json::array();
        for (const auto& br : a.outcomes)
            outcomes.push_back({{"outcome", std::string(outcomeName(br.outcome))},
                                {"probability", br.probability},
                                {"successor", stateToJson(br.successor)},
                                {"successor_status", std::string(statusName(terminalStatus(br.successor)))},
                                {"successor_win_probability", br.successor_value}});
        per.push_back({{"action", std::string(actionName(a.action))}, {"win_probability", a.win_probability},
                       {"outcomes", outcomes}});
    }
    body["per_action"] = per;
    return body;
}

inline constexpr std::uint64_t kMaxSimulationEpisodes = 10'000'000;

inline json simulateBody(const ModelBundle& bundle, const MatchState& s, std::uint64_t episodes, std::uint64_t seed,
                         unsigned threads = 1) {
    requireDecision(bundle, s);
    if (episodes < 1 || episodes > kMaxSimulationEpisodes)
        throw RequestError(400, "bad_request", "episodes must lie in [1, 10000000]");
    const auto summary = estimateWinProbability(s, bundle.policy, bundle.model, episodes, seed, threads);
    json body = envelope();
    body["bundle_id"] = bundle.bundle_id;
    body["state"] = stateToJson(s);
    body["episodes"] = summary.episodes;
    body["seed"] = summary.seed;
    body["wins"] = summary.wins;
    body["win_rate"] = summary.win_rate;
    body["standard_error"] = summary.standard_error;
    body["exact_win_probability"] = bundle.values.at(s);
    return body;
}

inline json applyOutcomeBody(const MatchState& s, BallOutcome o) {
    if (const auto status = terminalStatus(s); status != Status::NonTerminal)
        throw RequestError(422, "terminal_state", "state is terminal (" + std::string(statusName(status)) + ")");
    const auto next = applyOutcome(s, o);
    json body = envelope();
    body["state"] = stateToJson(next);
    body["status"] = std::string(statusName(terminalStatus(next)));
    return body;
}

inline json bundlesBody(const BundleMap& bundles) {
    json body = envelope();
    json list = json::array();
    for (const auto& [id, b] : bundles)
        list.push_back({{"bundle_id", id}, {"model_hash", b.model_hash}, {"bounds", boundsToJson(b.bounds)}});
    body["bundles"] = list;
    return body;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// Routes one request. Pure in (bundles, method, path, body).
///   GET  /health         -> "ok"
///   GET  /bundles
///   POST /recommend      {bundle_id, state}
///   POST /what-if        {bundle_id, state}
///   POST /simulate       {bundle_id, state, episodes, seed}
///   POST /apply-outcome  {state, outcome}
inline Response handle(const BundleMap& bundles, const std::string& method, const std::string& path,
                       const std::string& body) {
    try {
        if (method == "GET" && path == "/health") return {200, json(), "ok"};
        if (method == "GET" && path == "/bundles") return {200, bundlesBody(bundles)};
        if (method != "POST") return errorResponse(404, "not_found", "no route " + method + " " + path);

        static const std::set<std::string> routes{"/recommend", "/what-if", "/simulate", "/apply-outcome"};
        if (!routes.contains(path)) return errorResponse(404, "not_found", "no route " + method + " " + path);

        json req;
        try {
            req = json::parse(body);
        } catch (const json::parse_error&) {
            throw RequestError(400, "bad_request", "body is not valid JSON");
        }
        if (!req.is_object()) throw RequestError(400, "bad_request", "body must be a JSON object");
        if (req.contains("schema_version") && req["schema_version"] != kSchemaVersion)
            throw RequestError(400, "bad_request", "unsupported schema_version");
        if (!req.contains("state")) throw RequestError(400, "bad_request", "missing state");
        const MatchState s = stateFromJson(req["state"]);

        if (path == "/apply-outcome") {
            if (!req.contains("outcome") || !req["outcome"].is_string())
                throw RequestError(400, "bad_request", "outcome must be a string");
            const auto o = parseOutcome(req["outcome"].get<std::string>());
            if (!o) throw RequestError(400, "bad_request", "unknown outcome '" + req["outcome"].get<std::string>() + "'");
            return {200, applyOutcomeBody(s, *o)};
        }
        const auto& bundle = findBundle(bundles, req);
        if (path == "/recommend") return {200, recommendBody(bundle, s)};
        if (path == "/what-if") return {200, whatIfBody(bundle, s)};

        auto number = [&](const char* name) {
            if (!req.contains(name) || !req[name].is_number_unsigned())
                throw RequestError(400, "bad_request", std::string(name) + " must be a non-negative integer");
            return req[name].get<std::uint64_t>();
        };
        return {200, simulateBody(bundle, s, number("episodes"), number("seed"))};
    } catch (const RequestError& e) {
        json extra = json::object();
        if (e.code() == "terminal_state") {
            try {
                const auto req = json::parse(body);
                extra["terminal_status"] = std::string(statusName(terminalStatus(stateFromJson(req.at("state")))));
            } catch (...) {
            }
        }
        return errorResponse(e.status(), e.code(), e.what(), extra);
    } catch (const std::exception& e) {
        return errorResponse(500, "internal_error", e.what());
    }
}

}  // namespace chase::api
