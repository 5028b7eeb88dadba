#pragma once

// `chase` command-line tool. Results go to `out`, diagnostics to `err`.
// Exit status: 0 success, 1 usage error, 2 data or model error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chase/api.hpp"
#include "chase/bandits.hpp"
#include "chase/bayes_player.hpp"
#include "chase/belief_pomdp.hpp"
#include "chase/bundle.hpp"
#include "chase/data_ingest.hpp"
#include "chase/dp_solver.hpp"
#include "chase/model_free.hpp"
#include "chase/service.hpp"
#include "chase/transfer.hpp"

namespace chase::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline MatchState requireState(const std::string& text) {
    auto s = parseState(text);
    if (!s) throw UsageError("--state must look like r,b,w with non-negative integers");
    return *s;
}

inline std::vector<double> parseDoubles(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string(what) + ": '" + item + "' is not a number");
        }
    }
    return out;
}

inline TransitionModel loadModel(const std::string& path) {
    return path.empty() ? defaultModel() : modelFromJson(readDocumentFile(path));
}

inline void emit(std::ostream& out, const std::string& path, const std::string& text) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f << text;
}

inline ModelBundle loadBundle(const std::string& path) { return bundleFromJson(readDocumentFile(path)); }

/// Runs a body builder, mapping request errors to data errors so the CLI and
/// service fail on the same inputs.
template <typename F>
json bodyOrThrow(F&& f) {
    try {
        return f();
    } catch (const api::RequestError& e) {
        if (e.status() == 400) throw UsageError(e.what());
        throw ModelError(e.what());
    }
}

}  // namespace detail

/// Entry point; `args` excludes the program name.
inline int cliMain(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Run-chase decision analytics", "chase"};
    app.require_subcommand(1);

    // estimate ---------------------------------------------------------------
    auto* estimate = app.add_subcommand("estimate", "Estimate a transition model from ball-by-ball data");
    std::string dataPath, modelOut;
    EstimationConfig estCfg;
    estimate->add_option("--data", dataPath, "Ball-by-ball CSV")->required();
    estimate->add_option("--alpha", estCfg.smoothing_alpha, "Additive smoothing pseudo-count")->capture_default_str();
    estimate->add_option("--min-samples", estCfg.min_samples, "Minimum records for a context override")->capture_default_str();
    estimate->add_option("--out", modelOut, "Model document path (stdout if absent)");

    // solve ------------------------------------------------------------------
    auto* solve = app.add_subcommand("solve", "Solve the chase exactly by backward induction");
    Bounds bounds{50, 30, 5};
    std::string modelPath, valuesOut, bundleOut, bundleId = "default";
    RewardSpec reward;
    solve->add_option("--max-runs", bounds.max_runs)->capture_default_str();
    solve->add_option("--max-balls", bounds.max_balls)->capture_default_str();
    solve->add_option("--max-wickets", bounds.max_wickets)->capture_default_str();
    solve->add_option("--model", modelPath, "Transition model document (built-in default if absent)");
    solve->add_option("--win-reward", reward.win_reward)->capture_default_str();
    solve->add_option("--loss-reward", reward.loss_reward)->capture_default_str();
    solve->add_option("--wicket-penalty", reward.per_wicket_penalty)->capture_default_str();
    solve->add_option("--out", valuesOut, "Value/policy table document");
    solve->add_option("--bundle", bundleOut, "Also write a model bundle");
    solve->add_option("--bundle-id", bundleId)->capture_default_str();

    // recommend ----------------------------------------------------------------
    auto* rec = app.add_subcommand("recommend", "Rank actions at a state from a bundle");
    std::string stateText, bundlePath;
    bool withWhatIf = false;
    rec->add_option("--state", stateText, "r,b,w")->required();
    rec->add_option("--bundle", bundlePath)->required();
    rec->add_flag("--what-if", withWhatIf, "Include per-outcome breakdowns");

    // simulate -------------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "Monte Carlo win rate under the bundle's policy");
    std::uint64_t episodes = 10000, seed = 0;
    unsigned threads = 1;
    std::string tracePath;
    sim->add_option("--state", stateText, "r,b,w")->required();
    sim->add_option("--bundle", bundlePath)->required();
    sim->add_option("--episodes", episodes)->capture_default_str();
    sim->add_option("--seed", seed)->capture_default_str();
    sim->add_option("--threads", threads)->capture_default_str();
    sim->add_option("--trace", tracePath, "Write the trace of one episode (the --seed episode)");

    // learn ------------------------------------------------------------------
    auto* learn = app.add_subcommand("learn", "Model-free learning against the simulator");
    std::string algo = "qlearn", qOut, curveOut, startText;
    Bounds learnBounds{10, 6, 2};
    LearnConfig learnCfg;
    learn->add_option("--algo", algo, "qlearn | sarsa | mc | td")->capture_default_str()
        ->check(CLI::IsMember({"qlearn", "sarsa", "mc", "td"}));
    learn->add_option("--max-runs", learnBounds.max_runs)->capture_default_str();
    learn->add_option("--max-balls", learnBounds.max_balls)->capture_default_str();
    learn->add_option("--max-wickets", learnBounds.max_wickets)->capture_default_str();
    learn->add_option("--model", modelPath);
    learn->add_option("--episodes", learnCfg.episodes)->capture_default_str();
    learn->add_option("--seed", learnCfg.seed)->capture_default_str();
    learn->add_option("--start", startText, "Fixed start r,b,w (exploring starts if absent)");
    learn->add_option("--out", qOut, "Q table (qlearn/sarsa) or value estimates (mc/td)");
    learn->add_option("--curve", curveOut, "Learning curve CSV (qlearn/sarsa)");

    // bandit -----------------------------------------------------------------
    auto* bandit = app.add_subcommand("bandit", "Bowler-selection bandit simulation");
    std::string armsText, traceOut;
    BanditPolicy policy;
    std::uint64_t horizon = 10000;
    bandit->add_option("--arms", armsText, "True success rates, comma separated")->required();
    bandit->add_option("--algo", policy.name, "epsilon-greedy | softmax | ucb1 | thompson | uniform")->capture_default_str();
    bandit->add_option("--epsilon", policy.epsilon)->capture_default_str();
    bandit->add_option("--temperature", policy.temperature)->capture_default_str();
    bandit->add_option("--horizon", horizon)->capture_default_str();
    bandit->add_option("--seed", seed)->capture_default_str();
    bandit->add_option("--out", traceOut, "Regret trace CSV (stdout if absent)");

    // belief -----------------------------------------------------------------
    auto* belief = app.add_subcommand("belief", "Player ability and pitch-type beliefs");
    belief->require_subcommand(1);
    auto* player = belief->add_subcommand("player", "Normal-Normal update of a batter's average");
    NormalBelief prior;
    ObservationModel obs;
    std::string scoresText, playerId = "player";
    double mass = 0.95;
    player->add_option("--prior-mean", prior.mean)->capture_default_str();
    player->add_option("--prior-var", prior.variance)->capture_default_str();
    player->add_option("--obs-var", obs.observation_variance)->capture_default_str();
    player->add_option("--scores", scoresText, "Innings scores, comma separated");
    player->add_option("--player-id", playerId)->capture_default_str();
    player->add_option("--mass", mass, "Credible interval mass")->capture_default_str();
    auto* pitch = belief->add_subcommand("pitch", "Pitch-type belief from observed deliveries, with QMDP ranking");
    std::string pitchPath, observationsText;
    pitch->add_option("--pitch-config", pitchPath, "Pitch types document (built-in GREEN/FLAT/DUSTY if absent)");
    pitch->add_option("--observations", observationsText, "ACTION:OUTCOME pairs, comma separated")->required();
    pitch->add_option("--state", stateText, "Rank actions at r,b,w (QMDP)");

    // transfer ---------------------------------------------------------------
    auto* transfer = app.add_subcommand("transfer", "Solve an engineering-domain MDP with the same engine");
    transfer->require_subcommand(1);
    auto* manuf = transfer->add_subcommand("manufacturing", "Production scheduling: units, periods, machines");
    std::string paramsPath;
    double tolerance = 1e-12;
    std::size_t maxSweeps = 100000;
    manuf->add_option("--params", paramsPath, "Manufacturing parameter pack");
    manuf->add_option("--model", modelPath, "Copy intensity rows from a chase model (with --state)");
    manuf->add_option("--state", stateText, "units,periods,machines when copying a chase model");
    auto* inv = transfer->add_subcommand("inventory", "Perishable inventory control");
    inv->add_option("--params", paramsPath, "Inventory parameter pack")->required();
    inv->add_option("--tolerance", tolerance)->capture_default_str();
    inv->add_option("--max-sweeps", maxSweeps)->capture_default_str();

    // serve ------------------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "Run the decision-support service");
    ServiceConfig svc;
    serve->add_option("--bundle", svc.bundle_paths, "Bundle documents (repeatable)")->required();
    serve->add_option("--bind", svc.bind)->envname("CHASE_BIND")->capture_default_str();
    serve->add_option("--port", svc.port)->envname("CHASE_PORT")->capture_default_str();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*estimate) {
            std::ifstream in(dataPath);
            if (!in) throw DataError("cannot open " + dataPath);
            auto parsed = parseBallByBall(in);
            for (const auto& issue : parsed.issues) err << dataPath << ":" << issue.line << ": " << issue.reason << "\n";
            auto cleaned = cleanRecords(parsed.records);
            err << "records " << cleaned.records.size() << ", duplicates " << cleaned.report.duplicates
                << ", dismissals imputed " << cleaned.report.dismissals_imputed << ", overthrows remapped "
                << cleaned.report.overthrows_remapped << "\n";
            const auto model = estimateTransitionModel(cleaned.records, estCfg);
            detail::emit(out, modelOut, writeDocument(modelToJson(model)));
            return kExitOk;
        }

        if (*solve) {
            const auto model = detail::loadModel(modelPath);
            const auto bundle = makeBundle(bundleId, model, reward, bounds);
            if (!valuesOut.empty()) writeDocumentFile(valuesOut, valueTableToJson(bundle.values, &bundle.policy, reward));
            if (!bundleOut.empty()) writeDocumentFile(bundleOut, bundleToJson(bundle));
            const MatchState top{bounds.max_runs, bounds.max_balls, bounds.max_wickets};
            json summary = api::envelope();
            summary["states_evaluated"] = bounds.stateCount();
            summary["bounds"] = boundsToJson(bounds);
            summary["model_hash"] = bundle.model_hash;
            summary["start_state"] = api::stateToJson(top);
            summary["start_win_probability"] = bundle.values[top];
            if (auto a = bundle.policy.find(top)) summary["start_action"] = std::string(actionName(*a));
            out << summary.dump() << "\n";
            return kExitOk;
        }

        if (*rec) {
            const auto s = detail::requireState(stateText);
            const auto bundle = detail::loadBundle(bundlePath);
            const auto body = detail::bodyOrThrow([&] { return withWhatIf ? api::whatIfBody(bundle, s) : api::recommendBody(bundle, s); });
            out << body.dump() << "\n";
            return kExitOk;
        }

        if (*sim) {
            const auto s = detail::requireState(stateText);
            const auto bundle = detail::loadBundle(bundlePath);
            const auto body = detail::bodyOrThrow([&] { return api::simulateBody(bundle, s, episodes, seed, threads); });
            if (!tracePath.empty()) detail::emit(out, tracePath, simulateChase(s, bundle.policy, bundle.model, seed).toText());
            out << body.dump() << "\n";
            return kExitOk;
        }

        if (*learn) {
            ChaseEnvironment env{detail::loadModel(modelPath), RewardSpec{}, learnBounds, std::nullopt};
            if (!startText.empty()) env.start = detail::requireState(startText);
            const auto exact = solveChase(env.model, env.reward, learnBounds);
            json summary = api::envelope();
            summary["algo"] = algo;
            summary["episodes"] = learnCfg.episodes;
            summary["seed"] = learnCfg.seed;
            if (algo == "qlearn" || algo == "sarsa") {
                const auto result = algo == "qlearn" ? qLearn(env, learnCfg, exact.values) : sarsa(env, learnCfg, exact.values);
                const auto greedy = evaluatePolicy(env.model, env.reward, greedyPolicyFrom(result.q));
                double worst = 0.0;
                forEachState(learnBounds, [&](const MatchState& st) { worst = std::max(worst, std::abs(greedy[st] - exact.values[st])); });
                summary["max_greedy_value_gap"] = worst;
                if (!qOut.empty()) writeDocumentFile(qOut, qTableToJson(result.q));
                if (!curveOut.empty()) detail::emit(out, curveOut, result.curve.toCsv());
            } else {
                const auto estimates = algo == "mc" ? mcEvaluate(env, exact.policy, learnCfg.episodes, learnCfg.seed)
                                                    : tdZeroEvaluate(env, exact.policy, learnCfg);
                double worst = 0.0;
                json entries = json::object();
                for (const auto& [st, v] : estimates.values) {
                    if (algo == "td" && estimates.visits.at(st) == 0) continue;
                    worst = std::max(worst, std::abs(v - exact.values[st]));
                    entries[stateKey(st)] = {{"value", v}, {"visits", estimates.visits.at(st)}};
                }
                summary["max_abs_error_vs_exact"] = worst;
                if (!qOut.empty()) {
                    json doc = makeDocument("value_estimates");
                    doc["bounds"] = boundsToJson(learnBounds);
                    doc["entries"] = entries;
                    writeDocumentFile(qOut, doc);
                }
            }
            out << summary.dump() << "\n";
            return kExitOk;
        }

        if (*bandit) {
            BanditInstance instance{detail::parseDoubles(armsText, "--arms"), horizon};
            try {
                instance.validate();
                (void)makeSelector(policy);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto trace = runBanditSim(instance, policy, seed);
            detail::emit(out, traceOut, trace.toCsv());
            if (!traceOut.empty()) {
                json summary = api::envelope();
                summary["algo"] = policy.name;
                summary["horizon"] = horizon;
                summary["seed"] = seed;
                summary["final_pseudo_regret"] = trace.finalRegret();
                out << summary.dump() << "\n";
            }
            return kExitOk;
        }

        if (*player) {
            const auto scores = scoresText.empty() ? std::vector<double>{} : detail::parseDoubles(scoresText, "--scores");
            try {
                prior.validate();
                obs.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto posterior = updateBeliefBatch(prior, scores, obs);
            const auto predictive = posteriorPredictive(posterior, obs);
            const auto interval = credibleInterval(posterior, mass);
            json body = beliefSnapshotToJson({playerId, posterior, scores.size()});
            body["predictive_mean"] = predictive.mean;
            body["predictive_variance"] = predictive.variance;
            body["credible_interval"] = {{"mass", mass}, {"low", interval.low}, {"high", interval.high}};
            out << body.dump() << "\n";
            return kExitOk;
        }

        if (*pitch) {
            const auto pitches = pitchPath.empty() ? defaultPitchSet() : pitchSetFromJson(readDocumentFile(pitchPath));
            Belief b = Belief::uniform(pitches.types.size());
            std::stringstream ss(observationsText);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto colon = item.find(':');
                const auto a = colon == std::string::npos ? std::nullopt : parseAction(item.substr(0, colon));
                const auto o = colon == std::string::npos ? std::nullopt : parseOutcome(item.substr(colon + 1));
                if (!a || !o) throw UsageError("observation '" + item + "' must look like ACTION:OUTCOME");
                b = updatePitchBelief(pitches, b, *a, *o);
            }
            json body = api::envelope();
            json weights = json::object();
            for (std::size_t i = 0; i < pitches.types.size(); ++i) weights[pitches.types[i].name] = b.weights[i];
            body["belief"] = weights;
            if (!stateText.empty()) {
                const auto s = detail::requireState(stateText);
                const Bounds qb{std::max(s.runs_needed, 1), std::max(s.balls_remaining, 1), std::max(s.wickets_in_hand, 1)};
                const auto tables = solvePitchSet(pitches, RewardSpec{}, qb);
                const auto ranked = qmdpRecommend(pitches, b, tables, RewardSpec{}, s);
                json actions = json::array();
                for (const auto& av : ranked) actions.push_back({{"action", std::string(actionName(av.action))}, {"value", av.value}});
                body["state"] = api::stateToJson(s);
                body["actions"] = actions;
            }
            out << body.dump() << "\n";
            return kExitOk;
        }

        if (*manuf) {
            ManufacturingParams params;
            if (!paramsPath.empty()) {
                params = manufacturingFromJson(readDocumentFile(paramsPath));
            } else {
                if (stateText.empty()) throw UsageError("manufacturing needs --params, or --state (with optional --model)");
                params = manufacturingFromChase(detail::loadModel(modelPath), detail::requireState(stateText));
            }
            const auto mdp = buildManufacturingMdp(params);
            const auto sol = valueIterate(mdp, 1e-13, static_cast<std::size_t>(params.periods_remaining) + 2);
            const auto grid = params.grid();
            const MatchState start{params.units_needed, params.periods_remaining, params.machines_working};
            json body = api::envelope();
            body["domain"] = "manufacturing";
            body["states"] = mdp.size();
            body["sweeps"] = sol.report.sweeps;
            body["converged"] = sol.report.converged;
            body["start_value"] = sol.values[grid.index(start)];
            const int a = sol.policy[grid.index(start)];
            if (a >= 0) body["start_intensity"] = params.intensity_rows[static_cast<std::size_t>(a)].first;
            out << body.dump() << "\n";
            return kExitOk;
        }

        if (*inv) {
            const auto params = inventoryFromJson(readDocumentFile(paramsPath));
            const auto mdp = buildInventoryMdp(params);
            const auto sol = valueIterate(mdp, tolerance, maxSweeps);
            json body = api::envelope();
            body["domain"] = "inventory";
            body["sweeps"] = sol.report.sweeps;
            body["converged"] = sol.report.converged;
            body["max_residual"] = sol.report.max_residual;
            json levels = json::array();
            for (std::size_t i = 0; i < mdp.size(); ++i)
                levels.push_back({{"stock", params.min_stock + static_cast<int>(i)}, {"value", sol.values[i]},
                                  {"order", sol.policy[i]}});
            body["levels"] = levels;
            out << body.dump() << "\n";
            return sol.report.converged ? kExitOk : kExitData;
        }

        if (*serve) {
            ChaseService service(svc);
            err << "serving " << service.bundles()->size() << " bundle(s) on " << svc.bind << ":" << svc.port << "\n";
            return service.run() ? kExitOk : kExitData;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const TerminalStateError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const json::exception& e) {
        err << "error: malformed document: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace chase::cli
