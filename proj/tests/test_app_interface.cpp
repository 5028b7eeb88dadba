#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <fstream>

#include "chase/chase.hpp"
#include "chase/cli.hpp"
#include "chase/service.hpp"
#include "httplib.h"

using namespace chase;
namespace fs = std::filesystem;

namespace {

api::BundleMap smallBundles() {
    api::BundleMap m;
    m.emplace("default", makeBundle("default", defaultModel(), {}, {20, 12, 3}));
    m.emplace("aggressive", makeBundle("aggressive", TransitionModel::singleRow(referenceAggressiveRow()), {}, {6, 4, 2}));
    return m;
}

MatchState ms(int r, int b, int w) { return {r, b, w}; }

const Bounds kSolveBounds{12, 8, 2};
const Bounds kManufBounds{8, 6, 2};

json stateJson(int r, int b, int w) { return api::stateToJson({r, b, w}); }

api::Response post(const api::BundleMap& m, const std::string& path, const json& body) {
    return api::handle(m, "POST", path, body.dump());
}

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun runCli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::cliMain(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("chase_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++))) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Request handling
// ---------------------------------------------------------------------------

TEST(Handle, HealthAndBundles) {
    const auto m = smallBundles();
    const auto h = api::handle(m, "GET", "/health", "");
    EXPECT_EQ(h.status, 200);
    EXPECT_EQ(h.text(), "ok");
    EXPECT_EQ(h.contentType(), "text/plain");
    const auto b = api::handle(m, "GET", "/bundles", "");
    ASSERT_EQ(b.status, 200);
    EXPECT_EQ(b.body["bundles"].size(), 2u);
    EXPECT_EQ(b.body["schema_version"], kSchemaVersion);
}

TEST(Handle, RecommendMatchesLibrary) {
    const auto m = smallBundles();
    const auto r = post(m, "/recommend", {{"bundle_id", "aggressive"}, {"state", stateJson(1, 1, 1)}});
    ASSERT_EQ(r.status, 200) << r.text();
    EXPECT_NEAR(r.body["win_probability"].get<double>(), 0.65, 1e-12);
    const auto& d = m.at("default");
    const auto ranked = recommend(d.values, d.model, d.reward, {15, 10, 2});
    const auto r2 = post(m, "/recommend", {{"bundle_id", "default"}, {"state", stateJson(15, 10, 2)}});
    ASSERT_EQ(r2.body["actions"].size(), kActionCount);
    EXPECT_EQ(r2.body["recommended_action"], std::string(actionName(ranked[0].action)));
    for (std::size_t i = 0; i < kActionCount; ++i) EXPECT_EQ(r2.body["actions"][i]["value"].get<double>(), ranked[i].value);
}

TEST(Handle, WhatIfBranchesReverifyAgainstTables) {
    const auto m = smallBundles();
    const auto& d = m.at("default");
    const auto r = post(m, "/what-if", {{"bundle_id", "default"}, {"state", stateJson(9, 6, 2)}});
    ASSERT_EQ(r.status, 200);
    for (const auto& a : r.body["per_action"]) {
        double sum = 0.0, prob = 0.0;
        for (const auto& br : a["outcomes"]) {
            const MatchState next = api::stateFromJson(br["successor"]);
            EXPECT_EQ(br["successor_win_probability"].get<double>(), d.values[next]);
            sum += br["probability"].get<double>() * br["successor_win_probability"].get<double>();
            prob += br["probability"].get<double>();
        }
        EXPECT_NEAR(prob, 1.0, 1e-12);
        EXPECT_NEAR(a["win_probability"].get<double>(), sum, 1e-12);
    }
    EXPECT_NEAR(r.body["win_probability"].get<double>(), r.body["per_action"][0]["win_probability"].get<double>(), 1e-12);
}

TEST(Handle, SimulateIsDeterministic) {
    const auto m = smallBundles();
    const json req{{"bundle_id", "default"}, {"state", stateJson(20, 12, 3)}, {"episodes", 2000}, {"seed", 5}};
    const auto a = post(m, "/simulate", req);
    ASSERT_EQ(a.status, 200) << a.text();
    EXPECT_EQ(a.text(), post(m, "/simulate", req).text());
    EXPECT_EQ(a.body["exact_win_probability"].get<double>(), m.at("default").values[ms(20, 12, 3)]);
    auto big = req;
    big["episodes"] = api::kMaxSimulationEpisodes + 1;
    EXPECT_EQ(post(m, "/simulate", big).status, 400);
    auto neg = req;
    neg["seed"] = -1;
    EXPECT_EQ(post(m, "/simulate", neg).status, 400);
}

TEST(Handle, ApplyOutcome) {
    const auto m = smallBundles();
    auto r = post(m, "/apply-outcome", {{"state", stateJson(4, 3, 1)}, {"outcome", "4"}});
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["state"], stateJson(0, 2, 1));
    EXPECT_EQ(r.body["status"], "WIN");
    r = post(m, "/apply-outcome", {{"state", stateJson(4, 3, 1)}, {"outcome", "W"}});
    EXPECT_EQ(r.body["status"], "LOSS");
    EXPECT_EQ(post(m, "/apply-outcome", {{"state", stateJson(4, 3, 1)}, {"outcome", "5"}}).status, 400);
    r = post(m, "/apply-outcome", {{"state", stateJson(0, 3, 1)}, {"outcome", "1"}});
    EXPECT_EQ(r.status, 422);
    EXPECT_EQ(r.body["terminal_status"], "WIN");
}

TEST(Handle, ErrorStatuses) {
    const auto m = smallBundles();
    EXPECT_EQ(api::handle(m, "POST", "/recommend", "{not json").status, 400);
    EXPECT_EQ(api::handle(m, "POST", "/recommend", "[1]").status, 400);
    EXPECT_EQ(post(m, "/recommend", {{"bundle_id", "default"}}).status, 400);
    EXPECT_EQ(post(m, "/recommend", {{"bundle_id", "default"}, {"state", {{"runs_needed", 3}}}}).status, 400);
    EXPECT_EQ(post(m, "/recommend", {{"bundle_id", "default"}, {"state", stateJson(-1, 3, 1)}}).status, 400);
    EXPECT_EQ(post(m, "/recommend", {{"bundle_id", 7}, {"state", stateJson(3, 3, 1)}}).status, 400);
    EXPECT_EQ(post(m, "/recommend", {{"schema_version", 99}, {"bundle_id", "default"}, {"state", stateJson(3, 3, 1)}}).status, 400);

    const auto unknown = post(m, "/recommend", {{"bundle_id", "nope"}, {"state", stateJson(3, 3, 1)}});
    EXPECT_EQ(unknown.status, 404);
    EXPECT_EQ(unknown.body["error"]["code"], "unknown_bundle");
    EXPECT_EQ(api::handle(m, "GET", "/nowhere", "").status, 404);
    EXPECT_EQ(api::handle(m, "POST", "/health", "").status, 404);

    const auto lost = post(m, "/what-if", {{"bundle_id", "default"}, {"state", stateJson(5, 0, 2)}});
    EXPECT_EQ(lost.status, 422);
    EXPECT_EQ(lost.body["error"]["code"], "terminal_state");
    EXPECT_EQ(lost.body["terminal_status"], "LOSS");
    const auto outside = post(m, "/recommend", {{"bundle_id", "default"}, {"state", stateJson(21, 12, 3)}});
    EXPECT_EQ(outside.status, 422);
    EXPECT_EQ(outside.body["error"]["code"], "out_of_bounds");
}

TEST(Handle, RepeatedRequestsGiveIdenticalBodies) {
    const auto m = smallBundles();
    const auto body = json{{"bundle_id", "default"}, {"state", stateJson(13, 7, 2)}}.dump();
    for (const char* path : {"/recommend", "/what-if"})
        EXPECT_EQ(api::handle(m, "POST", path, body).text(), api::handle(m, "POST", path, body).text());
}

// ---------------------------------------------------------------------------
// Bundles on disk
// ---------------------------------------------------------------------------

TEST(Bundle, DocumentRoundTripKeepsTables) {
    const auto b = makeBundle("b1", defaultModel(), {1.0, 0.0, 0.01}, {8, 6, 2});
    const auto back = bundleFromJson(parseDocument(writeDocument(bundleToJson(b))));
    EXPECT_EQ(back.bundle_id, "b1");
    EXPECT_EQ(back.model_hash, b.model_hash);
    EXPECT_TRUE(back.reward == b.reward);
    forEachState(b.bounds, [&](const MatchState& s) { EXPECT_NEAR(back.values[s], b.values[s], 5e-13); });
    EXPECT_EQ(back.policy, b.policy);
}

TEST(Bundle, TamperedModelRejected) {
    auto doc = bundleToJson(makeBundle("b1", defaultModel(), {}, {4, 3, 1}));
    doc["model"]["rows"]["BALANCED"]["0"] = 0.41;
    doc["model"]["rows"]["BALANCED"]["1"] = 0.29;
    EXPECT_THROW(bundleFromJson(doc), ModelError);
}

// ---------------------------------------------------------------------------
// Live service
// ---------------------------------------------------------------------------

TEST(Service, ServesAndReloads) {
    TempDir dir;
    const auto path = dir.file("bundle.json");
    writeDocumentFile(path, bundleToJson(makeBundle("live", defaultModel(), {}, {10, 6, 2})));
    ChaseService service({"127.0.0.1", 0, {path}});
    const int port = service.start();
    ASSERT_GT(port, 0);

    httplib::Client client("127.0.0.1", port);
    auto h = client.Get("/health");
    ASSERT_TRUE(h);
    EXPECT_EQ(h->status, 200);
    EXPECT_EQ(h->body, "ok");

    const auto req = json{{"bundle_id", "live"}, {"state", stateJson(10, 6, 2)}}.dump();
    auto r1 = client.Post("/what-if", req, "application/json");
    auto r2 = client.Post("/what-if", req, "application/json");
    ASSERT_TRUE(r1 && r2);
    EXPECT_EQ(r1->status, 200);
    EXPECT_EQ(r1->body, r2->body);
    EXPECT_EQ(r1->body, api::handle(*service.bundles(), "POST", "/what-if", req).text());

    auto bad = client.Post("/recommend", "{", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);

    // Swap in a second bundle id and reload.
    writeDocumentFile(path, bundleToJson(makeBundle("live2", defaultModel(), {}, {10, 6, 2})));
    auto rl = client.Post("/reload", "", "application/json");
    ASSERT_TRUE(rl);
    EXPECT_EQ(rl->status, 200);
    EXPECT_EQ(client.Post("/recommend", req, "application/json")->status, 404);

    // A broken file leaves the current set live.
    {
        std::ofstream f(path);
        f << "{";
    }
    rl = client.Post("/reload", "", "application/json");
    ASSERT_TRUE(rl);
    EXPECT_EQ(rl->status, 500);
    EXPECT_TRUE(service.bundles()->contains("live2"));
    service.stop();
}

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

TEST(Cli, SolveWritesBundleUsedByRecommend) {
    TempDir dir;
    const auto bundle = dir.file("b.json");
    auto r = runCli({"solve", "--max-runs", "12", "--max-balls", "8", "--max-wickets", "2", "--bundle", bundle, "--bundle-id", "t"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = json::parse(r.out);
    const auto exact = solveChase(defaultModel(), {}, {12, 8, 2});
    EXPECT_NEAR(summary["start_win_probability"].get<double>(), exact.values[ms(12, 8, 2)], 1e-12);
    EXPECT_EQ(summary["states_evaluated"], kSolveBounds.stateCount());

    r = runCli({"recommend", "--bundle", bundle, "--state", "7,5,1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out)["win_probability"].get<double>(), exact.values[ms(7, 5, 1)], 1e-12);

    r = runCli({"recommend", "--bundle", bundle, "--state", "0,5,1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("WIN"), std::string::npos);
    EXPECT_EQ(runCli({"recommend", "--bundle", bundle, "--state", "seven"}).code, 1);
    EXPECT_EQ(runCli({"recommend", "--bundle", dir.file("missing.json"), "--state", "3,3,1"}).code, 2);
}

TEST(Cli, SimulateTraceAndSummary) {
    TempDir dir;
    const auto bundle = dir.file("b.json");
    ASSERT_EQ(runCli({"solve", "--max-runs", "10", "--max-balls", "6", "--max-wickets", "2", "--bundle", bundle}).code, 0);
    const auto a = runCli({"simulate", "--bundle", bundle, "--state", "10,6,2", "--episodes", "500", "--seed", "3"});
    const auto b = runCli({"simulate", "--bundle", bundle, "--state", "10,6,2", "--episodes", "500", "--seed", "3"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(json::parse(a.out)["episodes"], 500);
}

TEST(Cli, BanditOutputIsReproducible) {
    const std::vector<std::string> args{"bandit", "--arms", "0.3,0.5,0.7", "--algo", "thompson", "--horizon", "400", "--seed", "21"};
    const auto a = runCli(args);
    const auto b = runCli(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "step,arm,reward,cumulative_pseudo_regret");
    EXPECT_EQ(runCli({"bandit", "--arms", "0.3,1.7"}).code, 1);
    EXPECT_EQ(runCli({"bandit", "--arms", "0.3,0.7", "--algo", "best"}).code, 1);
}

TEST(Cli, BeliefAndTransferSubcommands) {
    auto r = runCli({"belief", "player", "--prior-mean", "35", "--prior-var", "100", "--obs-var", "100", "--scores", "50"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto body = json::parse(r.out);
    EXPECT_NEAR(body["mean"].get<double>(), 42.5, 1e-12);
    EXPECT_NEAR(body["variance"].get<double>(), 50.0, 1e-12);

    r = runCli({"belief", "pitch", "--observations", "BALANCED:4,BALANCED:6", "--state", "6,4,2"});
    ASSERT_EQ(r.code, 0) << r.err;
    body = json::parse(r.out);
    double total = 0.0;
    for (const auto& [_, w] : body["belief"].items()) total += w.get<double>();
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(body["actions"].size(), kActionCount);
    EXPECT_EQ(runCli({"belief", "pitch", "--observations", "BALANCED-4"}).code, 1);

    r = runCli({"transfer", "manufacturing", "--state", "8,6,2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out)["start_value"].get<double>(), solveChase(defaultModel(), RewardSpec(), kManufBounds).values[ms(8, 6, 2)], 1e-12);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(runCli({}).code, 1);
    EXPECT_EQ(runCli({"frobnicate"}).code, 1);
    EXPECT_EQ(runCli({"recommend"}).code, 1);
    EXPECT_EQ(runCli({"--help"}).code, 0);
}
