#pragma once

// Stateless HTTP front end over api::handle. Clients own the match state;
// the server only holds the immutable bundle set, swapped whole on reload.

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "chase/api.hpp"

namespace chase {

struct ServiceConfig {
    std::string bind = "127.0.0.1";
    int port = 8080;  ///< 0 picks a free port
    std::vector<std::string> bundle_paths;
};

inline api::BundleMap loadBundles(const std::vector<std::string>& paths) {
    if (paths.empty()) throw ModelError("at least one bundle is required");
    api::BundleMap out;
    for (const auto& p : paths) {
        auto b = bundleFromJson(readDocumentFile(p));
        const auto id = b.bundle_id;
        if (!out.emplace(id, std::move(b)).second) throw ModelError("duplicate bundle id '" + id + "'");
    }
    return out;
}

class ChaseService {
public:
    /// Loads every bundle up front; throws if any fails.
    explicit ChaseService(ServiceConfig config)
        : config_(std::move(config)), bundles_(std::make_shared<const api::BundleMap>(loadBundles(config_.bundle_paths))) {
        init();
    }

    /// Serves an already-loaded set (reload re-reads config paths, if any).
    ChaseService(ServiceConfig config, api::BundleMap bundles)
        : config_(std::move(config)), bundles_(std::make_shared<const api::BundleMap>(std::move(bundles))) {
        init();
    }

    ~ChaseService() { stop(); }

    ChaseService(const ChaseService&) = delete;
    ChaseService& operator=(const ChaseService&) = delete;

    /// Binds and serves on a background thread; returns the bound port.
    int start() {
        int port = config_.port;
        if (port == 0) {
            port = server_.bind_to_any_port(config_.bind);
        } else if (!server_.bind_to_port(config_.bind, port)) {
            port = -1;
        }
        if (port < 0) throw std::runtime_error("cannot bind " + config_.bind + ":" + std::to_string(config_.port));
        port_ = port;
        worker_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port_;
    }

    /// Serves on the calling thread until stop().
    bool run() { return server_.listen(config_.bind, config_.port); }

    void stop() {
        server_.stop();
        if (worker_.joinable()) worker_.join();
    }

    int port() const noexcept { return port_; }

    std::shared_ptr<const api::BundleMap> bundles() const {
        std::lock_guard lock(mutex_);
        return bundles_;
    }

    /// Re-reads the configured bundle files and swaps the set in one step;
    /// on failure the current set stays live.
    void reload() {
        auto fresh = std::make_shared<const api::BundleMap>(loadBundles(config_.bundle_paths));
        std::lock_guard lock(mutex_);
        bundles_ = std::move(fresh);
    }

private:
    void init() {
        auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
            const auto snapshot = bundles();
            const auto r = api::handle(*snapshot, req.method, req.path, req.body);
            res.status = r.status;
            res.set_content(r.text(), r.contentType().c_str());
        };
        server_.Get("/health", dispatch);
        server_.Get("/bundles", dispatch);
        for (const char* path : {"/recommend", "/what-if", "/simulate", "/apply-outcome"}) server_.Post(path, dispatch);
        server_.Post("/reload", [this](const httplib::Request&, httplib::Response& res) {
            try {
                reload();
                const auto r = api::Response{200, api::bundlesBody(*bundles())};
                res.status = r.status;
                res.set_content(r.text(), "application/json");
            } catch (const std::exception& e) {
                const auto r = api::errorResponse(500, "reload_failed", e.what());
                res.status = r.status;
                res.set_content(r.text(), "application/json");
            }
        });
    }

    ServiceConfig config_;
    mutable std::mutex mutex_;
    std::shared_ptr<const api::BundleMap> bundles_;
    httplib::Server server_;
    std::thread worker_;
    int port_ = 0;
};

}  // namespace chase
