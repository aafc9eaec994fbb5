#pragma once

// Mapping service: analysis and review sessions behind a versioned JSON
// API. Requests are routed through `handle` so they can be exercised
// without a socket; `serve` binds the same routes to an HTTP listener.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "attackmap/classifiers.hpp"
#include "attackmap/errors.hpp"
#include "attackmap/stix.hpp"

namespace httplib {
class Server;
}

namespace attackmap {

/// Error carrying an HTTP status and a machine-readable code.
class ApiError : public Error {
public:
    ApiError(int status, std::string code, const std::string& message, nlohmann::json details = nlohmann::json::object())
        : Error(message), status_(status), code_(std::move(code)), details_(std::move(details)) {}
    int status() const noexcept { return status_; }
    const std::string& code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }
    nlohmann::json to_json() const { return {{"code", code_}, {"message", what()}, {"details", details_}}; }

private:
    int status_;
    std::string code_;
    nlohmann::json details_;
};

struct Suggestion {
    std::string technique_id;
    std::string name;
    double probability = 0.0;
};

enum class Decision { accepted, rejected };

struct ReviewSession {
    std::string session_id;
    std::string created_at;
    std::string model_id;
    std::vector<std::string> sentences;
    std::vector<std::vector<Suggestion>> suggestions;
    /// (sentence index, technique id) -> decision; latest write wins.
    std::map<std::pair<std::size_t, std::string>, Decision> decisions;
    bool closed = false;

    nlohmann::json to_json() const;
    static ReviewSession from_json(const nlohmann::json& doc);
    /// Sorted unique accepted techniques and the accepted pairs.
    nlohmann::json export_document() const;
};

/// Sessions kept in memory and mirrored to a single JSON file (rewritten
/// atomically on each change) when a path is given.
class SessionStore {
public:
    explicit SessionStore(std::optional<std::filesystem::path> file = std::nullopt);

    ReviewSession create(ReviewSession session);
    std::optional<ReviewSession> get(const std::string& id) const;
    /// Applies `fn` under the store lock and persists the result.
    template <typename Fn>
    ReviewSession update(const std::string& id, Fn fn) {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw ApiError(404, "not_found", "unknown session '" + id + "'");
        ReviewSession copy = it->second;
        fn(copy);
        it->second = std::move(copy);
        persist_locked();
        return it->second;
    }
    std::size_t size() const;

private:
    void persist_locked() const;
    std::string next_id_locked();

    std::optional<std::filesystem::path> file_;
    mutable std::mutex mutex_;
    std::map<std::string, ReviewSession> sessions_;
    std::uint64_t counter_ = 0;
    std::uint64_t salt_ = 0;
};

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

class MappingService {
public:
    static constexpr std::size_t kDefaultK = 3;
    static constexpr double kDefaultTheta = 0.2;

    /// Loads `<dir>/models/*.json`, optional `<dir>/registry.json`, and keeps
    /// sessions in `<dir>/sessions.json`.
    static MappingService from_data_dir(const std::filesystem::path& dir);

    MappingService(std::map<std::string, std::shared_ptr<const ClassifierModel>> models,
                   std::shared_ptr<const TechniqueRegistry> registry,
                   std::optional<std::filesystem::path> session_file = std::nullopt);

    /// Routes one request. `target` may carry a query string.
    ApiResponse handle(std::string_view method, std::string_view target, std::string_view body);

    nlohmann::json health() const;
    nlohmann::json techniques() const;
    nlohmann::json models() const;
    nlohmann::json analyze(const nlohmann::json& request) const;
    nlohmann::json create_session(const nlohmann::json& request);
    nlohmann::json record_decision(const std::string& session_id, const nlohmann::json& request);
    nlohmann::json export_session(const std::string& session_id, bool close);

    /// Blocks serving HTTP until `stop` is called. Port 0 picks a free
    /// port; `on_bound` receives the bound port before requests are accepted.
    void serve(const std::string& host, int port, const std::function<void(int)>& on_bound = {});
    void stop();

    const std::vector<std::string>& load_warnings() const noexcept { return warnings_; }

private:
    struct Analysis {
        std::string model_id;
        std::vector<std::string> sentences;
        std::vector<std::vector<Suggestion>> candidates;
        double theta;
        std::vector<std::string> document_techniques;
    };
    Analysis run_analysis(const nlohmann::json& request) const;
    const ClassifierModel& model_for(const std::string& id) const;
    std::string resolve_model_id(const nlohmann::json& request) const;

    std::map<std::string, std::shared_ptr<const ClassifierModel>> models_;
    std::shared_ptr<const TechniqueRegistry> registry_;
    std::unique_ptr<SessionStore> sessions_;
    std::vector<std::string> warnings_;
    std::unique_ptr<std::mutex> server_mutex_ = std::make_unique<std::mutex>();
    std::shared_ptr<httplib::Server> server_;
};

}  // namespace attackmap
