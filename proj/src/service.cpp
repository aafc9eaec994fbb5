#include "attackmap/service.hpp"

#include <chrono>
#include <ctime>
#include <iostream>
#include <random>
#include <set>

#include <httplib.h>

#include "attackmap/corpus.hpp"
#include "attackmap/docmap.hpp"
#include "attackmap/util.hpp"

namespace attackmap {

using nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string_view decision_name(Decision d) { return d == Decision::accepted ? "accepted" : "rejected"; }

Decision parse_decision(const json& value) {
    if (value.is_string()) {
        const auto s = value.get<std::string>();
        if (s == "accept" || s == "accepted") return Decision::accepted;
        if (s == "reject" || s == "rejected") return Decision::rejected;
    }
    throw ApiError(400, "bad_request", "decision must be \"accept\" or \"reject\"");
}

json suggestion_json(const Suggestion& s) {
    return {{"technique_id", s.technique_id}, {"name", s.name}, {"probability", s.probability}};
}

Suggestion suggestion_from_json(const json& doc) {
    return {doc.at("technique_id").get<std::string>(), doc.value("name", ""), doc.at("probability").get<double>()};
}

json parse_body(std::string_view body) {
    if (trim(body).empty()) throw ApiError(400, "bad_request", "request body is empty");
    try {
        auto doc = json::parse(body);
        if (!doc.is_object()) throw ApiError(400, "bad_request", "request body must be a JSON object");
        return doc;
    } catch (const json::parse_error& e) {
        throw ApiError(400, "bad_request", "request body is not valid JSON", {{"parse_error", e.what()}});
    }
}

std::map<std::string, std::string> parse_query(std::string_view query) {
    std::map<std::string, std::string> out;
    std::size_t start = 0;
    while (start < query.size()) {
        auto end = query.find('&', start);
        if (end == std::string_view::npos) end = query.size();
        auto pair = query.substr(start, end - start);
        auto eq = pair.find('=');
        if (eq == std::string_view::npos) {
            out[std::string(pair)] = "";
        } else {
            out[std::string(pair.substr(0, eq))] = std::string(pair.substr(eq + 1));
        }
        start = end + 1;
    }
    return out;
}

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto end = path.find('/', start);
        if (end == std::string_view::npos) end = path.size();
        if (end > start) parts.emplace_back(path.substr(start, end - start));
        start = end + 1;
    }
    return parts;
}

}  // namespace

// ---------------------------------------------------------------------------

json ReviewSession::to_json() const {
    json sugg = json::array();
    for (const auto& row : suggestions) {
        json r = json::array();
        for (const auto& s : row) r.push_back(suggestion_json(s));
        sugg.push_back(r);
    }
    json dec = json::array();
    for (const auto& [key, d] : decisions) {
        dec.push_back({{"sentence_index", key.first}, {"technique_id", key.second}, {"decision", decision_name(d)}});
    }
    return {{"session_id", session_id}, {"created_at", created_at}, {"model_id", model_id},
            {"sentences", sentences},   {"suggestions", sugg},       {"decisions", dec},
            {"status", closed ? "closed" : "open"}};
}

ReviewSession ReviewSession::from_json(const json& doc) {
    ReviewSession s;
    s.session_id = doc.at("session_id").get<std::string>();
    s.created_at = doc.value("created_at", "");
    s.model_id = doc.at("model_id").get<std::string>();
    s.sentences = doc.at("sentences").get<std::vector<std::string>>();
    for (const auto& row : doc.at("suggestions")) {
        std::vector<Suggestion> r;
        for (const auto& item : row) r.push_back(suggestion_from_json(item));
        s.suggestions.push_back(std::move(r));
    }
    for (const auto& d : doc.at("decisions")) {
        s.decisions[{d.at("sentence_index").get<std::size_t>(), d.at("technique_id").get<std::string>()}] =
            parse_decision(d.at("decision"));
    }
    s.closed = doc.value("status", "open") == "closed";
    return s;
}

json ReviewSession::export_document() const {
    std::set<std::string> techniques;
    json annotations = json::array();
    for (const auto& [key, d] : decisions) {
        if (d != Decision::accepted) continue;
        techniques.insert(key.second);
        annotations.push_back({{"sentence_index", key.first}, {"technique_id", key.second}});
    }
    return {{"format_version", 1},
            {"session_id", session_id},
            {"model_id", model_id},
            {"techniques", techniques},
            {"sentence_annotations", annotations}};
}

// ---------------------------------------------------------------------------

SessionStore::SessionStore(std::optional<std::filesystem::path> file) : file_(std::move(file)) {
    std::random_device rd;
    salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
            static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
    if (!file_ || !std::filesystem::exists(*file_)) return;
    json doc;
    try {
        doc = json::parse(read_file(*file_));
        for (const auto& item : doc.at("sessions")) {
            auto s = ReviewSession::from_json(item);
            sessions_.emplace(s.session_id, std::move(s));
        }
    } catch (const json::exception& e) {
        throw ParseError("session store " + file_->string() + " is unreadable: " + e.what());
    }
    counter_ = sessions_.size();
}

std::string SessionStore::next_id_locked() {
    for (;;) {
        Fingerprint fp;
        fp.add(salt_).add(++counter_);
        std::string id = "s-" + fp.hex();
        if (!sessions_.count(id)) return id;
    }
}

ReviewSession SessionStore::create(ReviewSession session) {
    std::lock_guard lock(mutex_);
    session.session_id = next_id_locked();
    auto id = session.session_id;
    sessions_.emplace(id, std::move(session));
    persist_locked();
    return sessions_.at(id);
}

std::optional<ReviewSession> SessionStore::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

std::size_t SessionStore::size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

void SessionStore::persist_locked() const {
    if (!file_) return;
    json list = json::array();
    for (const auto& [id, s] : sessions_) list.push_back(s.to_json());
    json doc = {{"format_version", 1}, {"sessions", list}};
    auto tmp = *file_;
    tmp += ".tmp";
    write_file(tmp, doc.dump(1) + "\n");
    std::filesystem::rename(tmp, *file_);
}

// ---------------------------------------------------------------------------

MappingService MappingService::from_data_dir(const std::filesystem::path& dir) {
    std::map<std::string, std::shared_ptr<const ClassifierModel>> models;
    std::vector<std::string> warnings;
    const auto model_dir = dir / "models";
    if (std::filesystem::is_directory(model_dir)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(model_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            try {
                models.emplace(f.stem().string(), std::make_shared<const ClassifierModel>(load_model(f)));
            } catch (const Error& e) {
                warnings.push_back("skipped model " + f.filename().string() + ": " + e.what());
            }
        }
    }
    std::shared_ptr<const TechniqueRegistry> registry;
    if (std::filesystem::exists(dir / "registry.json")) {
        registry = std::make_shared<const TechniqueRegistry>(load_registry(dir / "registry.json"));
    }
    MappingService svc(std::move(models), std::move(registry), dir / "sessions.json");
    svc.warnings_.insert(svc.warnings_.begin(), warnings.begin(), warnings.end());
    return svc;
}

MappingService::MappingService(std::map<std::string, std::shared_ptr<const ClassifierModel>> models,
                               std::shared_ptr<const TechniqueRegistry> registry,
                               std::optional<std::filesystem::path> session_file)
    : registry_(std::move(registry)), sessions_(std::make_unique<SessionStore>(std::move(session_file))) {
    if (!registry_ && !models.empty()) {
        registry_ = std::make_shared<const TechniqueRegistry>(registry_of_model(*models.begin()->second));
    }
    for (auto& [id, model] : models) {
        if (registry_ && model->registry_fingerprint() != registry_->fingerprint()) {
            warnings_.push_back("skipped model " + id + ": trained against a different technique registry");
            continue;
        }
        models_.emplace(id, std::move(model));
    }
}

json MappingService::health() const {
    return {{"status", "ok"},
            {"models", models_.size()},
            {"techniques", registry_ ? registry_->size() : 0},
            {"sessions", sessions_->size()}};
}

json MappingService::techniques() const {
    json list = json::array();
    if (registry_) {
        for (const auto& t : registry_->techniques()) {
            list.push_back({{"technique_id", t.id}, {"name", t.name}, {"tactics", t.tactics}});
        }
    }
    return {{"techniques", list}};
}

json MappingService::models() const {
    json list = json::array();
    for (const auto& [id, m] : models_) {
        list.push_back({{"model_id", id},
                        {"kind", to_string(m->spec().kind())},
                        {"balanced", m->spec().balanced()},
                        {"classes", m->n_classes()},
                        {"vocabulary", m->tfidf().dim()}});
    }
    return {{"models", list}};
}

const ClassifierModel& MappingService::model_for(const std::string& id) const {
    auto it = models_.find(id);
    if (it == models_.end()) throw ApiError(404, "not_found", "unknown model '" + id + "'");
    return *it->second;
}

std::string MappingService::resolve_model_id(const json& request) const {
    if (request.contains("model_id")) {
        if (!request["model_id"].is_string()) throw ApiError(400, "bad_request", "model_id must be a string");
        return request["model_id"].get<std::string>();
    }
    if (models_.empty()) throw ApiError(404, "not_found", "no models are loaded");
    return models_.begin()->first;
}

MappingService::Analysis MappingService::run_analysis(const json& request) const {
    Analysis a;
    a.model_id = resolve_model_id(request);
    const auto& model = model_for(a.model_id);

    std::size_t k = kDefaultK;
    if (request.contains("k")) {
        const auto& v = request["k"];
        if (!v.is_number_integer() || v.get<long long>() < 1 ||
            v.get<long long>() > static_cast<long long>(model.n_classes())) {
            throw ApiError(400, "bad_request", "k must be an integer in [1, " + std::to_string(model.n_classes()) + "]");
        }
        k = v.get<std::size_t>();
    }
    k = std::min(k, model.n_classes());
    a.theta = kDefaultTheta;
    if (request.contains("theta")) {
        const auto& v = request["theta"];
        if (!v.is_number() || !(v.get<double>() > 0.0 && v.get<double>() < 1.0)) {
            throw ApiError(400, "bad_request", "theta must be a number in (0, 1)");
        }
        a.theta = v.get<double>();
    }
    if (request.contains("sentences")) {
        try {
            a.sentences = request["sentences"].get<std::vector<std::string>>();
        } catch (const json::exception&) {
            throw ApiError(400, "bad_request", "sentences must be an array of strings");
        }
    } else {
        if (!request.contains("text") || !request["text"].is_string()) {
            throw ApiError(400, "bad_request", "text is required");
        }
        a.sentences = split_sentences(request["text"].get<std::string>());
    }
    std::erase_if(a.sentences, [](const std::string& s) { return trim(s).empty(); });
    if (a.sentences.empty()) throw ApiError(400, "bad_request", "text contains no sentences");

    std::vector<std::vector<double>> rows;
    for (const auto& s : a.sentences) {
        rows.push_back(predict_text(model, s));
        std::vector<Suggestion> cands;
        for (const auto& [c, p] : top_k(rows.back(), k)) {
            const auto& id = model.classes()[c];
            cands.push_back({id, registry_ ? registry_->name_of(id) : "", p});
        }
        a.candidates.push_back(std::move(cands));
    }
    auto doc = predict_from_rows("", rows, model.classes(), a.theta);
    a.document_techniques.assign(doc.predicted_set.begin(), doc.predicted_set.end());
    return a;
}

json MappingService::analyze(const json& request) const {
    auto a = run_analysis(request);
    json sentences = json::array();
    for (std::size_t i = 0; i < a.sentences.size(); ++i) {
        json cands = json::array();
        for (const auto& s : a.candidates[i]) cands.push_back(suggestion_json(s));
        sentences.push_back({{"index", i}, {"text", a.sentences[i]}, {"candidates", cands}});
    }
    return {{"model_id", a.model_id},
            {"sentences", sentences},
            {"document", {{"threshold", a.theta}, {"techniques", a.document_techniques}}}};
}

json MappingService::create_session(const json& request) {
    auto a = run_analysis(request);
    ReviewSession s;
    s.created_at = utc_now();
    s.model_id = a.model_id;
    s.sentences = std::move(a.sentences);
    s.suggestions = std::move(a.candidates);
    return sessions_->create(std::move(s)).to_json();
}

json MappingService::record_decision(const std::string& session_id, const json& request) {
    if (!request.contains("sentence_index") || !request["sentence_index"].is_number_integer()) {
        throw ApiError(422, "unprocessable", "sentence_index must be an integer");
    }
    if (!request.contains("technique_id") || !request["technique_id"].is_string()) {
        throw ApiError(422, "unprocessable", "technique_id must be a string");
    }
    const auto index = request["sentence_index"].get<long long>();
    const auto technique = request["technique_id"].get<std::string>();
    const Decision decision = parse_decision(request.value("decision", json()));
    return sessions_
        ->update(session_id,
                 [&](ReviewSession& s) {
                     if (s.closed) throw ApiError(409, "conflict", "session '" + session_id + "' is closed");
                     if (index < 0 || static_cast<std::size_t>(index) >= s.sentences.size()) {
                         throw ApiError(422, "unprocessable", "sentence_index " + std::to_string(index) +
                                                                  " is outside the session's " +
                                                                  std::to_string(s.sentences.size()) + " sentences");
                     }
                     if (registry_ && !registry_->contains(technique)) {
                         throw ApiError(422, "unprocessable", "unknown technique '" + technique + "'");
                     }
                     s.decisions[{static_cast<std::size_t>(index), technique}] = decision;
                 })
        .to_json();
}

json MappingService::export_session(const std::string& session_id, bool close) {
    if (!close) {
        auto s = sessions_->get(session_id);
        if (!s) throw ApiError(404, "not_found", "unknown session '" + session_id + "'");
        return s->export_document();
    }
    return sessions_->update(session_id, [](ReviewSession& s) { s.closed = true; }).export_document();
}

ApiResponse MappingService::handle(std::string_view method, std::string_view target, std::string_view body) {
    try {
        auto q = target.find('?');
        const auto path = split_path(target.substr(0, q));
        const auto query = parse_query(q == std::string_view::npos ? std::string_view{} : target.substr(q + 1));
        const auto not_allowed = [&] {
            return ApiError(405, "method_not_allowed", std::string(method) + " is not supported here");
        };
        if (path.size() < 2 || path[0] != "v1") throw ApiError(404, "not_found", "no such endpoint");
        const auto& resource = path[1];
        if (path.size() == 2) {
            if (resource == "health") {
                if (method != "GET") throw not_allowed();
                return {200, health()};
            }
            if (resource == "techniques") {
                if (method != "GET") throw not_allowed();
                return {200, techniques()};
            }
            if (resource == "models") {
                if (method != "GET") throw not_allowed();
                return {200, models()};
            }
            if (resource == "analyze") {
                if (method != "POST") throw not_allowed();
                return {200, analyze(parse_body(body))};
            }
            if (resource == "sessions") {
                if (method != "POST") throw not_allowed();
                return {201, create_session(parse_body(body))};
            }
        }
        if (resource == "sessions" && path.size() == 3) {
            if (method != "GET") throw not_allowed();
            auto s = sessions_->get(path[2]);
            if (!s) throw ApiError(404, "not_found", "unknown session '" + path[2] + "'");
            return {200, s->to_json()};
        }
        if (resource == "sessions" && path.size() == 4) {
            if (path[3] == "decisions") {
                if (method != "POST") throw not_allowed();
                return {200, record_decision(path[2], parse_body(body))};
            }
            if (path[3] == "export") {
                if (method != "GET") throw not_allowed();
                auto it = query.find("close");
                const bool close = it != query.end() && (it->second == "true" || it->second == "1");
                return {200, export_session(path[2], close)};
            }
        }
        throw ApiError(404, "not_found", "no such endpoint");
    } catch (const ApiError& e) {
        return {e.status(), e.to_json()};
    } catch (const Error& e) {
        return {400, ApiError(400, "bad_request", e.what()).to_json()};
    } catch (const std::exception& e) {
        return {500, ApiError(500, "internal", e.what()).to_json()};
    }
}

void MappingService::serve(const std::string& host, int port, const std::function<void(int)>& on_bound) {
    auto server = std::make_shared<httplib::Server>();
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
        auto out = handle(req.method, req.target, req.body);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    server->Get(".*", dispatch);
    server->Post(".*", dispatch);
    int bound = port;
    if (port == 0) {
        bound = server->bind_to_any_port(host);
        if (bound < 0) throw Error("cannot bind " + host);
    } else if (!server->bind_to_port(host, port)) {
        throw Error("cannot bind " + host + ":" + std::to_string(port));
    }
    {
        std::lock_guard lock(*server_mutex_);
        server_ = server;
    }
    if (on_bound) on_bound(bound);
    server->listen_after_bind();
    std::lock_guard lock(*server_mutex_);
    server_.reset();
}

void MappingService::stop() {
    std::lock_guard lock(*server_mutex_);
    if (server_) server_->stop();
}

}  // namespace attackmap
