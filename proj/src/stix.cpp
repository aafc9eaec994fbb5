#include "attackmap/stix.hpp"

#include <algorithm>
#include <cctype>

#include "attackmap/errors.hpp"
#include "attackmap/util.hpp"

namespace attackmap {

using nlohmann::json;

namespace {

std::optional<std::string> optional_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
        throw SchemaError(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

bool flag(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it != obj.end() && it->is_boolean() && it->get<bool>();
}

StixObject parse_object(const json& obj, std::size_t position) {
    if (!obj.is_object()) {
        throw SchemaError("objects[" + std::to_string(position) + "] is not an object");
    }
    StixObject out;
    auto id = optional_string(obj, "id");
    auto type = optional_string(obj, "type");
    if (!id || id->empty() || !type || type->empty()) {
        throw SchemaError("objects[" + std::to_string(position) + "] lacks a non-empty id or type");
    }
    out.id = *id;
    out.type = *type;
    out.name = optional_string(obj, "name");
    out.description = optional_string(obj, "description");
    out.relationship_type = optional_string(obj, "relationship_type");
    out.source_ref = optional_string(obj, "source_ref");
    out.target_ref = optional_string(obj, "target_ref");
    out.revoked = flag(obj, "revoked");
    out.deprecated = flag(obj, "x_mitre_deprecated") || flag(obj, "deprecated");

    if (auto it = obj.find("external_references"); it != obj.end() && it->is_array()) {
        for (const auto& ref : *it) {
            if (!ref.is_object()) continue;
            ExternalReference r;
            r.source_name = ref.value("source_name", "");
            r.external_id = ref.value("external_id", "");
            r.url = ref.value("url", "");
            out.external_references.push_back(std::move(r));
        }
    }
    if (auto it = obj.find("kill_chain_phases"); it != obj.end() && it->is_array()) {
        for (const auto& phase : *it) {
            if (phase.is_object() && phase.contains("phase_name") && phase["phase_name"].is_string()) {
                out.kill_chain_phases.push_back(phase["phase_name"].get<std::string>());
            }
        }
    }
    if (out.type == "relationship" && (!out.source_ref || !out.target_ref)) {
        throw SchemaError("relationship " + out.id + " lacks source_ref or target_ref");
    }
    out.raw = obj;
    return out;
}

bool is_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

/// ATT&CK id carried by an attack-pattern, if any.
std::optional<std::string> attack_id_of(const StixObject& obj) {
    for (const auto& ref : obj.external_references) {
        if (ref.source_name == "mitre-attack" && !ref.external_id.empty()) {
            return ref.external_id;
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::string> StixObject::external_id(std::string_view source_name) const {
    for (const auto& ref : external_references) {
        if (ref.source_name == source_name && !ref.external_id.empty()) return ref.external_id;
    }
    return std::nullopt;
}

StixBundle::StixBundle(std::vector<StixObject> objects, json header)
    : objects_(std::move(objects)), header_(std::move(header)) {
    index_.reserve(objects_.size());
    for (std::size_t i = 0; i < objects_.size(); ++i) {
        if (!index_.emplace(objects_[i].id, i).second) {
            throw SchemaError("duplicate object id " + objects_[i].id);
        }
    }
}

const StixObject* StixBundle::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &objects_[it->second];
}

StixBundle parse_bundle(std::string_view raw_json) {
    json doc;
    try {
        doc = json::parse(raw_json);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw SchemaError("bundle must be a JSON object");
    }
    auto it = doc.find("objects");
    if (it == doc.end() || !it->is_array()) {
        throw SchemaError("bundle lacks a top-level 'objects' array");
    }
    std::vector<StixObject> objects;
    objects.reserve(it->size());
    for (std::size_t i = 0; i < it->size(); ++i) {
        objects.push_back(parse_object((*it)[i], i));
    }
    json header = doc;
    header.erase("objects");
    return StixBundle(std::move(objects), std::move(header));
}

StixBundle load_bundle(const std::filesystem::path& path) { return parse_bundle(read_file(path)); }

std::string serialize_bundle(const StixBundle& bundle) {
    json doc = bundle.header();
    if (!doc.is_object()) doc = json::object();
    json objects = json::array();
    for (const auto& obj : bundle.objects()) objects.push_back(obj.raw);
    doc["objects"] = std::move(objects);
    return doc.dump();
}

bool is_technique_id(std::string_view id) {
    return id.size() == 5 && id[0] == 'T' && is_digits(id.substr(1));
}

bool is_subtechnique_id(std::string_view id) {
    return id.size() == 9 && is_technique_id(id.substr(0, 5)) && id[5] == '.' && is_digits(id.substr(6));
}

std::string parent_technique_id(std::string_view id) {
    auto dot = id.find('.');
    return std::string(dot == std::string_view::npos ? id : id.substr(0, dot));
}

// ---------------------------------------------------------------------------
// TechniqueRegistry

TechniqueRegistry::TechniqueRegistry(std::vector<TechniqueRef> techniques,
                                     std::map<std::string, std::string> subtechnique_names)
    : techniques_(std::move(techniques)), subtech_names_(std::move(subtechnique_names)) {
    std::sort(techniques_.begin(), techniques_.end(),
              [](const TechniqueRef& a, const TechniqueRef& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < techniques_.size(); ++i) {
        const auto& id = techniques_[i].id;
        if (!is_technique_id(id)) {
            throw ArgumentError("not a parent technique id: " + id);
        }
        if (!by_id_.emplace(id, i).second) {
            throw ArgumentError("duplicate technique id " + id);
        }
    }
    for (const auto& [sub, name] : subtech_names_) {
        if (!is_subtechnique_id(sub)) {
            throw ArgumentError("not a sub-technique id: " + sub);
        }
        auto parent = parent_technique_id(sub);
        if (!by_id_.count(parent)) {
            throw ArgumentError("sub-technique " + sub + " has no registered parent");
        }
        subtech_parent_[sub] = parent;
    }
}

std::optional<std::size_t> TechniqueRegistry::index_of(std::string_view technique_id) const {
    auto it = by_id_.find(std::string(technique_id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> TechniqueRegistry::resolve(std::string_view id) const {
    if (is_technique_id(id)) {
        if (by_id_.count(std::string(id))) return std::string(id);
        return std::nullopt;
    }
    if (is_subtechnique_id(id)) {
        auto parent = parent_technique_id(id);
        if (by_id_.count(parent)) return parent;
    }
    return std::nullopt;
}

std::string TechniqueRegistry::name_of(std::string_view id) const {
    if (auto idx = index_of(id)) return techniques_[*idx].name;
    auto it = subtech_names_.find(std::string(id));
    return it == subtech_names_.end() ? std::string() : it->second;
}

std::string TechniqueRegistry::fingerprint() const {
    Fingerprint fp;
    fp.add(static_cast<std::uint64_t>(techniques_.size()));
    for (const auto& t : techniques_) fp.add(t.id);
    return fp.hex();
}

json TechniqueRegistry::to_json() const {
    json techniques = json::array();
    for (const auto& t : techniques_) {
        techniques.push_back({{"id", t.id}, {"name", t.name}, {"tactics", t.tactics}});
    }
    json subs = json::object();
    for (const auto& [sub, name] : subtech_names_) subs[sub] = name;
    return {{"format_version", 1},
            {"kind", "attackmap.registry"},
            {"fingerprint", fingerprint()},
            {"techniques", std::move(techniques)},
            {"subtechniques", std::move(subs)}};
}

TechniqueRegistry TechniqueRegistry::from_json(const json& doc) {
    try {
        if (doc.value("format_version", 0) != 1) {
            throw FormatError("unsupported registry format_version");
        }
        std::vector<TechniqueRef> techniques;
        for (const auto& t : doc.at("techniques")) {
            TechniqueRef ref;
            ref.id = t.at("id").get<std::string>();
            ref.name = t.value("name", "");
            const json tactics = t.value("tactics", json::array());
            for (const auto& tactic : tactics) ref.tactics.insert(tactic.get<std::string>());
            techniques.push_back(std::move(ref));
        }
        std::map<std::string, std::string> subs;
        const json sub_names = doc.value("subtechniques", json::object());
        for (const auto& [sub, name] : sub_names.items()) {
            subs[sub] = name.get<std::string>();
        }
        return TechniqueRegistry(std::move(techniques), std::move(subs));
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed registry document: ") + e.what());
    }
}

TechniqueRegistry load_registry(const std::filesystem::path& path) {
    auto text = read_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON in ") + path.string() + ": " + e.what());
    }
    if (doc.is_object() && doc.contains("objects")) {
        return build_registry(parse_bundle(text));
    }
    return TechniqueRegistry::from_json(doc);
}

// ---------------------------------------------------------------------------
// Samples

std::string_view to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::attack_pattern: return "attack_pattern";
        case SourceKind::relationship: return "relationship";
        case SourceKind::capec: return "capec";
    }
    return "attack_pattern";
}

std::optional<SourceKind> source_kind_from_string(std::string_view text) {
    if (text == "attack_pattern") return SourceKind::attack_pattern;
    if (text == "relationship") return SourceKind::relationship;
    if (text == "capec") return SourceKind::capec;
    return std::nullopt;
}

void IngestReport::warn(std::string message) { warnings.push_back(std::move(message)); }

json IngestReport::to_json() const {
    json c = json::object();
    for (const auto& [k, v] : counts) c[k] = v;
    return {{"counts", std::move(c)}, {"warnings", warnings}};
}

TechniqueRegistry build_registry(const StixBundle& bundle, IngestReport* report) {
    IngestReport scratch;
    IngestReport& rep = report ? *report : scratch;

    std::map<std::string, TechniqueRef> parents;
    std::map<std::string, std::string> subs;
    for (const auto& obj : bundle.objects()) {
        if (obj.type != "attack-pattern") continue;
        if (!obj.live()) {
            rep.bump(obj.revoked ? "attack_patterns_revoked" : "attack_patterns_deprecated");
            continue;
        }
        auto ext = attack_id_of(obj);
        if (!ext || !(is_technique_id(*ext) || is_subtechnique_id(*ext))) {
            rep.bump("attack_patterns_without_technique_id");
            rep.warn("attack-pattern " + obj.id + " has no T-prefixed ATT&CK id; skipped");
            continue;
        }
        if (is_subtechnique_id(*ext)) {
            subs[*ext] = obj.name.value_or("");
            continue;
        }
        TechniqueRef ref;
        ref.id = *ext;
        ref.name = obj.name.value_or("");
        ref.tactics.insert(obj.kill_chain_phases.begin(), obj.kill_chain_phases.end());
        if (ref.tactics.empty()) {
            rep.warn("technique " + ref.id + " has no tactics");
        }
        if (!parents.emplace(ref.id, ref).second) {
            rep.bump("attack_patterns_duplicate_id");
            rep.warn("duplicate live attack-pattern for " + ref.id + "; first kept");
        }
    }
    for (auto it = subs.begin(); it != subs.end();) {
        if (!parents.count(parent_technique_id(it->first))) {
            rep.bump("subtechniques_without_parent");
            rep.warn("sub-technique " + it->first + " has no live parent; skipped");
            it = subs.erase(it);
        } else {
            ++it;
        }
    }
    std::vector<TechniqueRef> refs;
    refs.reserve(parents.size());
    for (auto& [id, ref] : parents) refs.push_back(std::move(ref));
    rep.counts["techniques"] = refs.size();
    rep.counts["subtechniques"] = subs.size();
    return TechniqueRegistry(std::move(refs), std::move(subs));
}

namespace {

struct ResolvedPattern {
    std::string parent;
    std::optional<std::string> sub;
    std::string name;
};

std::optional<ResolvedPattern> resolve_pattern(const StixObject& obj, const TechniqueRegistry& registry) {
    if (obj.type != "attack-pattern" || !obj.live()) return std::nullopt;
    auto ext = attack_id_of(obj);
    if (!ext) return std::nullopt;
    auto parent = registry.resolve(*ext);
    if (!parent) return std::nullopt;
    if (is_subtechnique_id(*ext) && !registry.subtech_parent().count(*ext)) return std::nullopt;
    ResolvedPattern r;
    r.parent = *parent;
    if (is_subtechnique_id(*ext)) r.sub = *ext;
    r.name = obj.name.value_or(registry.name_of(*ext));
    return r;
}

bool has_text(const std::optional<std::string>& s) { return s && !trim(*s).empty(); }

}  // namespace

std::vector<RawSample> extract_samples(const StixBundle& bundle, const TechniqueRegistry& registry,
                                       IngestReport* report) {
    IngestReport scratch;
    IngestReport& rep = report ? *report : scratch;
    std::vector<RawSample> out;

    for (const auto& obj : bundle.objects()) {
        if (obj.type == "attack-pattern") {
            auto resolved = resolve_pattern(obj, registry);
            if (!resolved || !has_text(obj.description)) continue;
            out.push_back({*obj.description, resolved->parent, resolved->sub, resolved->name,
                           SourceKind::attack_pattern});
            rep.bump("samples_attack_pattern");
        } else if (obj.type == "relationship") {
            if (obj.relationship_type.value_or("") != "uses") continue;
            if (!obj.live()) {
                rep.bump("relationships_revoked");
                continue;
            }
            if (!has_text(obj.description)) {
                rep.bump("relationships_without_description");
                continue;
            }
            const StixObject* target = bundle.find(*obj.target_ref);
            if (!target || target->type != "attack-pattern") continue;
            auto resolved = resolve_pattern(*target, registry);
            if (!resolved) {
                rep.bump("relationships_target_not_in_registry");
                rep.warn("relationship " + obj.id + " targets " + *obj.target_ref + " which is not registered");
                continue;
            }
            out.push_back({*obj.description, resolved->parent, resolved->sub, resolved->name,
                           SourceKind::relationship});
            rep.bump("samples_relationship");
        }
    }
    return out;
}

std::vector<RawSample> enrich_with_capec(std::vector<RawSample> samples, const StixBundle& attack_bundle,
                                         const StixBundle& capec_bundle, const TechniqueRegistry& registry,
                                         IngestReport* report) {
    IngestReport scratch;
    IngestReport& rep = report ? *report : scratch;

    std::unordered_map<std::string, const StixObject*> capec_by_id;
    for (const auto& obj : capec_bundle.objects()) {
        if (obj.type != "attack-pattern" || !obj.live()) continue;
        if (auto cid = obj.external_id("capec")) capec_by_id.emplace(*cid, &obj);
    }
    for (const auto& obj : attack_bundle.objects()) {
        auto resolved = resolve_pattern(obj, registry);
        if (!resolved) continue;
        for (const auto& ref : obj.external_references) {
            if (ref.source_name != "capec" || ref.external_id.empty()) continue;
            auto it = capec_by_id.find(ref.external_id);
            if (it == capec_by_id.end()) {
                rep.bump("capec_dangling_references");
                rep.warn("technique " + resolved->sub.value_or(resolved->parent) + " references missing " +
                         ref.external_id);
                continue;
            }
            if (!has_text(it->second->description)) {
                rep.bump("capec_without_description");
                continue;
            }
            samples.push_back({*it->second->description, resolved->parent, resolved->sub, resolved->name,
                               SourceKind::capec});
            rep.bump("samples_capec");
        }
    }
    return samples;
}

json raw_samples_to_json(const std::vector<RawSample>& samples) {
    json arr = json::array();
    for (const auto& s : samples) {
        arr.push_back({{"text", s.text},
                       {"technique_id", s.technique_id},
                       {"subtechnique_id", s.subtechnique_id ? json(*s.subtechnique_id) : json(nullptr)},
                       {"technique_name", s.technique_name},
                       {"source_kind", to_string(s.source_kind)}});
    }
    return arr;
}

std::vector<RawSample> raw_samples_from_json(const json& doc) {
    std::vector<RawSample> out;
    try {
        for (const auto& s : doc) {
            RawSample r;
            r.text = s.at("text").get<std::string>();
            r.technique_id = s.at("technique_id").get<std::string>();
            if (s.contains("subtechnique_id") && s["subtechnique_id"].is_string()) {
                r.subtechnique_id = s["subtechnique_id"].get<std::string>();
            }
            r.technique_name = s.value("technique_name", "");
            auto kind = source_kind_from_string(s.value("source_kind", "attack_pattern"));
            if (!kind) throw SchemaError("unknown source_kind");
            r.source_kind = *kind;
            out.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed raw sample list: ") + e.what());
    }
    return out;
}

}  // namespace attackmap
