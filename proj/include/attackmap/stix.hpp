#pragma once

// STIX 2.x bundle parsing and extraction of ATT&CK technique metadata and
// description samples.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace attackmap {

struct ExternalReference {
    std::string source_name;
    std::string external_id;
    std::string url;
};

struct StixObject {
    std::string id;
    std::string type;
    std::optional<std::string> name;
    std::optional<std::string> description;
    std::vector<ExternalReference> external_references;
    std::vector<std::string> kill_chain_phases;
    std::optional<std::string> relationship_type;
    std::optional<std::string> source_ref;
    std::optional<std::string> target_ref;
    bool revoked = false;
    bool deprecated = false;
    /// The object as it appeared in the input, kept for re-serialization.
    nlohmann::json raw;

    bool live() const noexcept { return !revoked && !deprecated; }
    /// First external id whose source is `source_name`.
    std::optional<std::string> external_id(std::string_view source_name) const;
};

class StixBundle {
public:
    StixBundle() = default;
    explicit StixBundle(std::vector<StixObject> objects, nlohmann::json header = nlohmann::json::object());

    const std::vector<StixObject>& objects() const noexcept { return objects_; }
    std::size_t size() const noexcept { return objects_.size(); }
    const StixObject* find(std::string_view id) const;
    /// Top-level bundle members other than `objects` (type, id, spec_version).
    const nlohmann::json& header() const noexcept { return header_; }

private:
    std::vector<StixObject> objects_;
    std::unordered_map<std::string, std::size_t> index_;
    nlohmann::json header_;
};

/// Throws ParseError on malformed JSON and SchemaError on a missing
/// `objects` array, objects without id/type, relationships without
/// endpoints, or duplicate ids.
StixBundle parse_bundle(std::string_view raw_json);
StixBundle load_bundle(const std::filesystem::path& path);
std::string serialize_bundle(const StixBundle& bundle);

bool is_technique_id(std::string_view id);
bool is_subtechnique_id(std::string_view id);
/// "T1059.001" -> "T1059"; parent ids are returned unchanged.
std::string parent_technique_id(std::string_view id);

struct TechniqueRef {
    std::string id;
    std::string name;
    std::set<std::string> tactics;
};

/// The label space: parent techniques ordered by id. Class index i always
/// refers to techniques()[i].
class TechniqueRegistry {
public:
    TechniqueRegistry() = default;
    /// Sorts `techniques` by id; throws ArgumentError on malformed or
    /// duplicate ids or a sub-technique whose parent is missing.
    TechniqueRegistry(std::vector<TechniqueRef> techniques,
                      std::map<std::string, std::string> subtechnique_names = {});

    std::size_t size() const noexcept { return techniques_.size(); }
    bool empty() const noexcept { return techniques_.empty(); }
    const std::vector<TechniqueRef>& techniques() const noexcept { return techniques_; }
    const TechniqueRef& at(std::size_t index) const { return techniques_.at(index); }
    std::optional<std::size_t> index_of(std::string_view technique_id) const;
    bool contains(std::string_view technique_id) const { return index_of(technique_id).has_value(); }

    /// Sub-technique id -> parent id.
    const std::map<std::string, std::string>& subtech_parent() const noexcept { return subtech_parent_; }
    /// Resolves a parent or known sub-technique id to its parent class id.
    /// Unknown sub-techniques of a known parent also resolve.
    std::optional<std::string> resolve(std::string_view id) const;
    /// Name of a technique or sub-technique, empty when unknown.
    std::string name_of(std::string_view id) const;

    std::string fingerprint() const;

    nlohmann::json to_json() const;
    static TechniqueRegistry from_json(const nlohmann::json& doc);

private:
    std::vector<TechniqueRef> techniques_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::map<std::string, std::string> subtech_parent_;
    std::map<std::string, std::string> subtech_names_;
};

/// Loads either a registry JSON document or a STIX bundle.
TechniqueRegistry load_registry(const std::filesystem::path& path);

enum class SourceKind { attack_pattern, relationship, capec };
std::string_view to_string(SourceKind kind);
std::optional<SourceKind> source_kind_from_string(std::string_view text);

struct RawSample {
    std::string text;
    std::string technique_id;
    std::optional<std::string> subtechnique_id;
    std::string technique_name;
    SourceKind source_kind = SourceKind::attack_pattern;

    bool operator==(const RawSample&) const = default;
};

/// Counts of skipped or dangling items plus human-readable warnings.
struct IngestReport {
    std::map<std::string, std::size_t> counts;
    std::vector<std::string> warnings;

    void bump(const std::string& key, std::size_t by = 1) { counts[key] += by; }
    void warn(std::string message);
    nlohmann::json to_json() const;
};

TechniqueRegistry build_registry(const StixBundle& bundle, IngestReport* report = nullptr);

/// One sample per live attack-pattern description and one per described
/// `uses` relationship targeting a registered technique, in bundle order.
std::vector<RawSample> extract_samples(const StixBundle& bundle, const TechniqueRegistry& registry,
                                       IngestReport* report = nullptr);

/// Appends CAPEC descriptions referenced by the ATT&CK attack-patterns in
/// `attack_bundle`, labeled with the referencing technique.
std::vector<RawSample> enrich_with_capec(std::vector<RawSample> samples, const StixBundle& attack_bundle,
                                         const StixBundle& capec_bundle, const TechniqueRegistry& registry,
                                         IngestReport* report = nullptr);

nlohmann::json raw_samples_to_json(const std::vector<RawSample>& samples);
std::vector<RawSample> raw_samples_from_json(const nlohmann::json& doc);

}  // namespace attackmap
