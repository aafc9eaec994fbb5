#pragma once

// Cleaning, sentence splitting and the labeled-corpus value type with its
// CSV / TRAM import paths, merge and stratified split.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "attackmap/stix.hpp"

namespace attackmap {

struct AttackSample {
    std::string text;
    std::string technique_id;
    std::optional<std::string> subtechnique_id;
    std::string technique_name;
    /// Absent for samples imported from CSV or TRAM.
    std::optional<SourceKind> source_kind;
};

/// Equality over the persisted columns (text, ids, name).
bool same_content(const AttackSample& a, const AttackSample& b);

struct CorpusStats {
    std::size_t n_samples = 0;
    std::size_t n_classes_present = 0;
    std::map<std::string, std::size_t> class_counts;
};

class LabeledCorpus {
public:
    /// Throws ArgumentError if a sample label is not a registry class or a
    /// sample text is empty.
    LabeledCorpus(std::vector<AttackSample> samples, std::shared_ptr<const TechniqueRegistry> registry);

    const std::vector<AttackSample>& samples() const noexcept { return samples_; }
    const TechniqueRegistry& registry() const noexcept { return *registry_; }
    const std::shared_ptr<const TechniqueRegistry>& registry_ptr() const noexcept { return registry_; }
    const CorpusStats& stats() const noexcept { return stats_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    /// Class index of every sample in registry order.
    std::vector<std::size_t> labels() const;
    /// Per-class sample counts over the whole registry.
    std::vector<std::size_t> class_count_vector() const;
    std::vector<std::string> texts() const;
    std::string fingerprint() const;

    LabeledCorpus subset(const std::vector<std::size_t>& indices) const;

    /// Content equality: same registry fingerprint and pairwise same_content.
    bool operator==(const LabeledCorpus& other) const;

private:
    std::vector<AttackSample> samples_;
    std::shared_ptr<const TechniqueRegistry> registry_;
    CorpusStats stats_;
};

struct SplitPair {
    LabeledCorpus train;
    LabeledCorpus test;
    std::uint64_t seed = 0;
    double ratio = 0.8;
    /// Positions in the source corpus, ascending.
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

struct GroundTruthDocument {
    std::string doc_id;
    std::string title;
    std::string source_url;
    std::vector<std::string> sentences;
    /// Parent technique ids.
    std::set<std::string> techniques;
};

/// Removes citation markers, markdown link syntax (keeping the link text),
/// HTML tags and bare URLs, then collapses whitespace.
std::string clean_text(std::string_view raw);

/// Rule-based sentence splitter; see corpus.cpp for the boundary rules.
std::vector<std::string> split_sentences(std::string_view text);

/// Throws EmptyCorpusError when nothing survives cleaning.
LabeledCorpus build_dataset(const std::vector<RawSample>& raw, std::shared_ptr<const TechniqueRegistry> registry);

std::string export_csv_string(const LabeledCorpus& corpus);
void export_csv(const LabeledCorpus& corpus, const std::filesystem::path& path);
LabeledCorpus import_csv_string(std::string_view text, std::shared_ptr<const TechniqueRegistry> registry);
LabeledCorpus import_csv(const std::filesystem::path& path, std::shared_ptr<const TechniqueRegistry> registry);

/// Registry synthesized from the labels and names found in a dataset CSV,
/// for callers that have no STIX-derived registry at hand.
TechniqueRegistry registry_from_csv(const std::filesystem::path& path);

struct ImportReport {
    std::size_t records = 0;
    std::size_t accepted = 0;
    /// (record position, technique id) pairs rejected as unknown.
    std::vector<std::pair<std::size_t, std::string>> rejected;
    nlohmann::json to_json() const;
};

/// Accepts a TRAM export: either a top-level array of records or an object
/// with a `sentences` array. Each record carries `text` (or `sentence`) and
/// either `mappings: [{attack_id}]` or a single `attack_id`/`technique_id`.
/// A record with several mappings yields one sample per mapping.
LabeledCorpus import_tram_string(std::string_view text, std::shared_ptr<const TechniqueRegistry> registry,
                                 ImportReport* report = nullptr);
LabeledCorpus import_tram(const std::filesystem::path& path, std::shared_ptr<const TechniqueRegistry> registry,
                          ImportReport* report = nullptr);

/// Concatenation (a then b); throws MergeError on differing registries.
LabeledCorpus merge(const LabeledCorpus& a, const LabeledCorpus& b);

/// Per class, floor(n_c * (1 - ratio)) samples go to test, chosen uniformly
/// within the class from `seed`; singleton classes stay in train.
SplitPair stratified_split(const LabeledCorpus& corpus, double ratio, std::uint64_t seed);

GroundTruthDocument ground_truth_from_json(const nlohmann::json& doc, const TechniqueRegistry& registry);
GroundTruthDocument load_ground_truth(const std::filesystem::path& path, const TechniqueRegistry& registry);
nlohmann::json ground_truth_to_json(const GroundTruthDocument& doc);

}  // namespace attackmap
