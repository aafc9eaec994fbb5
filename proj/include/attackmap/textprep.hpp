#pragma once

// Token normalization and TF-IDF feature extraction.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace attackmap {

using Tokens = std::vector<std::string>;

struct PrepConfig {
    bool lowercase = true;
    std::string stopword_list_id = "en-v1";
    bool stem = true;
    std::size_t min_token_len = 2;
};

/// Pinned stopword lists by id ("en-v1", or "none" for an empty list).
/// Throws ArgumentError for an unknown id.
const std::unordered_set<std::string>& stopword_list(std::string_view id);

std::string porter_stem(std::string_view word);

/// lowercase -> split on non-alphanumeric runs -> drop short tokens ->
/// drop stopwords -> Porter stem. Order is preserved.
Tokens normalize_tokens(std::string_view text, const PrepConfig& cfg = {});

struct VectorizerConfig {
    std::size_t ngram_min = 1;
    std::size_t ngram_max = 2;
    std::size_t max_features = 10000;
    bool sublinear_tf = false;
    bool l2_normalize = true;
};

/// Sparse vector with strictly ascending indices.
struct FeatureVector {
    struct Entry {
        std::uint32_t index;
        double weight;
        bool operator==(const Entry&) const = default;
    };
    std::vector<Entry> entries;
    std::size_t dim = 0;

    bool empty() const noexcept { return entries.empty(); }
    double dot(std::span<const double> dense) const;
    double squared_norm() const;
    bool operator==(const FeatureVector&) const = default;
};

/// Fitted vocabulary and idf weights. Vocabulary indices follow ascending
/// term order.
class TfidfModel {
public:
    TfidfModel() = default;
    TfidfModel(VectorizerConfig config, std::vector<std::string> terms, std::vector<double> idf,
               std::string fitted_on);

    const VectorizerConfig& config() const noexcept { return config_; }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    const std::vector<double>& idf() const noexcept { return idf_; }
    const std::string& fitted_on() const noexcept { return fitted_on_; }
    std::size_t dim() const noexcept { return terms_.size(); }
    /// Index of `term`, or -1 when out of vocabulary.
    std::int64_t index_of(std::string_view term) const;

    nlohmann::json to_json() const;
    static TfidfModel from_json(const nlohmann::json& doc);

private:
    VectorizerConfig config_;
    std::vector<std::string> terms_;
    std::vector<double> idf_;
    std::string fitted_on_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// All n-grams of `tokens` for n in [ngram_min, ngram_max], joined by one space.
std::vector<std::string> ngrams(const Tokens& tokens, std::size_t ngram_min, std::size_t ngram_max);

/// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
double smoothed_idf(std::size_t n_documents, std::size_t document_frequency);

/// Throws FitError when every token list is empty or the config is invalid.
TfidfModel fit_vectorizer(const std::vector<Tokens>& token_lists, const VectorizerConfig& cfg = {});

FeatureVector vectorize(const TfidfModel& model, const Tokens& tokens);

}  // namespace attackmap
