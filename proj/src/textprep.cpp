#include "attackmap/textprep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "attackmap/errors.hpp"
#include "attackmap/util.hpp"

namespace attackmap {

using nlohmann::json;

namespace {

#include "stopwords_en_v1.inc"

std::unordered_set<std::string> parse_stopwords(std::string_view text) {
    std::unordered_set<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto word = trim(line);
        if (word.empty() || word[0] == '#') continue;
        out.insert(to_lower_ascii(word));
    }
    return out;
}

bool is_alnum_ascii(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

}  // namespace

const std::unordered_set<std::string>& stopword_list(std::string_view id) {
    static const std::unordered_set<std::string> en_v1 = parse_stopwords(kStopwordsEnV1);
    static const std::unordered_set<std::string> none;
    if (id == "en-v1") return en_v1;
    if (id == "none") return none;
    throw ArgumentError("unknown stopword list '" + std::string(id) + "'");
}

Tokens normalize_tokens(std::string_view text, const PrepConfig& cfg) {
    if (cfg.min_token_len < 1) {
        throw ArgumentError("min_token_len must be at least 1");
    }
    const auto& stopwords = stopword_list(cfg.stopword_list_id);
    Tokens out;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (current.size() >= cfg.min_token_len && !stopwords.count(to_lower_ascii(current))) {
            out.push_back(cfg.stem ? porter_stem(current) : current);
        }
        current.clear();
    };
    for (char c : text) {
        if (is_alnum_ascii(c)) {
            current.push_back(cfg.lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

// ---------------------------------------------------------------------------

double FeatureVector::dot(std::span<const double> dense) const {
    double s = 0.0;
    for (const auto& e : entries) s += e.weight * dense[e.index];
    return s;
}

double FeatureVector::squared_norm() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.weight * e.weight;
    return s;
}

TfidfModel::TfidfModel(VectorizerConfig config, std::vector<std::string> terms, std::vector<double> idf,
                       std::string fitted_on)
    : config_(config), terms_(std::move(terms)), idf_(std::move(idf)), fitted_on_(std::move(fitted_on)) {
    if (terms_.size() != idf_.size()) {
        throw FormatError("vocabulary and idf lengths differ");
    }
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i > 0 && !(terms_[i - 1] < terms_[i])) {
            throw FormatError("vocabulary must be strictly ascending");
        }
        index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
    }
}

std::int64_t TfidfModel::index_of(std::string_view term) const {
    auto it = index_.find(std::string(term));
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

json TfidfModel::to_json() const {
    return {{"config",
             {{"ngram_min", config_.ngram_min},
              {"ngram_max", config_.ngram_max},
              {"max_features", config_.max_features},
              {"sublinear_tf", config_.sublinear_tf},
              {"l2_normalize", config_.l2_normalize},
              {"idf_smoothing", "add-one"}}},
            {"vocabulary", terms_},
            {"idf", format_decimals(idf_)},
            {"fitted_on", fitted_on_}};
}

TfidfModel TfidfModel::from_json(const json& doc) {
    const auto& c = doc.at("config");
    VectorizerConfig cfg;
    cfg.ngram_min = c.at("ngram_min").get<std::size_t>();
    cfg.ngram_max = c.at("ngram_max").get<std::size_t>();
    cfg.max_features = c.at("max_features").get<std::size_t>();
    cfg.sublinear_tf = c.at("sublinear_tf").get<bool>();
    cfg.l2_normalize = c.at("l2_normalize").get<bool>();
    return TfidfModel(cfg, doc.at("vocabulary").get<std::vector<std::string>>(),
                      parse_decimals(doc.at("idf").get<std::vector<std::string>>()),
                      doc.value("fitted_on", ""));
}

std::vector<std::string> ngrams(const Tokens& tokens, std::size_t ngram_min, std::size_t ngram_max) {
    std::vector<std::string> out;
    for (std::size_t n = ngram_min; n <= ngram_max; ++n) {
        if (n == 0 || tokens.size() < n) continue;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string gram = tokens[i];
            for (std::size_t k = 1; k < n; ++k) {
                gram.push_back(' ');
                gram += tokens[i + k];
            }
            out.push_back(std::move(gram));
        }
    }
    return out;
}

double smoothed_idf(std::size_t n_documents, std::size_t document_frequency) {
    return std::log((1.0 + static_cast<double>(n_documents)) / (1.0 + static_cast<double>(document_frequency))) + 1.0;
}

TfidfModel fit_vectorizer(const std::vector<Tokens>& token_lists, const VectorizerConfig& cfg) {
    if (cfg.ngram_min < 1 || cfg.ngram_min > cfg.ngram_max) {
        throw FitError("require 1 <= ngram_min <= ngram_max");
    }
    if (cfg.max_features < 1) {
        throw FitError("max_features must be at least 1");
    }
    struct Stat {
        std::size_t total = 0;
        std::size_t df = 0;
        std::size_t last_doc = static_cast<std::size_t>(-1);
    };
    std::unordered_map<std::string, Stat> stats;
    Fingerprint fp;
    bool any = false;
    for (std::size_t d = 0; d < token_lists.size(); ++d) {
        fp.add(static_cast<std::uint64_t>(token_lists[d].size()));
        for (const auto& t : token_lists[d]) fp.add(t);
        for (auto& gram : ngrams(token_lists[d], cfg.ngram_min, cfg.ngram_max)) {
            any = true;
            auto& s = stats[gram];
            ++s.total;
            if (s.last_doc != d) {
                ++s.df;
                s.last_doc = d;
            }
        }
    }
    if (!any) {
        throw FitError("cannot fit a vectorizer on empty documents");
    }

    std::vector<std::pair<std::string, Stat>> candidates(stats.begin(), stats.end());
    auto by_count = [](const auto& a, const auto& b) {
        if (a.second.total != b.second.total) return a.second.total > b.second.total;
        return a.first < b.first;
    };
    if (candidates.size() > cfg.max_features) {
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(cfg.max_features),
                          candidates.end(), by_count);
        candidates.resize(cfg.max_features);
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::string> terms;
    std::vector<double> idf;
    terms.reserve(candidates.size());
    idf.reserve(candidates.size());
    for (auto& [term, s] : candidates) {
        terms.push_back(std::move(term));
        idf.push_back(smoothed_idf(token_lists.size(), s.df));
    }
    return TfidfModel(cfg, std::move(terms), std::move(idf), fp.hex());
}

FeatureVector vectorize(const TfidfModel& model, const Tokens& tokens) {
    std::map<std::uint32_t, std::size_t> counts;
    for (const auto& gram : ngrams(tokens, model.config().ngram_min, model.config().ngram_max)) {
        auto idx = model.index_of(gram);
        if (idx >= 0) ++counts[static_cast<std::uint32_t>(idx)];
    }
    FeatureVector v;
    v.dim = model.dim();
    v.entries.reserve(counts.size());
    for (const auto& [idx, tf] : counts) {
        double t = model.config().sublinear_tf ? 1.0 + std::log(static_cast<double>(tf)) : static_cast<double>(tf);
        v.entries.push_back({idx, t * model.idf()[idx]});
    }
    if (model.config().l2_normalize) {
        double norm = std::sqrt(v.squared_norm());
        if (norm > 0.0) {
            for (auto& e : v.entries) e.weight /= norm;
        }
    }
    return v;
}

}  // namespace attackmap
