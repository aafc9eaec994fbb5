#pragma once

// Multi-class text classifiers over TF-IDF features and their model bundle
// format.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "attackmap/corpus.hpp"
#include "attackmap/textprep.hpp"

namespace attackmap {

enum class ClassifierKind { multinomial_nb, complement_nb, logreg, linsvm_ovr, linsvm_ovo, mlp };

std::string_view to_string(ClassifierKind kind);
/// Accepts the canonical names above; throws ArgumentError otherwise.
ClassifierKind classifier_kind_from_string(std::string_view text);

/// Kind, class balancing, seed and a complete hyperparameter map. Defaults
/// for the kind are filled in at construction; unknown keys are rejected.
class ClassifierSpec {
public:
    ClassifierSpec() : ClassifierSpec(ClassifierKind::complement_nb) {}
    explicit ClassifierSpec(ClassifierKind kind, bool balanced = false, std::uint64_t seed = 0,
                            const std::map<std::string, double>& overrides = {});

    ClassifierKind kind() const noexcept { return kind_; }
    bool balanced() const noexcept { return balanced_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::map<std::string, double>& hyperparams() const noexcept { return hyperparams_; }
    double hp(const std::string& key) const;

    static std::map<std::string, double> defaults(ClassifierKind kind);

    nlohmann::json to_json() const;
    static ClassifierSpec from_json(const nlohmann::json& doc);

    bool operator==(const ClassifierSpec&) const = default;

private:
    ClassifierKind kind_;
    bool balanced_;
    std::uint64_t seed_;
    std::map<std::string, double> hyperparams_;
};

struct ClassWeights {
    std::vector<double> weights;
};

/// Balanced: w_c = N / (C * n_c) over the C present classes, 0 for absent
/// classes. Unbalanced: all 1.0. Throws ArgumentError if every count is 0.
ClassWeights compute_class_weights(const std::vector<std::size_t>& class_counts, bool balanced);

/// Row-major dense array.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    bool operator==(const Matrix&) const = default;
};

using ParameterSet = std::map<std::string, Matrix>;

/// Everything a model needs besides its fitted parameters.
struct ModelContext {
    std::vector<std::string> classes;
    std::string registry_fingerprint;
    PrepConfig prep;
    TfidfModel tfidf;
    /// Provenance recorded in the bundle (input fingerprints etc.).
    nlohmann::json provenance = nlohmann::json::object();
};

class ClassifierModel {
public:
    static constexpr int kFormatVersion = 1;

    ClassifierModel(ClassifierSpec spec, ModelContext context, ParameterSet parameters);

    const ClassifierSpec& spec() const noexcept { return spec_; }
    const std::vector<std::string>& classes() const noexcept { return context_.classes; }
    std::size_t n_classes() const noexcept { return context_.classes.size(); }
    const std::string& registry_fingerprint() const noexcept { return context_.registry_fingerprint; }
    const PrepConfig& prep() const noexcept { return context_.prep; }
    const TfidfModel& tfidf() const noexcept { return context_.tfidf; }
    const nlohmann::json& provenance() const noexcept { return context_.provenance; }
    const ParameterSet& parameters() const noexcept { return parameters_; }
    const Matrix& parameter(const std::string& name) const;
    /// Number of binary sub-models (OvR: classes, OvO: present pairs).
    std::size_t binary_model_count() const;

    nlohmann::json to_json() const;
    static ClassifierModel from_json(const nlohmann::json& doc);

private:
    void validate() const;

    ClassifierSpec spec_;
    ModelContext context_;
    ParameterSet parameters_;
};

/// Loss after each accepted step (logreg) or each epoch (mlp).
struct TrainingTrace {
    std::vector<double> losses;
    std::size_t epochs = 0;
};

/// Throws TrainError on empty input, label/feature count mismatch, a label
/// outside [0, |classes|) or a feature dimension different from the tfidf
/// vocabulary size.
ClassifierModel train(const std::vector<FeatureVector>& features, const std::vector<std::size_t>& labels,
                      const ClassifierSpec& spec, ModelContext context, TrainingTrace* trace = nullptr);

/// Normalizes, fits the vectorizer on `corpus` and trains.
ClassifierModel train_text_classifier(const LabeledCorpus& corpus, const ClassifierSpec& spec,
                                      const PrepConfig& prep = {}, const VectorizerConfig& vcfg = {});

/// One probability per class in model class order; sums to 1.
std::vector<double> predict_proba(const ClassifierModel& model, const FeatureVector& x);
std::vector<double> predict_text(const ClassifierModel& model, std::string_view text);
FeatureVector featurize(const ClassifierModel& model, std::string_view text);

using RankedClasses = std::vector<std::pair<std::size_t, double>>;

/// Descending probability, ties by ascending class index. Throws
/// ArgumentError unless 1 <= k <= probs.size().
RankedClasses top_k(const std::vector<double>& probs, std::size_t k);
RankedClasses predict_top_k(const ClassifierModel& model, const FeatureVector& x, std::size_t k);
std::size_t argmax(const std::vector<double>& probs);
/// Predicted class. OvO models vote (ties by summed margin, then lowest
/// index); every other kind takes the argmax of predict_proba.
std::size_t predict_label(const ClassifierModel& model, const FeatureVector& x);

void save_model(const ClassifierModel& model, const std::filesystem::path& path);
std::string serialize_model(const ClassifierModel& model);
/// Throws ParseError for unreadable JSON and FormatError for a
/// format_version mismatch or inconsistent parameters.
ClassifierModel load_model(const std::filesystem::path& path);
ClassifierModel parse_model(std::string_view text);

/// The registry recorded at training time, or one holding only the class ids
/// when the bundle carries none (or a copy that does not match).
TechniqueRegistry registry_of_model(const ClassifierModel& model);

}  // namespace attackmap
