#pragma once

// Sentence-level metrics, misprediction analysis and import of externally
// produced probability rows.

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "attackmap/classifiers.hpp"
#include "attackmap/corpus.hpp"
#include "attackmap/stix.hpp"

namespace attackmap {

struct ConfusionCounts {
    std::vector<std::size_t> tp;
    std::vector<std::size_t> fp;
    std::vector<std::size_t> fn;
    std::vector<std::size_t> support;
    /// (true class, predicted class) -> count, off-diagonal and diagonal.
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> pairs;
    std::size_t n_samples = 0;
};

/// Throws ArgumentError on empty input, length mismatch or a label outside
/// [0, n_classes).
ConfusionCounts confusion(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                          std::size_t n_classes);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    /// False when the metric's denominator was 0 and the value is the 0 default.
    bool precision_defined = false;
    bool recall_defined = false;
};

struct EvalReport {
    std::string model_id;
    std::size_t n_samples = 0;
    std::vector<std::string> classes;
    std::vector<ClassMetrics> per_class;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    std::map<std::size_t, double> ac_at_k;
    ConfusionCounts counts;

    nlohmann::json to_json() const;
};

/// Top-1 prediction is the argmax with ties to the lowest class index.
/// AC@k counts samples whose true class is among top_k(row, k).
EvalReport classification_report(const std::vector<std::size_t>& truth,
                                  const std::vector<std::vector<double>>& proba_rows,
                                  const std::vector<std::string>& classes, const std::vector<std::size_t>& k_values,
                                  std::string model_id = {});

/// Fraction of samples whose true class is among the k highest rows entries.
double accuracy_at_k(const std::vector<std::size_t>& truth, const std::vector<std::vector<double>>& proba_rows,
                     std::size_t k);

struct Misprediction {
    std::string text;
    std::string true_id;
    std::string predicted_id;
    std::string true_name;
    std::string predicted_name;
    std::set<std::string> true_tactics;
    std::set<std::string> predicted_tactics;
    bool same_tactic = false;
};

/// One record per sample whose predicted class differs from the truth.
std::vector<Misprediction> collect_mispredictions(const std::vector<std::string>& texts,
                                                  const std::vector<std::size_t>& truth,
                                                  const std::vector<std::size_t>& predicted,
                                                  const TechniqueRegistry& registry);

/// Header `text,true_id,pred_id,true_name,pred_name,same_tactic`.
std::string mispredictions_csv(const std::vector<Misprediction>& rows);

struct TacticAgreement {
    double fraction = 0.0;
    std::size_t same = 0;
    std::size_t total = 0;
    bool empty = true;
    nlohmann::json to_json() const;
};

TacticAgreement tactic_agreement(const std::vector<Misprediction>& mispredictions);

/// Probability rows aligned to `label_order`.
struct ExternalPredictions {
    std::vector<std::string> label_order;
    std::vector<std::vector<double>> rows;
};

/// Header line is a JSON array of technique ids; each further non-blank
/// line holds one space-separated decimal per header id. Rows come back in
/// registry class order, with absent classes at 0 and each row rescaled to
/// sum to 1. Throws ImportError for ids outside the registry, ParseError
/// for malformed lines and ValidationError (with the 1-based row number)
/// for a wrong arity, a negative entry or a row sum off by more than 1e-2.
ExternalPredictions parse_predictions(std::string_view text, const TechniqueRegistry& registry);
ExternalPredictions import_predictions(const std::filesystem::path& path, const TechniqueRegistry& registry);
std::string format_predictions(const std::vector<std::string>& label_order,
                               const std::vector<std::vector<double>>& rows);

/// Scores every sample of `test` with `model`.
std::vector<std::vector<double>> predict_corpus(const ClassifierModel& model, const LabeledCorpus& test);

struct ModelEvaluation {
    EvalReport report;
    std::vector<Misprediction> mispredictions;
    TacticAgreement agreement;
    nlohmann::json to_json() const;
};

/// Evaluates proba rows against a labeled corpus, including misprediction
/// and tactic analysis. Throws ArgumentError on a row count mismatch.
ModelEvaluation evaluate_rows(const LabeledCorpus& test, const std::vector<std::vector<double>>& rows,
                              const std::vector<std::size_t>& k_values, std::string model_id);
ModelEvaluation evaluate_model(const ClassifierModel& model, const LabeledCorpus& test,
                               const std::vector<std::size_t>& k_values, std::string model_id);

}  // namespace attackmap
