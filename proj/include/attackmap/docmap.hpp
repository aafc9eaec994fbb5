#pragma once

// Document-level technique mapping: per-sentence thresholding, set union,
// set-based metrics and threshold sweeps.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "attackmap/classifiers.hpp"
#include "attackmap/corpus.hpp"

namespace attackmap {

struct SentenceHits {
    std::size_t sentence_index = 0;
    /// (technique id, probability) with probability > theta, by descending
    /// probability then class order.
    std::vector<std::pair<std::string, double>> above;
};

struct DocumentPrediction {
    std::string doc_id;
    double theta = 0.2;
    std::vector<SentenceHits> per_sentence;
    std::set<std::string> predicted_set;

    nlohmann::json to_json() const;
};

struct DocMetrics {
    std::size_t n_cu = 0;
    std::size_t n_u = 0;
    std::size_t n_gt = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    nlohmann::json to_json() const;
};

/// Thresholds precomputed probability rows (one per sentence). Throws
/// ArgumentError for an empty row list or theta outside (0, 1).
DocumentPrediction predict_from_rows(std::string doc_id, const std::vector<std::vector<double>>& rows,
                                     const std::vector<std::string>& classes, double theta);

DocumentPrediction predict_document(const ClassifierModel& model, const std::vector<std::string>& sentences,
                                    double theta, std::string doc_id = {});

/// precision = N_CU / N_U (0 when N_U = 0), recall = N_CU / N_GT. Throws
/// ArgumentError when `truth` is empty.
DocMetrics doc_metrics(const std::set<std::string>& predicted, const std::set<std::string>& truth);
DocMetrics doc_metrics(const DocumentPrediction& prediction, const GroundTruthDocument& truth);

/// {0.1, 0.2, ..., 0.8}.
std::vector<double> default_grid();
/// "lo:hi:step" (inclusive) or a comma-separated list. Throws
/// ArgumentError for malformed text or an invalid grid.
std::vector<double> parse_grid(std::string_view text);
/// Non-empty, strictly increasing, inside (0, 1); throws ArgumentError.
void validate_grid(const std::vector<double>& grid);

struct SweepResult {
    std::string model_id;
    std::vector<double> grid;
    /// doc id -> metrics aligned with `grid`.
    std::map<std::string, std::vector<DocMetrics>> per_doc;
    /// Mean per-document F1 at each grid point.
    std::vector<double> macro_f1;
    double best_theta = 0.0;

    nlohmann::json to_json() const;
    /// Rows `doc_id,theta,precision,recall,f1`.
    std::string to_csv() const;
};

struct ScoredDocument {
    GroundTruthDocument truth;
    /// One probability row per sentence of truth.sentences.
    std::vector<std::vector<double>> rows;
};

SweepResult threshold_sweep(const std::vector<ScoredDocument>& docs, const std::vector<std::string>& classes,
                            const std::vector<double>& grid, std::string model_id = {});

/// Scores every sentence once, then sweeps.
std::vector<ScoredDocument> score_documents(const ClassifierModel& model, const std::vector<GroundTruthDocument>& docs);
SweepResult threshold_sweep(const ClassifierModel& model, const std::vector<GroundTruthDocument>& docs,
                            const std::vector<double>& grid, std::string model_id = {});

}  // namespace attackmap
