#include "attackmap/docmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "attackmap/errors.hpp"
#include "attackmap/util.hpp"

namespace attackmap {

using nlohmann::json;

namespace {

void check_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw ArgumentError("threshold must lie in (0, 1), got " + format_decimal(theta));
}

/// Rounds to 12 decimals so that "0.1:0.8:0.1" yields the literals 0.3, 0.7.
double snap(double v) { return std::round(v * 1e12) / 1e12; }

std::string theta_label(double theta) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", theta);
    return buf;
}

}  // namespace

DocumentPrediction predict_from_rows(std::string doc_id, const std::vector<std::vector<double>>& rows,
                                     const std::vector<std::string>& classes, double theta) {
    check_theta(theta);
    if (rows.empty()) throw ArgumentError("document '" + doc_id + "' has no sentences");
    DocumentPrediction p;
    p.doc_id = std::move(doc_id);
    p.theta = theta;
    for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s].size() != classes.size()) throw ArgumentError("probability row length differs from class count");
        SentenceHits hits{s, {}};
        std::vector<std::size_t> idx;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            if (rows[s][c] > theta) idx.push_back(c);
        }
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rows[s][a] > rows[s][b]; });
        for (auto c : idx) {
            hits.above.emplace_back(classes[c], rows[s][c]);
            p.predicted_set.insert(classes[c]);
        }
        if (!hits.above.empty()) p.per_sentence.push_back(std::move(hits));
    }
    return p;
}

DocumentPrediction predict_document(const ClassifierModel& model, const std::vector<std::string>& sentences,
                                    double theta, std::string doc_id) {
    check_theta(theta);
    if (sentences.empty()) throw ArgumentError("document has no sentences");
    std::vector<std::vector<double>> rows;
    rows.reserve(sentences.size());
    for (const auto& s : sentences) rows.push_back(predict_text(model, s));
    return predict_from_rows(std::move(doc_id), rows, model.classes(), theta);
}

json DocumentPrediction::to_json() const {
    json sentences = json::array();
    for (const auto& h : per_sentence) {
        json above = json::array();
        for (const auto& [id, prob] : h.above) above.push_back({{"technique_id", id}, {"probability", prob}});
        sentences.push_back({{"sentence_index", h.sentence_index}, {"above_threshold", above}});
    }
    return {{"doc_id", doc_id}, {"theta", theta}, {"per_sentence", sentences}, {"predicted_set", predicted_set}};
}

DocMetrics doc_metrics(const std::set<std::string>& predicted, const std::set<std::string>& truth) {
    if (truth.empty()) throw ArgumentError("ground truth technique set is empty");
    DocMetrics m;
    m.n_u = predicted.size();
    m.n_gt = truth.size();
    for (const auto& t : predicted) m.n_cu += truth.count(t);
    m.precision = m.n_u == 0 ? 0.0 : static_cast<double>(m.n_cu) / static_cast<double>(m.n_u);
    m.recall = static_cast<double>(m.n_cu) / static_cast<double>(m.n_gt);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

DocMetrics doc_metrics(const DocumentPrediction& prediction, const GroundTruthDocument& truth) {
    return doc_metrics(prediction.predicted_set, truth.techniques);
}

json DocMetrics::to_json() const {
    return {{"n_cu", n_cu}, {"n_u", n_u}, {"n_gt", n_gt}, {"precision", precision}, {"recall", recall}, {"f1", f1}};
}

// ---------------------------------------------------------------------------

std::vector<double> default_grid() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}; }

void validate_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw ArgumentError("threshold grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        check_theta(grid[i]);
        if (i > 0 && !(grid[i - 1] < grid[i])) throw ArgumentError("threshold grid must be strictly increasing");
    }
}

std::vector<double> parse_grid(std::string_view text) {
    std::vector<double> grid;
    auto number = [](std::string_view s) {
        try {
            return parse_decimal(trim(s));
        } catch (const ParseError&) {
            throw ArgumentError("'" + std::string(s) + "' is not a number");
        }
    };
    if (text.find(':') != std::string_view::npos) {
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        for (std::size_t pos; (pos = text.find(':', start)) != std::string_view::npos; start = pos + 1) {
            parts.push_back(text.substr(start, pos - start));
        }
        parts.push_back(text.substr(start));
        if (parts.size() != 3) throw ArgumentError("grid range must look like lo:hi:step");
        const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
        if (!(step > 0.0) || hi < lo) throw ArgumentError("grid range needs step > 0 and hi >= lo");
        const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) grid.push_back(snap(lo + static_cast<double>(i) * step));
    } else {
        std::size_t start = 0;
        while (start <= text.size()) {
            auto pos = text.find(',', start);
            if (pos == std::string_view::npos) pos = text.size();
            grid.push_back(number(text.substr(start, pos - start)));
            start = pos + 1;
        }
    }
    validate_grid(grid);
    return grid;
}

SweepResult threshold_sweep(const std::vector<ScoredDocument>& docs, const std::vector<std::string>& classes,
                            const std::vector<double>& grid, std::string model_id) {
    validate_grid(grid);
    if (docs.empty()) throw ArgumentError("no documents to sweep");
    SweepResult r;
    r.model_id = std::move(model_id);
    r.grid = grid;
    r.macro_f1.assign(grid.size(), 0.0);
    for (const auto& d : docs) {
        if (d.truth.techniques.empty()) throw ArgumentError("document '" + d.truth.doc_id + "' has no ground truth");
        if (!r.per_doc.emplace(d.truth.doc_id, std::vector<DocMetrics>{}).second) {
            throw ArgumentError("duplicate document id '" + d.truth.doc_id + "'");
        }
        auto& series = r.per_doc[d.truth.doc_id];
        for (std::size_t g = 0; g < grid.size(); ++g) {
            auto pred = predict_from_rows(d.truth.doc_id, d.rows, classes, grid[g]);
            series.push_back(doc_metrics(pred, d.truth));
            r.macro_f1[g] += series.back().f1;
        }
    }
    for (auto& m : r.macro_f1) m /= static_cast<double>(docs.size());
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (r.macro_f1[g] > r.macro_f1[best]) best = g;
    }
    r.best_theta = grid[best];
    return r;
}

std::vector<ScoredDocument> score_documents(const ClassifierModel& model, const std::vector<GroundTruthDocument>& docs) {
    std::vector<ScoredDocument> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        if (d.sentences.empty()) throw ArgumentError("document '" + d.doc_id + "' has no sentences");
        ScoredDocument s{d, {}};
        for (const auto& sentence : d.sentences) s.rows.push_back(predict_text(model, sentence));
        out.push_back(std::move(s));
    }
    return out;
}

SweepResult threshold_sweep(const ClassifierModel& model, const std::vector<GroundTruthDocument>& docs,
                            const std::vector<double>& grid, std::string model_id) {
    validate_grid(grid);
    return threshold_sweep(score_documents(model, docs), model.classes(), grid, std::move(model_id));
}

json SweepResult::to_json() const {
    json per = json::object();
    for (const auto& [doc, series] : per_doc) {
        json row = json::object();
        for (std::size_t g = 0; g < grid.size(); ++g) row[theta_label(grid[g])] = series[g].to_json();
        per[doc] = row;
    }
    json macro = json::object();
    for (std::size_t g = 0; g < grid.size(); ++g) macro[theta_label(grid[g])] = macro_f1[g];
    return {{"model_id", model_id}, {"grid", grid}, {"per_doc", per}, {"macro", macro}, {"best_theta", best_theta}};
}

std::string SweepResult::to_csv() const {
    std::ostringstream out;
    out << "doc_id,theta,precision,recall,f1\n";
    for (const auto& [doc, series] : per_doc) {
        for (std::size_t g = 0; g < grid.size(); ++g) {
            std::string id;
            append_csv_field(id, doc);
            out << id << ',' << theta_label(grid[g]) << ',' << format_decimal(series[g].precision) << ','
                << format_decimal(series[g].recall) << ',' << format_decimal(series[g].f1) << '\n';
        }
    }
    return out.str();
}

}  // namespace attackmap
