#include "attackmap/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "attackmap/errors.hpp"
#include "attackmap/util.hpp"

namespace attackmap {

using nlohmann::json;

namespace {

void check_labels(const std::vector<std::size_t>& labels, std::size_t n_classes, const char* what) {
    for (auto l : labels) {
        if (l >= n_classes) {
            throw ArgumentError(std::string(what) + " label " + std::to_string(l) + " is outside [0, " +
                                std::to_string(n_classes) + ")");
        }
    }
}

std::size_t top1(const std::vector<double>& row) { return argmax(row); }

}  // namespace

ConfusionCounts confusion(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                          std::size_t n_classes) {
    if (truth.empty()) throw ArgumentError("cannot evaluate zero samples");
    if (truth.size() != predicted.size()) {
        throw ArgumentError("got " + std::to_string(truth.size()) + " true labels but " +
                            std::to_string(predicted.size()) + " predictions");
    }
    check_labels(truth, n_classes, "true");
    check_labels(predicted, n_classes, "predicted");
    ConfusionCounts cc;
    cc.tp.assign(n_classes, 0);
    cc.fp.assign(n_classes, 0);
    cc.fn.assign(n_classes, 0);
    cc.support.assign(n_classes, 0);
    cc.n_samples = truth.size();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = truth[i];
        const auto p = predicted[i];
        ++cc.support[t];
        ++cc.pairs[{t, p}];
        if (t == p) {
            ++cc.tp[t];
        } else {
            ++cc.fn[t];
            ++cc.fp[p];
        }
    }
    return cc;
}

double accuracy_at_k(const std::vector<std::size_t>& truth, const std::vector<std::vector<double>>& proba_rows,
                     std::size_t k) {
    if (truth.size() != proba_rows.size()) throw ArgumentError("label and probability row counts differ");
    if (truth.empty()) throw ArgumentError("cannot evaluate zero samples");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (const auto& [c, p] : top_k(proba_rows[i], k)) {
            if (c == truth[i]) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

EvalReport classification_report(const std::vector<std::size_t>& truth,
                                  const std::vector<std::vector<double>>& proba_rows,
                                  const std::vector<std::string>& classes, const std::vector<std::size_t>& k_values,
                                  std::string model_id) {
    if (truth.size() != proba_rows.size()) {
        throw ArgumentError("got " + std::to_string(truth.size()) + " true labels but " +
                            std::to_string(proba_rows.size()) + " probability rows");
    }
    const std::size_t C = classes.size();
    for (const auto& row : proba_rows) {
        if (row.size() != C) throw ArgumentError("probability row length differs from the class count");
    }
    std::vector<std::size_t> predicted;
    predicted.reserve(proba_rows.size());
    for (const auto& row : proba_rows) predicted.push_back(top1(row));

    EvalReport r;
    r.model_id = std::move(model_id);
    r.classes = classes;
    r.counts = confusion(truth, predicted, C);
    r.n_samples = truth.size();
    r.per_class.resize(C);
    double wp = 0.0, wr = 0.0, wf = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        auto& m = r.per_class[c];
        const auto tp = static_cast<double>(r.counts.tp[c]);
        const std::size_t pred_pos = r.counts.tp[c] + r.counts.fp[c];
        m.support = r.counts.support[c];
        m.precision_defined = pred_pos > 0;
        m.recall_defined = m.support > 0;
        m.precision = m.precision_defined ? tp / static_cast<double>(pred_pos) : 0.0;
        m.recall = m.recall_defined ? tp / static_cast<double>(m.support) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        const auto s = static_cast<double>(m.support);
        wp += s * m.precision;
        wr += s * m.recall;
        wf += s * m.f1;
    }
    const auto n = static_cast<double>(r.n_samples);
    r.weighted_precision = wp / n;
    r.weighted_recall = wr / n;
    r.weighted_f1 = wf / n;
    for (auto k : k_values) r.ac_at_k[k] = accuracy_at_k(truth, proba_rows, k);
    return r;
}

json EvalReport::to_json() const {
    json per = json::object();
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const auto& m = per_class[c];
        per[classes[c]] = {{"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1},
                           {"support", m.support},
                           {"precision_defined", m.precision_defined},
                           {"recall_defined", m.recall_defined}};
    }
    json ac = json::object();
    for (const auto& [k, v] : ac_at_k) ac[std::to_string(k)] = v;
    json pairs = json::array();
    for (const auto& [key, count] : counts.pairs) {
        if (key.first != key.second) pairs.push_back({classes[key.first], classes[key.second], count});
    }
    return {{"model_id", model_id},
            {"n_samples", n_samples},
            {"weighted", {{"precision", weighted_precision}, {"recall", weighted_recall}, {"f1", weighted_f1}}},
            {"ac_at_k", ac},
            {"per_class", per},
            {"confusions", pairs}};
}

// ---------------------------------------------------------------------------

std::vector<Misprediction> collect_mispredictions(const std::vector<std::string>& texts,
                                                  const std::vector<std::size_t>& truth,
                                                  const std::vector<std::size_t>& predicted,
                                                  const TechniqueRegistry& registry) {
    if (texts.size() != truth.size() || truth.size() != predicted.size()) {
        throw ArgumentError("texts, labels and predictions must have equal length");
    }
    check_labels(truth, registry.size(), "true");
    check_labels(predicted, registry.size(), "predicted");
    std::vector<Misprediction> out;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == predicted[i]) continue;
        const auto& t = registry.at(truth[i]);
        const auto& p = registry.at(predicted[i]);
        Misprediction m{texts[i], t.id, p.id, t.name, p.name, t.tactics, p.tactics, false};
        m.same_tactic = std::any_of(t.tactics.begin(), t.tactics.end(),
                                    [&](const std::string& tactic) { return p.tactics.count(tactic) > 0; });
        out.push_back(std::move(m));
    }
    return out;
}

std::string mispredictions_csv(const std::vector<Misprediction>& rows) {
    std::string out = "text,true_id,pred_id,true_name,pred_name,same_tactic\n";
    for (const auto& m : rows) {
        for (std::string_view f : {std::string_view(m.text), std::string_view(m.true_id),
                                   std::string_view(m.predicted_id), std::string_view(m.true_name),
                                   std::string_view(m.predicted_name)}) {
            append_csv_field(out, f);
            out.push_back(',');
        }
        out += m.same_tactic ? "true\n" : "false\n";
    }
    return out;
}

TacticAgreement tactic_agreement(const std::vector<Misprediction>& mispredictions) {
    TacticAgreement a;
    a.total = mispredictions.size();
    a.empty = mispredictions.empty();
    a.same = static_cast<std::size_t>(std::count_if(mispredictions.begin(), mispredictions.end(),
                                                    [](const Misprediction& m) { return m.same_tactic; }));
    a.fraction = a.empty ? 0.0 : static_cast<double>(a.same) / static_cast<double>(a.total);
    return a;
}

json TacticAgreement::to_json() const {
    return {{"fraction", fraction}, {"same_tactic", same}, {"mispredictions", total}, {"empty", empty}};
}

// ---------------------------------------------------------------------------

ExternalPredictions parse_predictions(std::string_view text, const TechniqueRegistry& registry) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            header = json::parse(line).get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw ParseError(std::string("prediction header must be a JSON array of technique ids: ") + e.what(),
                             line_no);
        }
        break;
    }
    if (header.empty()) throw ParseError("prediction file has no header");

    std::vector<std::size_t> target(header.size());
    std::vector<std::size_t> unknown;
    std::set<std::string> seen;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (!seen.insert(header[j]).second) throw ImportError("duplicate technique '" + header[j] + "' in header", {j});
        auto idx = registry.index_of(header[j]);
        if (!idx) {
            unknown.push_back(j);
            continue;
        }
        target[j] = *idx;
    }
    if (!unknown.empty()) {
        std::string ids;
        for (auto j : unknown) ids += (ids.empty() ? "" : ", ") + header[j];
        throw ImportError("prediction header names techniques outside the registry: " + ids, unknown);
    }

    ExternalPredictions out;
    for (const auto& t : registry.techniques()) out.label_order.push_back(t.id);
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++row_no;
        std::istringstream fields(line);
        std::vector<double> values;
        std::string token;
        while (fields >> token) {
            double v;
            try {
                v = parse_decimal(token);
            } catch (const ParseError&) {
                throw ParseError("'" + token + "' is not a decimal", line_no);
            }
            values.push_back(v);
        }
        if (values.size() != header.size()) {
            throw ValidationError("row " + std::to_string(row_no) + " has " + std::to_string(values.size()) +
                                      " values, header has " + std::to_string(header.size()),
                                  row_no);
        }
        double sum = 0.0;
        for (double v : values) {
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("row " + std::to_string(row_no) + " holds a negative or non-finite value",
                                      row_no);
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-2) {
            throw ValidationError("row " + std::to_string(row_no) + " sums to " + format_decimal(sum), row_no);
        }
        std::vector<double> row(registry.size(), 0.0);
        for (std::size_t j = 0; j < values.size(); ++j) row[target[j]] = values[j] / sum;
        out.rows.push_back(std::move(row));
    }
    return out;
}

ExternalPredictions import_predictions(const std::filesystem::path& path, const TechniqueRegistry& registry) {
    return parse_predictions(read_file(path), registry);
}

std::string format_predictions(const std::vector<std::string>& label_order,
                               const std::vector<std::vector<double>>& rows) {
    std::string out = json(label_order).dump();
    out.push_back('\n');
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out.push_back(' ');
            out += format_decimal(row[j]);
        }
        out.push_back('\n');
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> predict_corpus(const ClassifierModel& model, const LabeledCorpus& test) {
    if (model.registry_fingerprint() != test.registry().fingerprint()) {
        throw ArgumentError("model and corpus use different technique registries");
    }
    std::vector<std::vector<double>> rows(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) rows[i] = predict_text(model, test.samples()[i].text);
    return rows;
}

ModelEvaluation evaluate_rows(const LabeledCorpus& test, const std::vector<std::vector<double>>& rows,
                              const std::vector<std::size_t>& k_values, std::string model_id) {
    if (rows.size() != test.size()) {
        throw ArgumentError("got " + std::to_string(rows.size()) + " probability rows for " +
                            std::to_string(test.size()) + " samples");
    }
    std::vector<std::string> classes;
    for (const auto& t : test.registry().techniques()) classes.push_back(t.id);
    for (auto k : k_values) {
        if (k < 1 || k > classes.size()) throw ArgumentError("k = " + std::to_string(k) + " is out of range");
    }
    ModelEvaluation ev;
    const auto truth = test.labels();
    ev.report = classification_report(truth, rows, classes, k_values, std::move(model_id));
    std::vector<std::size_t> predicted;
    predicted.reserve(rows.size());
    for (const auto& row : rows) predicted.push_back(top1(row));
    ev.mispredictions = collect_mispredictions(test.texts(), truth, predicted, test.registry());
    ev.agreement = tactic_agreement(ev.mispredictions);
    return ev;
}

ModelEvaluation evaluate_model(const ClassifierModel& model, const LabeledCorpus& test,
                               const std::vector<std::size_t>& k_values, std::string model_id) {
    return evaluate_rows(test, predict_corpus(model, test), k_values, std::move(model_id));
}

json ModelEvaluation::to_json() const {
    json doc = report.to_json();
    doc["tactic_agreement"] = agreement.to_json();
    return doc;
}

}  // namespace attackmap
