// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Optional environment variables switch criteria 5 and 6
// from the bundled fixtures to pinned external data:
//   ATTACKMAP_DATASET_PATH   released sentence dataset (CSV)
//   ATTACKMAP_TRAM_PATH      TRAM export (JSON)
//   ATTACKMAP_TRAM_REGISTRY  registry JSON for the TRAM import

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "attackmap/classifiers.hpp"
#include "attackmap/cli.hpp"
#include "attackmap/corpus.hpp"
#include "attackmap/docmap.hpp"
#include "attackmap/evaluation.hpp"
#include "attackmap/objectives.hpp"
#include "attackmap/stix.hpp"
#include "attackmap/textprep.hpp"
#include "attackmap/util.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace attackmap;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> failures;

    /// Records a failed check; keeps the first few messages.
    void require(bool ok, const std::string& what) {
        if (ok) return;
        pass = false;
        if (failures.size() < 5) failures.push_back(what);
    }
};

struct Criterion {
    int number;
    std::string title;
    std::function<Outcome()> run;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << std::fixed << v;
    return s.str();
}

const char* env(const char* name) {
    const char* v = std::getenv(name);
    return v && *v ? v : nullptr;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1 -------------------------------------------------------------------------

Outcome metric_oracle_suite() {
    constexpr double kTol = 1e-12;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    oracle::SplitMix rng(20240601);
    std::vector<std::string> names;
    for (int c = 0; c < 10; ++c) names.push_back("T" + std::to_string(1000 + c));
    std::size_t compared = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto inst = oracle::random_metrics_instance(rng, 200, 10);
        const std::size_t C = inst.n_classes;
        std::set<std::size_t> kset{1, C};
        if (C >= 3) kset.insert(3);
        const std::vector<std::size_t> ks(kset.begin(), kset.end());
        const std::vector<std::string> classes(names.begin(), names.begin() + long(C));
        const auto got = classification_report(inst.truth, inst.rows, classes, ks);
        const auto want = oracle::brute_force_metrics(inst.truth, inst.rows, C, ks);
        const std::string at = "instance " + std::to_string(trial);
        o.require(std::abs(got.weighted_precision - want.weighted_precision) <= kTol, at + " weighted precision");
        o.require(std::abs(got.weighted_recall - want.weighted_recall) <= kTol, at + " weighted recall");
        o.require(std::abs(got.weighted_f1 - want.weighted_f1) <= kTol, at + " weighted f1");
        for (std::size_t c = 0; c < C; ++c) {
            const auto& g = got.per_class[c];
            const auto& w = want.per_class[c];
            o.require(std::abs(g.precision - w.precision) <= kTol && std::abs(g.recall - w.recall) <= kTol &&
                          std::abs(g.f1 - w.f1) <= kTol && g.support == w.support,
                      at + " class " + std::to_string(c));
            o.require(got.counts.tp[c] == w.tp && got.counts.fp[c] == w.fp && got.counts.fn[c] == w.fn,
                      at + " confusion counts");
        }
        o.require(got.counts.pairs == want.pairs, at + " confusion pairs");
        for (auto k : ks) o.require(std::abs(got.ac_at_k.at(k) - want.ac_at_k.at(k)) <= kTol, at + " AC@k");
        ++compared;
    }
    const double secs = elapsed_s(start);
    o.require(secs < 10.0, "runtime " + fmt(secs, 2) + " s exceeds 10 s");
    o.detail = std::to_string(compared) + " instances, tol 1e-12, " + fmt(secs, 2) + " s";
    return o;
}

// 2 -------------------------------------------------------------------------

/// Hand evaluation of the TF-IDF definition: unigram+bigram counts, smoothed
/// idf ln((1+N)/(1+df))+1, raw tf, L2 normalization.
std::map<std::string, double> hand_tfidf(const std::vector<Tokens>& docs, const Tokens& query) {
    auto grams = [](const Tokens& t) {
        std::vector<std::string> g(t.begin(), t.end());
        for (std::size_t i = 0; i + 1 < t.size(); ++i) g.push_back(t[i] + " " + t[i + 1]);
        return g;
    };
    std::map<std::string, std::size_t> df;
    for (const auto& d : docs) {
        const auto g = grams(d);
        for (const auto& term : std::set<std::string>(g.begin(), g.end())) ++df[term];
    }
    const double N = double(docs.size());
    std::map<std::string, double> v;
    for (const auto& term : grams(query)) {
        if (df.count(term)) v[term] += 1.0;
    }
    double norm = 0.0;
    for (auto& [term, w] : v) {
        w *= std::log((1.0 + N) / (1.0 + double(df[term]))) + 1.0;
        norm += w * w;
    }
    for (auto& [term, w] : v) w /= std::sqrt(norm);
    return v;
}

Outcome tfidf_golden() {
    constexpr double kTol = 1e-9;
    Outcome o;
    // idf(b) = ln(3/2) + 1: "b" occurs in one of two documents.
    const auto two = fit_vectorizer({{"a", "b"}, {"a"}});
    const auto& terms2 = two.terms();
    const auto b_at = std::find(terms2.begin(), terms2.end(), "b") - terms2.begin();
    o.require(std::abs(two.idf()[std::size_t(b_at)] - (std::log(1.5) + 1.0)) <= kTol, "idf(b) != ln(3/2)+1");

    const std::vector<Tokens> docs{{"a", "b"}, {"a"}, {"a", "c", "c"}, {"b", "c", "d"}};
    const auto m = fit_vectorizer(docs);
    std::vector<Tokens> queries = docs;
    queries.push_back({"a", "a", "b"});
    queries.push_back({"c", "d", "zzz", "a"});
    std::size_t checked = 0;
    for (const auto& q : queries) {
        const auto want = hand_tfidf(docs, q);
        const auto got = vectorize(m, q);
        std::vector<double> dense(got.dim, 0.0);
        for (const auto& e : got.entries) dense[e.index] = e.weight;
        double sq = 0.0;
        for (std::size_t i = 0; i < m.terms().size(); ++i) {
            const auto it = want.find(m.terms()[i]);
            const double w = it == want.end() ? 0.0 : it->second;
            o.require(std::abs(dense[i] - w) <= kTol, "weight of '" + m.terms()[i] + "'");
            sq += dense[i] * dense[i];
            ++checked;
        }
        o.require(std::abs(sq - 1.0) <= kTol, "vector not L2-normalized");
    }
    // Frozen reference for the first document.
    const std::vector<double> frozen{0.44809973136259862, 0.70203481941496193, 0, 0.55349231528700449, 0, 0, 0, 0, 0};
    const auto first = vectorize(m, docs[0]);
    std::vector<double> dense(first.dim, 0.0);
    for (const auto& e : first.entries) dense[e.index] = e.weight;
    for (std::size_t i = 0; i < frozen.size(); ++i) o.require(std::abs(dense[i] - frozen[i]) <= kTol, "frozen vector");
    o.detail = "2-doc idf(b)=ln(3/2)+1; 4-doc corpus, " + std::to_string(checked) + " weights vs hand formula, tol 1e-9";
    return o;
}

// 3 -------------------------------------------------------------------------

struct TinyInstance {
    std::vector<FeatureVector> X;
    WeightedSamples data;
};

TinyInstance tiny(oracle::SplitMix& rng) {
    TinyInstance t;
    const std::size_t D = 1 + rng.below(5), C = 2 + rng.below(2), N = 1 + rng.below(10);
    const bool weighted = rng.below(2) == 1;
    for (std::size_t i = 0; i < N; ++i) {
        std::vector<double> x(D);
        for (auto& v : x) v = rng.below(3) == 0 ? 0.0 : rng.uniform() * 2.0 - 0.5;
        t.X.push_back(testing::dense_to_sparse(x));
        t.data.labels.push_back(rng.below(C));
        if (weighted) t.data.sample_weights.push_back(0.2 + 2.0 * rng.uniform());
    }
    t.data.features = &t.X;
    t.data.dim = D;
    t.data.n_classes = C;
    return t;
}

std::vector<double> random_theta(oracle::SplitMix& rng, std::size_t n, double scale) {
    std::vector<double> theta(n);
    for (auto& v : theta) v = (rng.uniform() * 2.0 - 1.0) * scale;
    return theta;
}

Outcome gradient_checks() {
    constexpr double kTol = 1e-4;
    Outcome o;
    oracle::SplitMix rng(31337);
    double worst_lr = 0.0, worst_mlp = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto t = tiny(rng);
        LogRegObjective obj(t.data, 1e-2 * rng.uniform());
        const auto theta = random_theta(rng, obj.n_params(), 1.0);
        std::vector<double> grad(obj.n_params());
        obj.evaluate(theta, grad);
        const auto numeric =
            oracle::numeric_gradient([&](const std::vector<double>& p) { return obj.evaluate(p, {}); }, theta, 1e-6);
        worst_lr = std::max(worst_lr, oracle::relative_error(grad, numeric));
    }
    for (int trial = 0; trial < 100; ++trial) {
        auto t = tiny(rng);
        MlpObjective obj(t.data, 1 + rng.below(4), 1e-2 * rng.uniform());
        const auto theta = random_theta(rng, obj.n_params(), 0.8);
        std::vector<double> grad(obj.n_params());
        obj.evaluate(theta, grad);
        const auto numeric =
            oracle::numeric_gradient([&](const std::vector<double>& p) { return obj.evaluate(p, {}); }, theta, 1e-6);
        worst_mlp = std::max(worst_mlp, oracle::relative_error(grad, numeric));
    }
    o.require(worst_lr < kTol, "logreg relative error " + std::to_string(worst_lr));
    o.require(worst_mlp < kTol, "mlp relative error " + std::to_string(worst_mlp));
    std::ostringstream d;
    d.precision(2);
    d << std::scientific << "100+100 instances, max rel err logreg " << worst_lr << ", mlp " << worst_mlp
      << ", tol 1e-4";
    o.detail = d.str();
    return o;
}

// 4 -------------------------------------------------------------------------

Outcome nb_oracle() {
    constexpr double kTol = 1e-9;
    Outcome o;
    oracle::SplitMix rng(4242);
    std::size_t instances = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t D = 1 + rng.below(3), C = 1 + rng.below(3), N = 1 + rng.below(8);
        std::vector<std::vector<double>> dense(N, std::vector<double>(D));
        std::vector<FeatureVector> X;
        std::vector<std::size_t> y(N);
        for (std::size_t i = 0; i < N; ++i) {
            for (auto& v : dense[i]) v = rng.below(3) == 0 ? rng.uniform() : double(rng.below(4));
            y[i] = rng.below(C);
            X.push_back(testing::dense_to_sparse(dense[i]));
        }
        std::vector<double> q(D);
        for (auto& v : q) v = rng.uniform() * 3.0;
        const auto ctx = testing::plain_context(D, C);
        const auto mnb = train(X, y, ClassifierSpec(ClassifierKind::multinomial_nb), ctx);
        const auto cnb = train(X, y, ClassifierSpec(ClassifierKind::complement_nb), ctx);
        const auto want_m = oracle::multinomial_nb_posterior(dense, y, {}, C, 1.0, q);
        const auto want_c = oracle::complement_nb_posterior(dense, y, {}, C, 1.0, q);
        const auto got_m = predict_proba(mnb, testing::dense_to_sparse(q));
        const auto got_c = predict_proba(cnb, testing::dense_to_sparse(q));
        for (std::size_t c = 0; c < C; ++c) {
            o.require(std::abs(got_m[c] - want_m[c]) <= kTol, "multinomial instance " + std::to_string(trial));
            o.require(std::abs(got_c[c] - want_c[c]) <= kTol, "complement instance " + std::to_string(trial));
        }
        ++instances;
    }
    o.detail = std::to_string(instances) + " instances (<=3 features, <=3 classes, alpha=1), tol 1e-9";
    return o;
}

// 5 -------------------------------------------------------------------------

struct Reference {
    const char* label;
    ClassifierKind kind;
    bool balanced;
    double weighted_f1;
};

std::vector<Reference> table_models() {
    return {
        {"CNB", ClassifierKind::complement_nb, false, 0.639},
        {"LR-balanced", ClassifierKind::logreg, true, 0.646},
        {"SVM-OvR", ClassifierKind::linsvm_ovr, false, 0.699},
        {"MLP", ClassifierKind::mlp, false, 0.704},
    };
}

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

Outcome sentence_level_pinned(const std::string& path) {
    constexpr double kBand = 0.05;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    auto registry = std::make_shared<const TechniqueRegistry>(registry_from_csv(path));
    const auto corpus = import_csv(path, registry);
    std::ostringstream d;
    d << "pinned dataset n=" << corpus.size() << " classes=" << corpus.stats().n_classes_present << ";";
    for (const auto& ref : table_models()) {
        double best = 0.0;
        for (auto seed : kSeeds) {
            const auto split = stratified_split(corpus, 0.8, seed);
            const ClassifierSpec spec(ref.kind, ref.balanced, seed);
            const auto model = train_text_classifier(split.train, spec);
            const auto r = evaluate_model(model, split.test, {1, 3}, ref.label).report;
            o.require(r.ac_at_k.at(3) >= r.ac_at_k.at(1), std::string(ref.label) + " AC@3 < AC@1");
            best = std::max(best, r.weighted_f1);
        }
        o.require(std::abs(best - ref.weighted_f1) <= kBand,
                  std::string(ref.label) + " best F1 " + fmt(best) + " vs " + fmt(ref.weighted_f1));
        d << " " << ref.label << " " << fmt(best, 3) << " (target " << fmt(ref.weighted_f1, 3) << ")";
    }
    d << "; band +-5pp; " << fmt(elapsed_s(start), 1) << " s";
    o.detail = d.str();
    return o;
}

Outcome sentence_level_fallback() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto corpus = testing::fixture_corpus();
    std::ostringstream d;
    d << "fallback: property suite on bundled fixture n=" << corpus.size() << ";";
    for (const auto& ref : table_models()) {
        double best = 0.0;
        for (auto seed : kSeeds) {
            const std::string at = std::string(ref.label) + " seed " + std::to_string(seed);
            const auto split = stratified_split(corpus, 0.8, seed);
            o.require(split.train.size() + split.test.size() == corpus.size(), at + " split loses samples");
            const ClassifierSpec spec(ref.kind, ref.balanced, seed);
            const auto model = train_text_classifier(split.train, spec);
            const auto rows = predict_corpus(model, split.test);
            for (const auto& row : rows) {
                const double sum = std::accumulate(row.begin(), row.end(), 0.0);
                o.require(std::abs(sum - 1.0) <= 1e-9, at + " row does not sum to 1");
                o.require(std::all_of(row.begin(), row.end(), [](double p) { return p >= 0.0; }),
                          at + " negative probability");
            }
            const std::vector<std::size_t> ks{1, 3, 5};
            const auto r = evaluate_rows(split.test, rows, ks, ref.label).report;
            const auto want = oracle::brute_force_metrics(split.test.labels(), rows, model.n_classes(), ks);
            o.require(std::abs(r.weighted_f1 - want.weighted_f1) <= 1e-12, at + " weighted F1 vs oracle");
            o.require(r.counts.pairs == want.pairs, at + " confusion vs oracle");
            for (auto k : ks) o.require(std::abs(r.ac_at_k.at(k) - want.ac_at_k.at(k)) <= 1e-12, at + " AC@k vs oracle");
            o.require(r.ac_at_k.at(1) <= r.ac_at_k.at(3) && r.ac_at_k.at(3) <= r.ac_at_k.at(5), at + " AC@k not monotone");
            o.require(std::abs(r.ac_at_k.at(1) - r.weighted_recall) <= 1e-12, at + " AC@1 != weighted recall");
            o.require(r.weighted_f1 >= 0.0 && r.weighted_f1 <= 1.0, at + " F1 out of range");
            // Must beat always predicting the most frequent training class.
            const auto counts = split.train.class_count_vector();
            const std::size_t major = std::size_t(std::max_element(counts.begin(), counts.end()) - counts.begin());
            std::vector<std::vector<double>> constant(rows.size(), std::vector<double>(model.n_classes(), 0.0));
            for (auto& row : constant) row[major] = 1.0;
            const double baseline = classification_report(split.test.labels(), constant, model.classes(), {1}).weighted_f1;
            o.require(r.weighted_f1 > baseline, at + " no better than the majority baseline");
            best = std::max(best, r.weighted_f1);
        }
        d << " " << ref.label << " best F1 " << fmt(best, 3);
    }
    d << "; " << fmt(elapsed_s(start), 1) << " s";
    o.detail = d.str();
    return o;
}

Outcome sentence_level() {
    if (const char* path = env("ATTACKMAP_DATASET_PATH")) return sentence_level_pinned(path);
    return sentence_level_fallback();
}

// 6 -------------------------------------------------------------------------

Outcome check_tram_corpus(const LabeledCorpus& corpus, Outcome o, std::ostringstream& d) {
    o.require(corpus.stats().n_classes_present <= 80,
              "populated classes " + std::to_string(corpus.stats().n_classes_present) + " > 80");
    const auto split = stratified_split(corpus, 0.8, 1);
    const auto model = train_text_classifier(split.train, ClassifierSpec(ClassifierKind::complement_nb));
    const auto ev = evaluate_model(model, split.test, {1, 3}, "tram-cnb");
    const auto& r = ev.report;
    o.require(r.n_samples == split.test.size(), "report sample count");
    o.require(r.per_class.size() == r.classes.size() && !r.classes.empty(), "per-class table incomplete");
    o.require(r.ac_at_k.count(1) == 1 && r.ac_at_k.count(3) == 1, "AC@k missing");
    const auto doc = ev.to_json();
    for (const char* key : {"model_id", "n_samples", "per_class", "weighted", "ac_at_k", "confusions", "tactic_agreement"}) {
        o.require(doc.contains(key), std::string("report JSON lacks ") + key);
    }
    d << " samples=" << corpus.size() << " populated classes=" << corpus.stats().n_classes_present
      << " test=" << split.test.size() << " weighted F1 " << fmt(r.weighted_f1, 3) << " AC@3 " << fmt(r.ac_at_k.at(3), 3);
    o.detail = d.str();
    return o;
}

Outcome tram_path() {
    Outcome o;
    std::ostringstream d;
    const char* tram = env("ATTACKMAP_TRAM_PATH");
    const char* reg = env("ATTACKMAP_TRAM_REGISTRY");
    if (tram && reg) {
        auto registry = std::make_shared<const TechniqueRegistry>(load_registry(reg));
        const auto corpus = import_tram(tram, registry);
        o.require(corpus.size() == 1482, "expected 1,482 samples, got " + std::to_string(corpus.size()));
        d << "pinned TRAM export:";
        return check_tram_corpus(corpus, o, d);
    }
    ImportReport report;
    const auto corpus = import_tram(testing::data_dir() / "tram" / "tram-mini.json", testing::attack_registry(), &report);
    o.require(report.accepted == corpus.size(), "import report disagrees with corpus size");
    d << "fallback: bundled TRAM-format fixture (1,482-sample count needs the pinned export);";
    return check_tram_corpus(corpus, o, d);
}

// 7 -------------------------------------------------------------------------

constexpr ClassifierKind kAllKinds[] = {ClassifierKind::multinomial_nb, ClassifierKind::complement_nb,
                                        ClassifierKind::logreg,         ClassifierKind::linsvm_ovr,
                                        ClassifierKind::linsvm_ovo,     ClassifierKind::mlp};

Outcome document_properties() {
    Outcome o;
    const auto grid = default_grid();
    o.require(grid.size() == 8 && std::abs(grid.front() - 0.1) < 1e-12 && std::abs(grid.back() - 0.8) < 1e-12,
              "default grid is not 0.1..0.8");

    // Hand-computed set cases: (predicted, truth) -> (n_cu, P, R, F1).
    struct HandCase {
        std::set<std::string> predicted, truth;
        std::size_t n_cu;
        double p, r, f1;
    };
    const std::vector<HandCase> hand{
        {{"A", "B", "D", "E"}, {"A", "B", "C"}, 2, 0.5, 2.0 / 3.0, 2.0 * 0.5 * (2.0 / 3.0) / (0.5 + 2.0 / 3.0)},
        {{"A", "B"}, {"A", "B"}, 2, 1.0, 1.0, 1.0},
        {{}, {"A"}, 0, 0.0, 0.0, 0.0},
        {{"X"}, {"A", "B"}, 0, 0.0, 0.0, 0.0},
        {{"A"}, {"A", "B", "C", "D"}, 1, 1.0, 0.25, 2.0 * 1.0 * 0.25 / 1.25},
    };
    for (const auto& h : hand) {
        const auto m = doc_metrics(h.predicted, h.truth);
        o.require(m.n_cu == h.n_cu && m.n_u == h.predicted.size() && m.n_gt == h.truth.size(), "hand case counts");
        o.require(m.precision == h.p && m.recall == h.r && m.f1 == h.f1, "hand case metrics not exact");
    }

    const auto corpus = testing::fixture_corpus();
    std::ostringstream best_thetas;
    std::size_t in_band = 0, models = 0;
    for (auto kind : kAllKinds) {
        const std::string name(to_string(kind));
        const auto model = train_text_classifier(corpus, ClassifierSpec(kind, false, 1));
        const auto registry = registry_of_model(model);
        std::vector<GroundTruthDocument> docs;
        for (const auto& entry : std::filesystem::directory_iterator(testing::data_dir() / "docs")) {
            docs.push_back(load_ground_truth(entry.path(), registry));
        }
        std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
        o.require(docs.size() == 6, "expected six document fixtures");
        const auto scored = score_documents(model, docs);
        const auto sweep = threshold_sweep(scored, model.classes(), grid, name);
        std::vector<double> macro(grid.size(), 0.0);
        for (const auto& doc : scored) {
            std::set<std::string> previous;
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const auto predicted = oracle::thresholded_union(doc.rows, model.classes(), grid[g]);
                const auto want = oracle::set_scores(predicted, doc.truth.techniques);
                const auto& got = sweep.per_doc.at(doc.truth.doc_id)[g];
                o.require(got.n_cu == want.n_cu && got.n_u == want.n_u && got.n_gt == want.n_gt &&
                              got.precision == want.precision && got.recall == want.recall && got.f1 == want.f1,
                          name + " " + doc.truth.doc_id + " sweep differs from brute force");
                const auto direct = predict_document(model, doc.truth.sentences, grid[g], doc.truth.doc_id);
                o.require(direct.predicted_set == predicted, name + " predict_document differs from brute force");
                if (g > 0) {
                    o.require(std::includes(previous.begin(), previous.end(), predicted.begin(), predicted.end()),
                              name + " " + doc.truth.doc_id + " sets not nested");
                }
                previous = predicted;
                macro[g] += want.f1;
            }
        }
        std::size_t best = 0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            macro[g] /= double(scored.size());
            o.require(sweep.macro_f1[g] == macro[g], name + " macro F1 differs from brute force");
            if (macro[g] > macro[best]) best = g;
        }
        o.require(sweep.best_theta == grid[best], name + " best theta differs from brute force");
        ++models;
        const bool ok = sweep.best_theta >= 0.1 - 1e-12 && sweep.best_theta <= 0.3 + 1e-12;
        in_band += ok ? 1 : 0;
        best_thetas << " " << name << "=" << fmt(sweep.best_theta, 1);
    }
    o.detail = "6 models x 6 docs x 8 thresholds exact; soft check best theta in [0.1,0.3]: " +
               std::to_string(in_band) + "/" + std::to_string(models) + " (" + best_thetas.str().substr(1) + ")";
    o.require(in_band == models, "soft check: best theta outside [0.1, 0.3] for some model");
    return o;
}

// 8 -------------------------------------------------------------------------

bool same_rows(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    return a == b;
}

Outcome determinism() {
    Outcome o;
    const auto dir = testing::scratch_dir("acceptance-determinism");
    const auto dataset = (testing::data_dir() / "corpus" / "fixture-1000.csv").string();
    const auto corpus = testing::fixture_corpus();
    const auto split = stratified_split(corpus, 0.8, 11);
    std::size_t bundles = 0;
    for (auto kind : kAllKinds) {
        const std::string name(to_string(kind));
        std::string bytes[2];
        for (int i = 0; i < 2; ++i) {
            const auto path = dir / (name + "-" + std::to_string(i) + ".json");
            std::ostringstream out, err;
            const int code = cli_dispatch({"train", "--dataset", dataset, "--model", name, "--seed", "11",
                                           "--train-ratio", "0.8", "--out", path.string()},
                                          out, err);
            o.require(code == kExitOk, name + " train exited " + std::to_string(code) + ": " + err.str());
            bytes[i] = code == kExitOk ? read_file(path) : std::string();
        }
        o.require(!bytes[0].empty() && bytes[0] == bytes[1], name + " bundles differ");
        ++bundles;

        const auto model = train_text_classifier(split.train, ClassifierSpec(kind, false, 11));
        const auto path = dir / (name + "-roundtrip.json");
        save_model(model, path);
        const auto loaded = load_model(path);
        o.require(same_rows(predict_corpus(model, split.test), predict_corpus(loaded, split.test)),
                  name + " predictions change after save/load");
        o.require(serialize_model(loaded) == serialize_model(model), name + " re-serialization differs");
    }
    o.detail = std::to_string(bundles) + " model kinds: CLI train twice byte-identical; save/load predictions bit-equal";
    return o;
}

// 9 -------------------------------------------------------------------------

Outcome dataset_pipeline() {
    Outcome o;
    const auto attack = load_bundle(testing::data_dir() / "stix" / "enterprise-attack-mini.json");
    const auto capec = load_bundle(testing::data_dir() / "stix" / "capec-mini.json");
    const auto registry = std::make_shared<const TechniqueRegistry>(build_registry(attack));
    for (const auto& t : registry->techniques()) {
        o.require(t.id.find('.') == std::string::npos, "dotted class id " + t.id);
    }
    o.require(!registry->contains("T1086"), "revoked technique registered");

    const auto raw = enrich_with_capec(extract_samples(attack, *registry), attack, capec, *registry);
    for (const auto& s : raw) {
        o.require(registry->contains(s.technique_id), "raw label does not resolve: " + s.technique_id);
        if (s.subtechnique_id) {
            o.require(parent_technique_id(*s.subtechnique_id) == s.technique_id, "sub-technique parent mismatch");
        }
    }
    const auto corpus = build_dataset(raw, registry);
    for (const auto& s : corpus.samples()) {
        o.require(registry->contains(s.technique_id), "sample label does not resolve: " + s.technique_id);
        o.require(!is_subtechnique_id(s.technique_id), "sample labeled with a sub-technique");
    }

    // Expected labels of the procedure examples in the fixture.
    std::multiset<std::pair<std::string, std::string>> got;
    for (const auto& s : raw) {
        if (s.source_kind != SourceKind::relationship) continue;
        for (const char* actor : {"PoisonIvy", "XCSSET", "FIN6"}) {
            if (s.text.find(std::string("[") + actor + "]") != std::string::npos) {
                got.insert({actor, s.technique_id + "|" + s.subtechnique_id.value_or("")});
            }
        }
        o.require(s.text.find("revoked technique") == std::string::npos, "relationship to a revoked technique kept");
        o.require(!trim(s.text).empty(), "empty relationship description kept");
    }
    const std::multiset<std::pair<std::string, std::string>> want{
        {"PoisonIvy", "T1547|T1547.014"}, {"XCSSET", "T1087|"},           {"FIN6", "T1003|T1003.003"},
        {"FIN6", "T1560|T1560.001"},      {"FIN6", "T1087|T1087.002"},
    };
    o.require(got == want, "procedure example labels differ from the expected sub-technique -> parent mapping");
    o.detail = std::to_string(registry->techniques().size()) + " parent classes, " + std::to_string(raw.size()) +
               " raw samples, " + std::to_string(corpus.size()) + " sentences; PoisonIvy/XCSSET/FIN6 labels as expected";
    return o;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "metric oracle suite", metric_oracle_suite},
        {2, "TF-IDF golden vectors", tfidf_golden},
        {3, "gradient checks", gradient_checks},
        {4, "NB oracle equivalence", nb_oracle},
        {5, "sentence-level reproduction", sentence_level},
        {6, "TRAM path", tram_path},
        {7, "document-level properties", document_properties},
        {8, "determinism", determinism},
        {9, "dataset pipeline", dataset_pipeline},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.failures.push_back(std::string("exception: ") + e.what());
        }
        std::cout << "criterion " << c.number << " " << (o.pass ? "PASS" : "FAIL") << " " << c.title << ": " << o.detail;
        for (const auto& f : o.failures) std::cout << " | " << f;
        std::cout << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
