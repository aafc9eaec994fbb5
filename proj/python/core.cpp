// Python bindings. Structured results cross the boundary as JSON text and are
// decoded by the pure-Python wrapper in attackmap/__init__.py.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "attackmap/classifiers.hpp"
#include "attackmap/corpus.hpp"
#include "attackmap/docmap.hpp"
#include "attackmap/errors.hpp"
#include "attackmap/evaluation.hpp"
#include "attackmap/stix.hpp"
#include "attackmap/textprep.hpp"

namespace py = pybind11;
using namespace attackmap;

namespace {

// pybind11 holders cannot be const-qualified.
using RegistryPtr = std::shared_ptr<TechniqueRegistry>;

RegistryPtr make_registry(TechniqueRegistry registry) { return std::make_shared<TechniqueRegistry>(std::move(registry)); }

LabeledCorpus corpus_from_bundles(const std::filesystem::path& attack, const std::filesystem::path& capec) {
    const auto bundle = load_bundle(attack);
    auto registry = make_registry(build_registry(bundle));
    auto raw = extract_samples(bundle, *registry);
    if (!capec.empty()) raw = enrich_with_capec(std::move(raw), bundle, load_bundle(capec), *registry);
    return build_dataset(raw, registry);
}

std::vector<GroundTruthDocument> load_documents(const std::vector<std::filesystem::path>& paths,
                                                const TechniqueRegistry& registry) {
    std::vector<GroundTruthDocument> docs;
    for (const auto& p : paths) docs.push_back(load_ground_truth(p, registry));
    return docs;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of the attackmap package";

    auto base = py::register_exception<Error>(m, "AttackmapError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
    py::register_exception<ImportError>(m, "DataImportError", base.ptr());
    py::register_exception<EmptyCorpusError>(m, "EmptyCorpusError", base.ptr());
    py::register_exception<MergeError>(m, "MergeError", base.ptr());
    py::register_exception<FitError>(m, "FitError", base.ptr());
    py::register_exception<TrainError>(m, "TrainError", base.ptr());
    py::register_exception<PredictError>(m, "PredictError", base.ptr());
    py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

    py::class_<TechniqueRegistry, RegistryPtr>(m, "Registry")
        .def_property_readonly("ids",
                               [](const TechniqueRegistry& r) {
                                   std::vector<std::string> ids;
                                   for (const auto& t : r.techniques()) ids.push_back(t.id);
                                   return ids;
                               })
        .def_property_readonly("fingerprint", &TechniqueRegistry::fingerprint)
        .def("__len__", [](const TechniqueRegistry& r) { return r.techniques().size(); })
        .def("__contains__", [](const TechniqueRegistry& r, const std::string& id) { return r.contains(id); })
        .def("to_json", [](const TechniqueRegistry& r) { return r.to_json().dump(); });

    m.def("load_registry", [](const std::filesystem::path& p) { return make_registry(load_registry(p)); },
          py::arg("path"));
    m.def("registry_from_bundle", [](const std::filesystem::path& p) { return make_registry(build_registry(load_bundle(p))); },
          py::arg("path"));
    m.def("registry_from_csv", [](const std::filesystem::path& p) { return make_registry(registry_from_csv(p)); },
          py::arg("path"));

    py::class_<LabeledCorpus>(m, "Corpus")
        .def("__len__", &LabeledCorpus::size)
        .def_property_readonly("registry",
                               [](const LabeledCorpus& c) { return std::const_pointer_cast<TechniqueRegistry>(c.registry_ptr()); })
        .def_property_readonly("texts", &LabeledCorpus::texts)
        .def_property_readonly("labels", &LabeledCorpus::labels)
        .def_property_readonly("technique_ids",
                               [](const LabeledCorpus& c) {
                                   std::vector<std::string> ids;
                                   for (const auto& s : c.samples()) ids.push_back(s.technique_id);
                                   return ids;
                               })
        .def_property_readonly("fingerprint", &LabeledCorpus::fingerprint)
        .def_property_readonly("n_classes_present", [](const LabeledCorpus& c) { return c.stats().n_classes_present; })
        .def("to_csv", &export_csv_string)
        .def("save_csv", [](const LabeledCorpus& c, const std::filesystem::path& p) { export_csv(c, p); },
             py::arg("path"))
        .def(
            "split",
            [](const LabeledCorpus& c, double ratio, std::uint64_t seed) {
                auto s = stratified_split(c, ratio, seed);
                return py::make_tuple(std::move(s.train), std::move(s.test));
            },
            py::arg("ratio") = 0.8, py::arg("seed") = 0)
        .def("__eq__", &LabeledCorpus::operator==);

    m.def("import_csv", [](const std::filesystem::path& p, RegistryPtr r) {
              if (!r) r = make_registry(registry_from_csv(p));
              return import_csv(p, r);
          },
          py::arg("path"), py::arg("registry") = RegistryPtr{});
    m.def("import_tram", [](const std::filesystem::path& p, RegistryPtr r) { return import_tram(p, std::move(r)); },
          py::arg("path"), py::arg("registry"));
    m.def("corpus_from_bundles", &corpus_from_bundles, py::arg("attack"), py::arg("capec") = std::filesystem::path{});
    m.def("merge", &merge, py::arg("a"), py::arg("b"));

    m.def("porter_stem", &porter_stem, py::arg("word"));
    m.def("normalize_tokens", [](const std::string& text) { return normalize_tokens(text); }, py::arg("text"));
    m.def("smoothed_idf", &smoothed_idf, py::arg("n_documents"), py::arg("document_frequency"));
    m.def(
        "tfidf",
        [](const std::vector<Tokens>& docs, const std::vector<Tokens>& queries) {
            const auto model = fit_vectorizer(docs);
            std::vector<std::vector<double>> rows;
            for (const auto& q : queries) {
                const auto v = vectorize(model, q);
                std::vector<double> dense(v.dim, 0.0);
                for (const auto& e : v.entries) dense[e.index] = e.weight;
                rows.push_back(std::move(dense));
            }
            return py::make_tuple(model.terms(), model.idf(), rows);
        },
        py::arg("documents"), py::arg("queries"));

    py::class_<ClassifierModel, std::shared_ptr<ClassifierModel>>(m, "Model")
        .def_property_readonly("classes", &ClassifierModel::classes)
        .def_property_readonly("kind", [](const ClassifierModel& mo) { return std::string(to_string(mo.spec().kind())); })
        .def_property_readonly("registry_fingerprint", &ClassifierModel::registry_fingerprint)
        .def("predict_proba", [](const ClassifierModel& mo, const std::string& text) { return predict_text(mo, text); },
             py::arg("text"))
        .def(
            "top_k",
            [](const ClassifierModel& mo, const std::string& text, std::size_t k) {
                std::vector<std::pair<std::string, double>> out;
                for (const auto& [c, p] : top_k(predict_text(mo, text), k)) out.emplace_back(mo.classes()[c], p);
                return out;
            },
            py::arg("text"), py::arg("k") = 3)
        .def("predict_corpus", [](const ClassifierModel& mo, const LabeledCorpus& c) { return predict_corpus(mo, c); })
        .def("serialize", [](const ClassifierModel& mo) { return serialize_model(mo); })
        .def("save", [](const ClassifierModel& mo, const std::filesystem::path& p) { save_model(mo, p); },
             py::arg("path"));

    m.def(
        "train",
        [](const LabeledCorpus& corpus, const std::string& kind, bool balanced, std::uint64_t seed,
           const std::map<std::string, double>& hyperparams) {
            const ClassifierSpec spec(classifier_kind_from_string(kind), balanced, seed, hyperparams);
            py::gil_scoped_release release;
            return std::make_shared<ClassifierModel>(train_text_classifier(corpus, spec));
        },
        py::arg("corpus"), py::arg("kind"), py::arg("balanced") = false, py::arg("seed") = 0,
        py::arg("hyperparams") = std::map<std::string, double>{});
    m.def("load_model", [](const std::filesystem::path& p) { return std::make_shared<ClassifierModel>(load_model(p)); },
          py::arg("path"));
    m.def("parse_model", [](const std::string& text) { return std::make_shared<ClassifierModel>(parse_model(text)); },
          py::arg("text"));
    m.def("registry_of_model", [](const ClassifierModel& mo) { return make_registry(registry_of_model(mo)); },
          py::arg("model"));

    m.def(
        "evaluate_json",
        [](const ClassifierModel& mo, const LabeledCorpus& test, const std::vector<std::size_t>& ks,
           const std::string& model_id) { return evaluate_model(mo, test, ks, model_id).to_json().dump(); },
        py::arg("model"), py::arg("test"), py::arg("ks"), py::arg("model_id"));
    m.def(
        "classification_report_json",
        [](const std::vector<std::size_t>& truth, const std::vector<std::vector<double>>& rows,
           const std::vector<std::string>& classes, const std::vector<std::size_t>& ks) {
            return classification_report(truth, rows, classes, ks).to_json().dump();
        },
        py::arg("truth"), py::arg("rows"), py::arg("classes"), py::arg("ks"));
    m.def(
        "evaluate_predictions_json",
        [](const std::filesystem::path& preds, const LabeledCorpus& test, const std::vector<std::size_t>& ks,
           const std::string& model_id) {
            const auto imported = import_predictions(preds, test.registry());
            return evaluate_rows(test, imported.rows, ks, model_id).to_json().dump();
        },
        py::arg("predictions"), py::arg("test"), py::arg("ks"), py::arg("model_id"));

    m.def(
        "doc_metrics_json",
        [](const std::set<std::string>& predicted, const std::set<std::string>& truth) {
            return doc_metrics(predicted, truth).to_json().dump();
        },
        py::arg("predicted"), py::arg("truth"));
    m.def("default_grid", &default_grid);
    m.def(
        "predict_document",
        [](const ClassifierModel& mo, const std::vector<std::string>& sentences, double theta) {
            const auto p = predict_document(mo, sentences, theta);
            return p.predicted_set;
        },
        py::arg("model"), py::arg("sentences"), py::arg("theta") = 0.2);
    m.def(
        "threshold_sweep_json",
        [](const ClassifierModel& mo, const std::vector<std::filesystem::path>& paths, const std::vector<double>& grid,
           const std::string& model_id) {
            const auto registry = registry_of_model(mo);
            const auto docs = load_documents(paths, registry);
            return threshold_sweep(mo, docs, grid, model_id).to_json().dump();
        },
        py::arg("model"), py::arg("documents"), py::arg("grid"), py::arg("model_id"));
}
