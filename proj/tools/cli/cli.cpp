#include "attackmap/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "attackmap/classifiers.hpp"
#include "attackmap/corpus.hpp"
#include "attackmap/docmap.hpp"
#include "attackmap/errors.hpp"
#include "attackmap/evaluation.hpp"
#include "attackmap/service.hpp"
#include "attackmap/stix.hpp"
#include "attackmap/util.hpp"

namespace attackmap {

using nlohmann::json;

namespace {

constexpr int kArtifactFormatVersion = 1;

struct CommonOptions {
    std::uint64_t seed = 0;
    std::string out;
    std::string registry;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--seed", opt.seed, "Seed for every random choice")->capture_default_str();
    cmd->add_option("--out", opt.out, "Output path");
    cmd->add_option("--registry", opt.registry, "Technique registry (registry JSON or ATT&CK STIX bundle)")
        ->check(CLI::ExistingFile);
}

json input_fingerprints(const std::map<std::string, std::string>& inputs) {
    json doc = json::object();
    for (const auto& [name, path] : inputs) {
        if (!path.empty()) doc[name] = fingerprint_of(read_file(path));
    }
    return doc;
}

json artifact_header(const std::string& kind, std::uint64_t seed, const std::map<std::string, std::string>& inputs) {
    return {{"format_version", kArtifactFormatVersion}, {"kind", kind}, {"seed", seed},
            {"inputs", input_fingerprints(inputs)}};
}

void write_json(const std::string& path, const json& doc) { write_file(path, doc.dump(1) + "\n"); }

void require_out(const CommonOptions& opt) {
    if (opt.out.empty()) throw CLI::RequiredError("--out");
}

/// Registry from --registry, or synthesized from the labels of `datasets`.
std::shared_ptr<const TechniqueRegistry> registry_for(const CommonOptions& opt,
                                                      const std::vector<std::string>& datasets) {
    if (!opt.registry.empty()) return std::make_shared<const TechniqueRegistry>(load_registry(opt.registry));
    std::map<std::string, TechniqueRef> refs;
    std::map<std::string, std::string> subs;
    for (const auto& path : datasets) {
        const auto found = registry_from_csv(path);
        for (const auto& t : found.techniques()) refs.emplace(t.id, t);
        for (const auto& [sub, parent] : found.subtech_parent()) subs.emplace(sub, found.name_of(sub));
    }
    std::vector<TechniqueRef> list;
    for (auto& [id, t] : refs) list.push_back(std::move(t));
    return std::make_shared<const TechniqueRegistry>(std::move(list), std::move(subs));
}

std::shared_ptr<const TechniqueRegistry> registry_for_model(const CommonOptions& opt, const ClassifierModel& model) {
    if (!opt.registry.empty()) {
        auto reg = std::make_shared<const TechniqueRegistry>(load_registry(opt.registry));
        if (reg->fingerprint() != model.registry_fingerprint()) {
            throw ArgumentError("the model was trained against a different technique registry");
        }
        return reg;
    }
    return std::make_shared<const TechniqueRegistry>(registry_of_model(model));
}

struct ModelAlias {
    ClassifierKind kind;
    bool balanced;
};

ModelAlias resolve_model_alias(const std::string& name) {
    static const std::map<std::string, ModelAlias> aliases{
        {"mnb", {ClassifierKind::multinomial_nb, false}}, {"cnb", {ClassifierKind::complement_nb, false}},
        {"logreg", {ClassifierKind::logreg, false}},      {"logreg-balanced", {ClassifierKind::logreg, true}},
        {"svm-ovr", {ClassifierKind::linsvm_ovr, false}}, {"svm-ovr-balanced", {ClassifierKind::linsvm_ovr, true}},
        {"svm-ovo", {ClassifierKind::linsvm_ovo, false}}, {"svm-ovo-balanced", {ClassifierKind::linsvm_ovo, true}},
        {"mlp", {ClassifierKind::mlp, false}},
    };
    if (auto it = aliases.find(name); it != aliases.end()) return it->second;
    return {classifier_kind_from_string(name), false};
}

std::map<std::string, double> parse_hyperparams(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ArgumentError("--hp expects key=value, got '" + item + "'");
        try {
            out[item.substr(0, eq)] = parse_decimal(item.substr(eq + 1));
        } catch (const ParseError&) {
            throw ArgumentError("--hp value for '" + item.substr(0, eq) + "' is not a number");
        }
    }
    return out;
}

std::vector<std::size_t> parse_k_list(const std::string& text) {
    std::vector<std::size_t> ks;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find(',', start);
        if (pos == std::string::npos) pos = text.size();
        auto token = trim(text.substr(start, pos - start));
        char* end = nullptr;
        const long v = std::strtol(token.c_str(), &end, 10);
        if (token.empty() || *end != '\0' || v < 1) throw ArgumentError("--k expects positive integers, got '" + text + "'");
        ks.push_back(static_cast<std::size_t>(v));
        start = pos + 1;
    }
    return ks;
}

/// The evaluation corpus: the whole dataset, or the test side of the
/// stratified split when a train ratio below 1 is given.
LabeledCorpus evaluation_corpus(const LabeledCorpus& full, double train_ratio, std::uint64_t seed) {
    if (train_ratio >= 1.0) return full;
    return stratified_split(full, train_ratio, seed).test;
}

void print_report_summary(std::ostream& out, const EvalReport& r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "samples=%zu weighted_precision=%.4f weighted_recall=%.4f weighted_f1=%.4f",
                  r.n_samples, r.weighted_precision, r.weighted_recall, r.weighted_f1);
    out << buf;
    for (const auto& [k, v] : r.ac_at_k) {
        std::snprintf(buf, sizeof buf, " ac@%zu=%.4f", k, v);
        out << buf;
    }
    out << "\n";
}

std::vector<std::filesystem::path> expand_doc_paths(const std::vector<std::string>& inputs) {
    std::vector<std::filesystem::path> files;
    for (const auto& in : inputs) {
        if (std::filesystem::is_directory(in)) {
            std::vector<std::filesystem::path> found;
            for (const auto& e : std::filesystem::directory_iterator(in)) {
                if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.emplace_back(in);
        }
    }
    if (files.empty()) throw ArgumentError("no ground-truth documents found");
    return files;
}

// ---------------------------------------------------------------------------
// Subcommands

struct IngestArgs {
    CommonOptions common;
    std::string attack, capec, registry_out;
};

int run_ingest(const IngestArgs& a, std::ostream& out) {
    require_out(a.common);
    IngestReport report;
    const auto attack = load_bundle(a.attack);
    auto registry = build_registry(attack, &report);
    auto samples = extract_samples(attack, registry, &report);
    if (!a.capec.empty()) samples = enrich_with_capec(std::move(samples), attack, load_bundle(a.capec), registry, &report);
    json doc = artifact_header("attackmap.raw_samples", a.common.seed, {{"attack", a.attack}, {"capec", a.capec}});
    doc["registry_fingerprint"] = registry.fingerprint();
    doc["report"] = report.to_json();
    doc["samples"] = raw_samples_to_json(samples);
    write_json(a.common.out, doc);
    if (!a.registry_out.empty()) write_json(a.registry_out, registry.to_json());
    out << "techniques=" << registry.size() << " samples=" << samples.size() << " warnings=" << report.warnings.size()
        << "\n";
    return kExitOk;
}

struct BuildDatasetArgs {
    CommonOptions common;
    std::string raw, attack, capec;
};

int run_build_dataset(const BuildDatasetArgs& a, std::ostream& out) {
    require_out(a.common);
    std::vector<RawSample> raw;
    std::shared_ptr<const TechniqueRegistry> registry;
    std::map<std::string, std::string> inputs;
    if (!a.raw.empty()) {
        if (a.common.registry.empty()) throw CLI::RequiredError("--registry (with --raw)");
        registry = std::make_shared<const TechniqueRegistry>(load_registry(a.common.registry));
        json doc;
        try {
            doc = json::parse(read_file(a.raw));
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("raw samples file is not valid JSON: ") + e.what());
        }
        raw = raw_samples_from_json(doc.is_object() ? doc.at("samples") : doc);
        inputs = {{"raw", a.raw}, {"registry", a.common.registry}};
    } else if (!a.attack.empty()) {
        const auto attack = load_bundle(a.attack);
        registry = std::make_shared<const TechniqueRegistry>(build_registry(attack));
        raw = extract_samples(attack, *registry);
        if (!a.capec.empty()) raw = enrich_with_capec(std::move(raw), attack, load_bundle(a.capec), *registry);
        inputs = {{"attack", a.attack}, {"capec", a.capec}};
    } else {
        throw CLI::RequiredError("--raw or --attack");
    }
    auto corpus = build_dataset(raw, registry);
    export_csv(corpus, a.common.out);
    json meta = artifact_header("attackmap.dataset", a.common.seed, inputs);
    meta["registry_fingerprint"] = registry->fingerprint();
    meta["corpus_fingerprint"] = corpus.fingerprint();
    meta["n_samples"] = corpus.size();
    meta["n_classes_present"] = corpus.stats().n_classes_present;
    write_json(a.common.out + ".meta.json", meta);
    out << "samples=" << corpus.size() << " classes=" << corpus.stats().n_classes_present << "\n";
    return kExitOk;
}

struct ImportTramArgs {
    CommonOptions common;
    std::string tram;
};

int run_import_tram(const ImportTramArgs& a, std::ostream& out) {
    require_out(a.common);
    if (a.common.registry.empty()) throw CLI::RequiredError("--registry");
    auto registry = std::make_shared<const TechniqueRegistry>(load_registry(a.common.registry));
    ImportReport report;
    auto corpus = import_tram(a.tram, registry, &report);
    export_csv(corpus, a.common.out);
    json meta = artifact_header("attackmap.dataset", a.common.seed, {{"tram", a.tram}, {"registry", a.common.registry}});
    meta["registry_fingerprint"] = registry->fingerprint();
    meta["corpus_fingerprint"] = corpus.fingerprint();
    meta["n_samples"] = corpus.size();
    meta["n_classes_present"] = corpus.stats().n_classes_present;
    meta["import_report"] = report.to_json();
    write_json(a.common.out + ".meta.json", meta);
    out << "records=" << report.records << " samples=" << corpus.size()
        << " classes=" << corpus.stats().n_classes_present << " rejected=" << report.rejected.size() << "\n";
    return kExitOk;
}

struct MergeArgs {
    CommonOptions common;
    std::vector<std::string> inputs;
};

int run_merge(const MergeArgs& a, std::ostream& out) {
    require_out(a.common);
    if (a.inputs.size() < 2) throw ArgumentError("merge needs at least two datasets");
    auto registry = registry_for(a.common, a.inputs);
    LabeledCorpus merged = import_csv(a.inputs[0], registry);
    for (std::size_t i = 1; i < a.inputs.size(); ++i) merged = merge(merged, import_csv(a.inputs[i], registry));
    export_csv(merged, a.common.out);
    std::map<std::string, std::string> inputs;
    for (std::size_t i = 0; i < a.inputs.size(); ++i) inputs["input_" + std::to_string(i)] = a.inputs[i];
    json meta = artifact_header("attackmap.dataset", a.common.seed, inputs);
    meta["registry_fingerprint"] = registry->fingerprint();
    meta["corpus_fingerprint"] = merged.fingerprint();
    meta["n_samples"] = merged.size();
    write_json(a.common.out + ".meta.json", meta);
    out << "samples=" << merged.size() << "\n";
    return kExitOk;
}

struct TrainArgs {
    CommonOptions common;
    std::string dataset, model = "cnb", test_out;
    bool balanced = false;
    std::vector<std::string> hp;
    double train_ratio = 1.0;
    std::size_t max_features = VectorizerConfig{}.max_features;
};

int run_train(const TrainArgs& a, std::ostream& out) {
    require_out(a.common);
    const auto alias = resolve_model_alias(a.model);
    ClassifierSpec spec(alias.kind, alias.balanced || a.balanced, a.common.seed, parse_hyperparams(a.hp));
    auto registry = registry_for(a.common, {a.dataset});
    auto full = import_csv(a.dataset, registry);
    LabeledCorpus train_set = full;
    if (a.train_ratio < 1.0) {
        auto split = stratified_split(full, a.train_ratio, a.common.seed);
        if (!a.test_out.empty()) export_csv(split.test, a.test_out);
        train_set = std::move(split.train);
    } else if (!a.test_out.empty()) {
        throw ArgumentError("--test-out needs --train-ratio below 1");
    }
    VectorizerConfig vcfg;
    vcfg.max_features = a.max_features;
    auto model = train_text_classifier(train_set, spec, PrepConfig{}, vcfg);
    ModelContext ctx{model.classes(), model.registry_fingerprint(), model.prep(), model.tfidf(), model.provenance()};
    ctx.provenance["seed"] = a.common.seed;
    ctx.provenance["train_ratio"] = a.train_ratio;
    ctx.provenance["inputs"] = input_fingerprints({{"dataset", a.dataset}, {"registry", a.common.registry}});
    ClassifierModel stamped(model.spec(), std::move(ctx), model.parameters());
    save_model(stamped, a.common.out);
    out << "model=" << to_string(spec.kind()) << " balanced=" << (spec.balanced() ? "true" : "false")
        << " train_samples=" << train_set.size() << " vocabulary=" << stamped.tfidf().dim() << "\n";
    return kExitOk;
}

struct EvalArgs {
    CommonOptions common;
    std::string model, dataset, mispredictions, k = "1,3";
    double train_ratio = 1.0;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
    const auto model = load_model(a.model);
    auto registry = registry_for_model(a.common, model);
    auto test = evaluation_corpus(import_csv(a.dataset, registry), a.train_ratio, a.common.seed);
    auto ev = evaluate_model(model, test, parse_k_list(a.k), std::filesystem::path(a.model).stem().string());
    json doc = artifact_header("attackmap.eval_report", a.common.seed,
                               {{"model", a.model}, {"dataset", a.dataset}, {"registry", a.common.registry}});
    doc["train_ratio"] = a.train_ratio;
    doc["report"] = ev.to_json();
    if (!a.common.out.empty()) write_json(a.common.out, doc);
    if (!a.mispredictions.empty()) write_file(a.mispredictions, mispredictions_csv(ev.mispredictions));
    print_report_summary(out, ev.report);
    return kExitOk;
}

struct PredictArgs {
    CommonOptions common;
    std::string model, text, input, dataset;
    std::size_t k = MappingService::kDefaultK;
    double theta = MappingService::kDefaultTheta;
};

int run_predict(const PredictArgs& a, std::ostream& out) {
    auto model = std::make_shared<const ClassifierModel>(load_model(a.model));
    if (!a.dataset.empty()) {
        require_out(a.common);
        auto registry = registry_for_model(a.common, *model);
        auto corpus = import_csv(a.dataset, registry);
        write_file(a.common.out, format_predictions(model->classes(), predict_corpus(*model, corpus)));
        out << "rows=" << corpus.size() << "\n";
        return kExitOk;
    }
    std::string text = a.text;
    if (!a.input.empty()) text = read_file(a.input);
    if (trim(text).empty()) throw ArgumentError("give --text, --input or --dataset");
    std::shared_ptr<const TechniqueRegistry> registry;
    if (!a.common.registry.empty()) registry = registry_for_model(a.common, *model);
    MappingService svc({{"model", model}}, registry);
    json result = svc.analyze({{"text", text}, {"k", a.k}, {"theta", a.theta}});
    result.erase("model_id");
    result["model"] = std::filesystem::path(a.model).stem().string();
    if (!a.common.out.empty()) {
        write_json(a.common.out, result);
    } else {
        out << result.dump(1) << "\n";
    }
    return kExitOk;
}

struct DocEvalArgs {
    CommonOptions common;
    std::string model, grid = "0.1:0.8:0.1", csv;
    std::vector<std::string> docs;
};

int run_doc_eval(const DocEvalArgs& a, std::ostream& out) {
    const auto model = load_model(a.model);
    const auto grid = parse_grid(a.grid);
    auto registry = registry_for_model(a.common, model);
    std::vector<GroundTruthDocument> docs;
    std::map<std::string, std::string> inputs{{"model", a.model}};
    for (const auto& path : expand_doc_paths(a.docs)) {
        docs.push_back(load_ground_truth(path, *registry));
        inputs["doc:" + path.filename().string()] = path.string();
    }
    auto sweep = threshold_sweep(model, docs, grid, std::filesystem::path(a.model).stem().string());
    json doc = artifact_header("attackmap.sweep_report", a.common.seed, inputs);
    doc["sweep"] = sweep.to_json();
    if (!a.common.out.empty()) write_json(a.common.out, doc);
    if (!a.csv.empty()) write_file(a.csv, sweep.to_csv());
    char buf[64];
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::snprintf(buf, sizeof buf, "theta=%.2f macro_f1=%.4f\n", grid[g], sweep.macro_f1[g]);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "best_theta=%.2f\n", sweep.best_theta);
    out << buf;
    return kExitOk;
}

struct ImportPredsArgs {
    CommonOptions common;
    std::string preds, dataset, model_id = "external", k = "1,3";
    double train_ratio = 1.0;
};

int run_import_preds(const ImportPredsArgs& a, std::ostream& out) {
    auto registry = registry_for(a.common, {a.dataset});
    auto test = evaluation_corpus(import_csv(a.dataset, registry), a.train_ratio, a.common.seed);
    auto preds = import_predictions(a.preds, *registry);
    auto ev = evaluate_rows(test, preds.rows, parse_k_list(a.k), a.model_id);
    json doc = artifact_header("attackmap.eval_report", a.common.seed,
                               {{"predictions", a.preds}, {"dataset", a.dataset}, {"registry", a.common.registry}});
    doc["train_ratio"] = a.train_ratio;
    doc["report"] = ev.to_json();
    if (!a.common.out.empty()) write_json(a.common.out, doc);
    print_report_summary(out, ev.report);
    return kExitOk;
}

struct ServeArgs {
    CommonOptions common;
    std::string data_dir, host = "127.0.0.1";
    int port = 8080;
};

int run_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
    std::string dir = a.data_dir;
    if (dir.empty()) {
        const char* env = std::getenv("ATTACK_MAPPER_DATA_DIR");
        dir = env ? env : ".";
    }
    auto svc = MappingService::from_data_dir(dir);
    for (const auto& w : svc.load_warnings()) err << "warning: " << w << "\n";
    const auto n_models = svc.models()["models"].size();
    svc.serve(a.host, a.port, [&](int port) {
        out << "serving " << n_models << " model(s) on http://" << a.host << ":" << port << "\n" << std::flush;
    });
    return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Map threat-report sentences to ATT&CK techniques", "attack-mapper"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Parse ATT&CK (and CAPEC) STIX bundles into raw samples");
    add_common(c_ingest, ingest.common);
    c_ingest->add_option("--attack", ingest.attack, "ATT&CK enterprise STIX bundle")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("--capec", ingest.capec, "CAPEC STIX bundle")->check(CLI::ExistingFile);
    c_ingest->add_option("--registry-out", ingest.registry_out, "Also write the derived technique registry");

    BuildDatasetArgs build;
    auto* c_build = app.add_subcommand("build-dataset", "Clean and split raw samples into a sentence dataset CSV");
    add_common(c_build, build.common);
    c_build->add_option("--raw", build.raw, "Raw samples JSON written by ingest")->check(CLI::ExistingFile);
    c_build->add_option("--attack", build.attack, "ATT&CK STIX bundle (instead of --raw)")->check(CLI::ExistingFile);
    c_build->add_option("--capec", build.capec, "CAPEC STIX bundle")->check(CLI::ExistingFile);

    ImportTramArgs tram;
    auto* c_tram = app.add_subcommand("import-tram", "Convert a TRAM export into a dataset CSV");
    add_common(c_tram, tram.common);
    c_tram->add_option("--tram", tram.tram, "TRAM JSON export")->required()->check(CLI::ExistingFile);

    MergeArgs merge_args;
    auto* c_merge = app.add_subcommand("merge", "Concatenate dataset CSVs that share a registry");
    add_common(c_merge, merge_args.common);
    c_merge->add_option("inputs", merge_args.inputs, "Dataset CSVs")->required()->check(CLI::ExistingFile);

    TrainArgs train_args;
    auto* c_train = app.add_subcommand("train", "Train a classifier on a dataset CSV");
    add_common(c_train, train_args.common);
    c_train->add_option("--dataset", train_args.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
    c_train->add_option("--model", train_args.model,
                        "mnb, cnb, logreg, logreg-balanced, svm-ovr, svm-ovo, mlp (or a canonical kind name)")
        ->capture_default_str();
    c_train->add_flag("--balanced", train_args.balanced, "Use balanced class weights");
    c_train->add_option("--hp", train_args.hp, "Hyperparameter override key=value (repeatable)");
    c_train->add_option("--train-ratio", train_args.train_ratio, "Train on this stratified fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    c_train->add_option("--test-out", train_args.test_out, "Write the held-out split as CSV");
    c_train->add_option("--max-features", train_args.max_features, "Vocabulary size limit")->capture_default_str();

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("eval", "Evaluate a model on a labeled dataset");
    add_common(c_eval, eval.common);
    c_eval->add_option("--model", eval.model, "Model bundle")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--dataset", eval.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--train-ratio", eval.train_ratio, "Evaluate on the test side of this split")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    c_eval->add_option("--k", eval.k, "Comma-separated k values for AC@k")->capture_default_str();
    c_eval->add_option("--mispredictions", eval.mispredictions, "Write mispredictions CSV");

    PredictArgs predict;
    auto* c_predict = app.add_subcommand("predict", "Score text, a text file, or a dataset");
    add_common(c_predict, predict.common);
    c_predict->add_option("--model", predict.model, "Model bundle")->required()->check(CLI::ExistingFile);
    c_predict->add_option("--text", predict.text, "Report text");
    c_predict->add_option("--input", predict.input, "File holding report text")->check(CLI::ExistingFile);
    c_predict->add_option("--dataset", predict.dataset, "Dataset CSV; writes a prediction file to --out")
        ->check(CLI::ExistingFile);
    c_predict->add_option("--k", predict.k, "Candidates per sentence")->capture_default_str();
    c_predict->add_option("--theta", predict.theta, "Document threshold")->capture_default_str();

    DocEvalArgs doc_eval;
    auto* c_doc = app.add_subcommand("doc-eval", "Document-level threshold sweep against ground truth");
    add_common(c_doc, doc_eval.common);
    c_doc->add_option("--model", doc_eval.model, "Model bundle")->required()->check(CLI::ExistingFile);
    c_doc->add_option("--docs", doc_eval.docs, "Ground-truth document files or directories")->required();
    c_doc->add_option("--theta-grid", doc_eval.grid, "lo:hi:step or comma list")->capture_default_str();
    c_doc->add_option("--csv", doc_eval.csv, "Write per-document plot data CSV");

    ImportPredsArgs import_preds;
    auto* c_preds = app.add_subcommand("import-preds", "Evaluate an external prediction file");
    add_common(c_preds, import_preds.common);
    c_preds->add_option("--preds", import_preds.preds, "Prediction file")->required()->check(CLI::ExistingFile);
    c_preds->add_option("--dataset", import_preds.dataset, "Dataset CSV with the true labels")
        ->required()
        ->check(CLI::ExistingFile);
    c_preds->add_option("--train-ratio", import_preds.train_ratio, "Rows correspond to the test side of this split")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    c_preds->add_option("--model-id", import_preds.model_id, "Name recorded in the report")->capture_default_str();
    c_preds->add_option("--k", import_preds.k, "Comma-separated k values for AC@k")->capture_default_str();

    ServeArgs serve;
    auto* c_serve = app.add_subcommand("serve", "Run the HTTP mapping service");
    add_common(c_serve, serve.common);
    c_serve->add_option("--data-dir", serve.data_dir, "Models/sessions root (default $ATTACK_MAPPER_DATA_DIR)");
    c_serve->add_option("--host", serve.host, "Bind address")->capture_default_str();
    c_serve->add_option("--port", serve.port, "Port")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        if (c_ingest->parsed()) return run_ingest(ingest, out);
        if (c_build->parsed()) return run_build_dataset(build, out);
        if (c_tram->parsed()) return run_import_tram(tram, out);
        if (c_merge->parsed()) return run_merge(merge_args, out);
        if (c_train->parsed()) return run_train(train_args, out);
        if (c_eval->parsed()) return run_eval(eval, out);
        if (c_predict->parsed()) return run_predict(predict, out);
        if (c_doc->parsed()) return run_doc_eval(doc_eval, out);
        if (c_preds->parsed()) return run_import_preds(import_preds, out);
        if (c_serve->parsed()) return run_serve(serve, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: missing required option " << e.what() << "\n";
        return kExitUsage;
    } catch (const ImportError& e) {
        err << "error: " << e.what();
        if (!e.rows().empty()) {
            err << " (rows:";
            for (std::size_t i = 0; i < std::min<std::size_t>(e.rows().size(), 20); ++i) err << ' ' << e.rows()[i];
            if (e.rows().size() > 20) err << " ...";
            err << ')';
        }
        err << "\n";
        return kExitDomainError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    }
    return kExitUsage;
}

}  // namespace attackmap
