#include "fixtures.hpp"

#include <cstdio>

namespace attackmap::testing {

std::filesystem::path data_dir() { return ATTACKMAP_TEST_DATA_DIR; }

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::path(ATTACKMAP_TEST_SCRATCH_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::shared_ptr<const TechniqueRegistry> registry_of(const std::vector<std::string>& ids) {
    std::vector<TechniqueRef> refs;
    for (const auto& id : ids) refs.push_back({id, "name of " + id, {}});
    return std::make_shared<const TechniqueRegistry>(std::move(refs));
}

std::shared_ptr<const TechniqueRegistry> attack_registry() {
    static const auto reg = std::make_shared<const TechniqueRegistry>(
        load_registry(data_dir() / "stix" / "enterprise-attack-mini.json"));
    return reg;
}

LabeledCorpus fixture_corpus() {
    const auto path = data_dir() / "corpus" / "fixture-1000.csv";
    static const auto reg = std::make_shared<const TechniqueRegistry>(registry_from_csv(path));
    return import_csv(path, reg);
}

ModelContext plain_context(std::size_t dim, std::size_t n_classes) {
    std::vector<std::string> terms;
    for (std::size_t f = 0; f < dim; ++f) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "f%04zu", f);
        terms.emplace_back(buf);
    }
    ModelContext ctx;
    for (std::size_t c = 0; c < n_classes; ++c) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "T%04zu", 1000 + c);
        ctx.classes.emplace_back(buf);
    }
    std::vector<TechniqueRef> refs;
    for (const auto& id : ctx.classes) refs.push_back({id, "", {}});
    ctx.registry_fingerprint = TechniqueRegistry(std::move(refs)).fingerprint();
    ctx.tfidf = TfidfModel(VectorizerConfig{}, std::move(terms), std::vector<double>(dim, 1.0), "hand-built");
    return ctx;
}

FeatureVector dense_to_sparse(const std::vector<double>& dense) {
    FeatureVector v;
    v.dim = dense.size();
    for (std::size_t f = 0; f < dense.size(); ++f) {
        if (dense[f] != 0.0) v.entries.push_back({static_cast<std::uint32_t>(f), dense[f]});
    }
    return v;
}

}  // namespace attackmap::testing
