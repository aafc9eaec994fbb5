#include <doctest.h>

#include <algorithm>
#include <set>

#include "attackmap/corpus.hpp"
#include "attackmap/errors.hpp"
#include "attackmap/util.hpp"
#include "fixtures.hpp"

using namespace attackmap;

namespace {

LabeledCorpus make_corpus(const std::vector<std::pair<std::string, std::string>>& rows,
                          std::shared_ptr<const TechniqueRegistry> reg) {
    std::vector<AttackSample> samples;
    for (const auto& [text, id] : rows) samples.push_back({text, id, std::nullopt, reg->name_of(id), std::nullopt});
    return LabeledCorpus(std::move(samples), reg);
}

}  // namespace

TEST_CASE("cleaning strips citations, links, tags and URLs") {
    CHECK(clean_text("Hydraq creates a backdoor(Citation: Symantec)") == "Hydraq creates a backdoor");
    CHECK(clean_text("See https://x.y/z for details") == "See for details");
    CHECK(clean_text("") == "");
    CHECK(clean_text("[FIN6](https://attack.mitre.org/groups/G0037) used <code>AdFind</code>.") == "FIN6 used AdFind.");
    CHECK(clean_text("  many   spaces\n\there ") == "many spaces here");
}

TEST_CASE("sentence splitting") {
    CHECK(split_sentences("It ran. It hid.") == std::vector<std::string>{"It ran.", "It hid."});
    CHECK(split_sentences("Tools, e.g. Mimikatz, were used.").size() == 1);
    CHECK(split_sentences("").empty());
    CHECK(split_sentences("No terminal punctuation") == std::vector<std::string>{"No terminal punctuation"});
}

TEST_CASE("dataset building splits descriptions into labeled sentences") {
    auto reg = testing::registry_of({"T1059", "T1547"});
    std::vector<RawSample> raw{
        {"First step ran. Second step hid. Third step left.", "T1059", std::nullopt, "CSI", SourceKind::attack_pattern},
        {"(Citation: Nobody)", "T1547", std::string("T1547.014"), "Active Setup", SourceKind::relationship},
    };
    auto corpus = build_dataset(raw, reg);
    REQUIRE(corpus.size() == 3);
    for (const auto& s : corpus.samples()) CHECK(s.technique_id == "T1059");
    CHECK_THROWS_AS(build_dataset({raw[1]}, reg), EmptyCorpusError);
}

TEST_CASE("CSV import reads the four columns and round-trips") {
    auto reg = testing::registry_of({"T1059", "T1547"});
    auto corpus = import_csv_string(
        "text,technique_id,subtechnique_id,technique_name\n"
        "\"PoisonIvy creates a Registry key…\",T1547,T1547.014,Active Setup\n",
        reg);
    REQUIRE(corpus.size() == 1);
    const auto& s = corpus.samples()[0];
    CHECK(s.text == "PoisonIvy creates a Registry key…");
    CHECK(s.technique_id == "T1547");
    CHECK(s.subtechnique_id == std::optional<std::string>("T1547.014"));
    CHECK(s.technique_name == "Active Setup");

    CHECK_THROWS_AS(import_csv_string("text,technique_id,subtechnique_id,technique_name\n", reg), EmptyCorpusError);
    CHECK_THROWS_AS(import_csv_string("text,technique_id,subtechnique_id,technique_name\nx,T9999,,n\n", reg),
                    ImportError);

    auto five = make_corpus({{"a, with comma", "T1059"},
                             {"b \"quoted\"", "T1547"},
                             {"c", "T1059"},
                             {"multi\nline", "T1059"},
                             {"e", "T1547"}},
                            reg);
    CHECK(import_csv_string(export_csv_string(five), reg) == five);
}

TEST_CASE("fixture corpus round-trips through CSV") {
    auto corpus = testing::fixture_corpus();
    CHECK(corpus.size() == 1000);
    CHECK(import_csv_string(export_csv_string(corpus), corpus.registry_ptr()) == corpus);
}

TEST_CASE("merge concatenates and rejects differing registries") {
    auto reg = testing::registry_of({"T1059", "T1547"});
    auto a = make_corpus({{"a1", "T1059"}, {"a2", "T1059"}, {"a3", "T1547"}}, reg);
    auto b = make_corpus({{"b1", "T1547"}, {"b2", "T1059"}}, reg);
    auto m = merge(a, b);
    CHECK(m.size() == 5);
    CHECK(m.samples()[3].text == "b1");
    auto empty = LabeledCorpus({}, reg);
    CHECK(merge(a, empty) == a);
    auto other = make_corpus({{"z", "T1003"}}, testing::registry_of({"T1003"}));
    CHECK_THROWS_AS(merge(a, other), MergeError);
}

TEST_CASE("stratified split follows the per-class floor rule") {
    auto reg = testing::registry_of({"T1001", "T1002", "T1003"});
    std::vector<std::pair<std::string, std::string>> rows;
    for (int i = 0; i < 10; ++i) rows.push_back({"A" + std::to_string(i), "T1001"});
    for (int i = 0; i < 5; ++i) rows.push_back({"B" + std::to_string(i), "T1002"});
    rows.push_back({"C0", "T1003"});
    auto corpus = make_corpus(rows, reg);
    auto split = stratified_split(corpus, 0.8, 42);
    CHECK(split.train.stats().class_counts.at("T1001") == 8);
    CHECK(split.train.stats().class_counts.at("T1002") == 4);
    CHECK(split.train.stats().class_counts.at("T1003") == 1);
    CHECK(split.test.stats().class_counts.at("T1001") == 2);
    CHECK(split.test.stats().class_counts.at("T1002") == 1);
    CHECK(split.test.stats().class_counts.count("T1003") == 0);

    auto again = stratified_split(corpus, 0.8, 42);
    CHECK(again.test_indices == split.test_indices);
    CHECK(again.train_indices == split.train_indices);

    std::set<std::size_t> all(split.train_indices.begin(), split.train_indices.end());
    all.insert(split.test_indices.begin(), split.test_indices.end());
    CHECK(all.size() == corpus.size());

    bool any_different = false;
    for (std::uint64_t seed = 0; seed < 10 && !any_different; ++seed) {
        any_different = stratified_split(corpus, 0.8, seed).test_indices != split.test_indices;
    }
    CHECK(any_different);
}

TEST_CASE("TRAM import maps ids and reports unknown ones") {
    auto reg = testing::attack_registry();
    ImportReport report;
    auto corpus = import_tram_string(R"({"sentences": [
        {"text": "They ran PowerShell.", "mappings": [{"attack_id": "T1059.001"}]},
        {"text": "They dumped credentials and ran scripts.", "mappings": [{"attack_id": "T1003"}, {"attack_id": "T1059"}]},
        {"sentence": "Unknown thing.", "attack_id": "T9999"}
    ]})",
                                     reg, &report);
    CHECK(corpus.size() == 3);
    CHECK(corpus.samples()[0].technique_id == "T1059");
    CHECK(report.records == 3);
    CHECK(report.rejected.size() == 1);
    CHECK_THROWS_AS(import_tram_string("[]", reg), EmptyCorpusError);

    auto mini = import_tram(testing::data_dir() / "tram" / "tram-mini.json", reg);
    CHECK(mini.size() > 0);
    CHECK(mini.stats().n_classes_present <= 80);
}

TEST_CASE("ground truth documents load and validate ids") {
    const auto doc = load_ground_truth(testing::data_dir() / "docs" / "doc-ryuk-return.json", *testing::attack_registry());
    CHECK(doc.doc_id == "doc-ryuk-return");
    CHECK(doc.sentences.size() == 19);
    CHECK(doc.techniques.size() == 10);
    const auto back = ground_truth_from_json(ground_truth_to_json(doc), *testing::attack_registry());
    CHECK(back.techniques == doc.techniques);
    CHECK(back.sentences == doc.sentences);
}
