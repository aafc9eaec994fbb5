#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "attackmap/errors.hpp"
#include "attackmap/textprep.hpp"
#include "fixtures.hpp"

using namespace attackmap;

namespace {

std::vector<double> dense(const FeatureVector& v) {
    std::vector<double> out(v.dim, 0.0);
    for (const auto& e : v.entries) out[e.index] = e.weight;
    return out;
}

void check_close(const std::vector<double>& got, const std::vector<double>& want, double tol) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

}  // namespace

TEST_CASE("normalization: lowercase, split, stopwords, stemming") {
    CHECK(normalize_tokens("Exploits exploiting the exploit") == Tokens{"exploit", "exploit", "exploit"});
    CHECK(normalize_tokens("the of and").empty());
    CHECK(normalize_tokens("T1059 PowerShell") == Tokens{"t1059", "powershel"});
    PrepConfig raw;
    raw.stem = false;
    raw.stopword_list_id = "none";
    CHECK(normalize_tokens("The x-ray, of ALL", raw) == Tokens{"the", "ray", "of", "all"});
    CHECK_THROWS_AS(stopword_list("klingon"), ArgumentError);
}

TEST_CASE("Porter stemmer matches the reference golden list") {
    std::ifstream in(testing::data_dir() / "porter" / "golden.tsv");
    REQUIRE(in.good());
    std::string line;
    std::size_t checked = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        REQUIRE(tab != std::string::npos);
        const auto word = line.substr(0, tab);
        const auto stem = line.substr(tab + 1);
        INFO(word);
        CHECK(porter_stem(word) == stem);
        ++checked;
    }
    CHECK(checked > 400);
}

TEST_CASE("n-grams are joined by one space") {
    CHECK(ngrams({"a", "b", "c"}, 1, 2) == std::vector<std::string>{"a", "b", "c", "a b", "b c"});
    CHECK(ngrams({"a"}, 2, 2).empty());
}

TEST_CASE("idf follows the smoothed formula") {
    CHECK(smoothed_idf(2, 2) == 1.0);
    CHECK(smoothed_idf(1, 1) == 1.0);
    CHECK(std::abs(smoothed_idf(2, 1) - (std::log(1.5) + 1.0)) < 1e-15);
    for (std::size_t n = 1; n < 30; ++n) {
        for (std::size_t df = 1; df <= n; ++df) {
            CHECK(smoothed_idf(n, df) == doctest::Approx(std::log((1.0 + n) / (1.0 + df)) + 1.0).epsilon(1e-15));
            CHECK(smoothed_idf(n, df) >= 1.0);
        }
    }
}

// Expected values below were produced by an independent TF-IDF
// implementation (smoothed idf, raw tf, L2 norm) over the same n-gram lists.
TEST_CASE("two-document corpus golden vectors") {
    auto m = fit_vectorizer({{"a", "b"}, {"a"}});
    CHECK(m.terms() == std::vector<std::string>{"a", "a b", "b"});
    check_close(m.idf(), {1.0, 1.4054651081081644, 1.4054651081081644}, 1e-12);
    check_close(dense(vectorize(m, {"a", "b"})), {0.44943641652398209, 0.63166720173762447, 0.63166720173762447}, 1e-12);
    check_close(dense(vectorize(m, {"a", "a", "b"})), {0.70929726660627368, 0.49844627974580596, 0.49844627974580596},
                1e-12);
    VectorizerConfig top1;
    top1.max_features = 1;
    CHECK(fit_vectorizer({{"a", "b"}, {"a"}}, top1).terms() == std::vector<std::string>{"a"});
    CHECK(fit_vectorizer({{"x"}}).idf() == std::vector<double>{1.0});
}

TEST_CASE("four-document corpus golden vectors") {
    const std::vector<Tokens> docs{{"a", "b"}, {"a"}, {"a", "c", "c"}, {"b", "c", "d"}};
    auto m = fit_vectorizer(docs);
    CHECK(m.terms() == std::vector<std::string>{"a", "a b", "a c", "b", "b c", "c", "c c", "c d", "d"});
    check_close(m.idf(),
                {1.2231435513142097, 1.9162907318741551, 1.9162907318741551, 1.5108256237659907, 1.9162907318741551,
                 1.5108256237659907, 1.9162907318741551, 1.9162907318741551, 1.9162907318741551},
                1e-12);
    const std::vector<std::vector<double>> want{
        {0.44809973136259862, 0.70203481941496193, 0, 0.55349231528700449, 0, 0, 0, 0, 0},
        {1, 0, 0, 0, 0, 0, 0, 0, 0},
        {0.28853185230756812, 0, 0.45204090217652604, 0, 0, 0.71278847894928032, 0.45204090217652604, 0, 0},
        {0, 0, 0, 0.3827427224171519, 0.4854606118156975, 0.3827427224171519, 0, 0.4854606118156975,
         0.4854606118156975},
    };
    for (std::size_t d = 0; d < docs.size(); ++d) check_close(dense(vectorize(m, docs[d])), want[d], 1e-12);
    check_close(dense(vectorize(m, {"a", "a", "b"})),
                {0.70798149562027102, 0.55459491117695059, 0, 0.43724899811882306, 0, 0, 0, 0, 0}, 1e-12);

    VectorizerConfig sub;
    sub.sublinear_tf = true;
    auto ms = fit_vectorizer(docs, sub);
    check_close(dense(vectorize(ms, {"a", "a", "b", "c", "c", "c"})),
                {0.35260472861489389, 0.32627018526073059, 0, 0.25723516163995119, 0.32627018526073059,
                 0.53983687129512914, 0.55242344427497703, 0, 0},
                1e-12);
}

TEST_CASE("vectorize edge cases and invariants") {
    auto m = fit_vectorizer({{"a", "b"}, {"a"}});
    auto empty = vectorize(m, {});
    CHECK(empty.dim == 3);
    CHECK(empty.empty());
    CHECK(vectorize(m, {"zzz", "yyy"}).empty());
    CHECK_THROWS_AS(fit_vectorizer({{}, {}}), FitError);

    auto corpus = testing::fixture_corpus();
    std::vector<Tokens> tokens;
    for (const auto& s : corpus.samples()) tokens.push_back(normalize_tokens(s.text));
    VectorizerConfig cfg;
    cfg.max_features = 500;
    auto big = fit_vectorizer(tokens, cfg);
    CHECK(big.dim() == 500);
    CHECK(std::is_sorted(big.terms().begin(), big.terms().end()));
    for (double v : big.idf()) CHECK(v >= 1.0);
    for (std::size_t i = 0; i < 50; ++i) {
        auto v = vectorize(big, tokens[i]);
        if (!v.empty()) CHECK(std::abs(v.squared_norm() - 1.0) < 1e-12);
        for (std::size_t e = 1; e < v.entries.size(); ++e) CHECK(v.entries[e - 1].index < v.entries[e].index);
    }
    auto again = fit_vectorizer(tokens, cfg);
    CHECK(again.terms() == big.terms());
    CHECK(again.idf() == big.idf());
    CHECK(TfidfModel::from_json(big.to_json()).idf() == big.idf());
}
