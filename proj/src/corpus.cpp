#include "attackmap/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "attackmap/errors.hpp"
#include "attackmap/util.hpp"

namespace attackmap {

using nlohmann::json;

bool same_content(const AttackSample& a, const AttackSample& b) {
    return a.text == b.text && a.technique_id == b.technique_id && a.subtechnique_id == b.subtechnique_id &&
           a.technique_name == b.technique_name;
}

// ---------------------------------------------------------------------------
// LabeledCorpus

LabeledCorpus::LabeledCorpus(std::vector<AttackSample> samples, std::shared_ptr<const TechniqueRegistry> registry)
    : samples_(std::move(samples)), registry_(std::move(registry)) {
    if (!registry_) {
        throw ArgumentError("corpus requires a registry");
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (!registry_->contains(s.technique_id)) {
            throw ArgumentError("sample " + std::to_string(i) + " has label " + s.technique_id +
                                " outside the registry");
        }
        if (s.text.empty()) {
            throw ArgumentError("sample " + std::to_string(i) + " has empty text");
        }
        ++stats_.class_counts[s.technique_id];
    }
    stats_.n_samples = samples_.size();
    stats_.n_classes_present = stats_.class_counts.size();
}

std::vector<std::size_t> LabeledCorpus::labels() const {
    std::vector<std::size_t> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(*registry_->index_of(s.technique_id));
    return out;
}

std::vector<std::size_t> LabeledCorpus::class_count_vector() const {
    std::vector<std::size_t> counts(registry_->size(), 0);
    for (const auto& [id, n] : stats_.class_counts) counts[*registry_->index_of(id)] = n;
    return counts;
}

std::vector<std::string> LabeledCorpus::texts() const {
    std::vector<std::string> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.text);
    return out;
}

std::string LabeledCorpus::fingerprint() const {
    Fingerprint fp;
    fp.add(registry_->fingerprint());
    fp.add(static_cast<std::uint64_t>(samples_.size()));
    for (const auto& s : samples_) {
        fp.add(s.text).add(s.technique_id).add(s.subtechnique_id.value_or("")).add(s.technique_name);
    }
    return fp.hex();
}

LabeledCorpus LabeledCorpus::subset(const std::vector<std::size_t>& indices) const {
    std::vector<AttackSample> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(samples_.at(i));
    return LabeledCorpus(std::move(out), registry_);
}

bool LabeledCorpus::operator==(const LabeledCorpus& other) const {
    if (registry_->fingerprint() != other.registry_->fingerprint()) return false;
    if (samples_.size() != other.samples_.size()) return false;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!same_content(samples_[i], other.samples_[i])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Cleaning and sentence splitting

std::string clean_text(std::string_view raw) {
    static const std::regex citation(R"(\(\s*[Cc]itation:[^)]*\))");
    static const std::regex md_link(R"(\[([^\]]*)\]\(([^)\s]*)\))");
    static const std::regex inline_tag(R"(</?(code|b|i|em|strong|a|span|tt)(\s[^>]*)?>)", std::regex::icase);
    static const std::regex any_tag(R"(</?[A-Za-z][^>]*>)");
    static const std::regex url(R"((https?|ftp)://[^\s)\]>"]+|\bwww\.[^\s)\]>"]+)", std::regex::icase);
    static const std::regex empty_parens(R"(\(\s*\))");
    static const std::regex space_before_punct(R"(\s+([.,;:!?]))");

    std::string s(raw);
    s = std::regex_replace(s, citation, "");
    s = std::regex_replace(s, md_link, "$1");
    s = std::regex_replace(s, inline_tag, "");
    s = std::regex_replace(s, any_tag, " ");
    s = std::regex_replace(s, url, "");
    s = std::regex_replace(s, empty_parens, "");

    std::string collapsed;
    collapsed.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !collapsed.empty();
            continue;
        }
        if (pending_space) collapsed.push_back(' ');
        pending_space = false;
        collapsed.push_back(c);
    }
    return std::regex_replace(collapsed, space_before_punct, "$1");
}

namespace {

const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> list = {
        "e.g.", "i.e.", "etc.", "vs.", "cf.", "al.", "approx.", "fig.", "no.", "nos.", "inc.", "ltd.", "co.",
        "corp.", "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.",
        "aug.", "sep.", "sept.", "oct.", "nov.", "dec.", "u.s.", "u.k.", "ver.", "vol.", "resp."};
    return list;
}

bool is_closing(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_opening(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

/// Token ending at `dot` (inclusive), stripped of leading opening punctuation.
std::string token_ending_at(std::string_view text, std::size_t dot) {
    std::size_t b = dot;
    while (b > 0 && !is_space(text[b - 1])) --b;
    while (b < dot && is_opening(text[b])) ++b;
    return std::string(text.substr(b, dot - b + 1));
}

bool is_abbreviation(const std::string& token) {
    if (abbreviations().count(to_lower_ascii(token))) return true;
    // Single capital initial, e.g. "J."
    if (token.size() == 2 && std::isupper(static_cast<unsigned char>(token[0]))) return true;
    // Dotted initialisms like "U.S.A."
    if (token.size() >= 4) {
        bool dotted = true;
        for (std::size_t i = 0; i < token.size(); ++i) {
            bool want_dot = (i % 2) == 1;
            if (want_dot ? token[i] != '.' : !std::isalpha(static_cast<unsigned char>(token[i]))) {
                dotted = false;
                break;
            }
        }
        if (dotted && token.size() % 2 == 0) return true;
    }
    return false;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    const std::size_t n = text.size();
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i + 1;
        while (j < n && (text[j] == '.' || text[j] == '!' || text[j] == '?' || is_closing(text[j]))) ++j;
        if (j >= n || !is_space(text[j])) continue;
        std::size_t k = j;
        while (k < n && is_space(text[k])) ++k;
        if (k >= n) continue;
        std::size_t first = k;
        while (first < n && is_opening(text[first])) ++first;
        if (first >= n) continue;
        unsigned char next = static_cast<unsigned char>(text[first]);
        if (!std::isupper(next) && !std::isdigit(next)) continue;
        if (c == '.' && j == i + 1 && is_abbreviation(token_ending_at(text, i))) continue;

        auto sentence = trim(text.substr(start, j - start));
        if (!sentence.empty()) out.push_back(std::move(sentence));
        start = k;
        i = k - 1;
    }
    if (start < n) {
        auto sentence = trim(text.substr(start));
        if (!sentence.empty()) out.push_back(std::move(sentence));
    }
    return out;
}

LabeledCorpus build_dataset(const std::vector<RawSample>& raw, std::shared_ptr<const TechniqueRegistry> registry) {
    std::vector<AttackSample> samples;
    for (const auto& r : raw) {
        for (auto& sentence : split_sentences(clean_text(r.text))) {
            samples.push_back({std::move(sentence), r.technique_id, r.subtechnique_id, r.technique_name,
                               r.source_kind});
        }
    }
    if (samples.empty()) {
        throw EmptyCorpusError("no samples survived cleaning");
    }
    return LabeledCorpus(std::move(samples), std::move(registry));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr std::string_view kCsvHeader = "text,technique_id,subtechnique_id,technique_name";

struct CsvRow {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

std::vector<CsvRow> parse_csv(std::string_view text) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    std::size_t line = 1;
    row.line = 1;
    bool in_quotes = false, field_started = false, was_quoted = false;
    auto end_field = [&] {
        row.fields.push_back(std::move(field));
        field.clear();
        field_started = was_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.fields.size() == 1 && row.fields[0].empty())) rows.push_back(std::move(row));
        row = CsvRow{};
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            if (field_started) throw ParseError("unexpected quote inside unquoted field", line);
            if (was_quoted) throw ParseError("unexpected quote after quoted field", line);
            in_quotes = was_quoted = field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_row();
            ++line;
            row.line = line;
        } else {
            if (was_quoted) throw ParseError("characters after closing quote", line);
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field", line);
    if (field_started || was_quoted || !row.fields.empty()) end_row();
    return rows;
}

}  // namespace

std::string export_csv_string(const LabeledCorpus& corpus) {
    std::string out(kCsvHeader);
    out.push_back('\n');
    for (const auto& s : corpus.samples()) {
        append_csv_field(out, s.text);
        out.push_back(',');
        append_csv_field(out, s.technique_id);
        out.push_back(',');
        append_csv_field(out, s.subtechnique_id.value_or(""));
        out.push_back(',');
        append_csv_field(out, s.technique_name);
        out.push_back('\n');
    }
    return out;
}

void export_csv(const LabeledCorpus& corpus, const std::filesystem::path& path) {
    write_file(path, export_csv_string(corpus));
}

namespace {

std::vector<CsvRow> dataset_rows(std::string_view text) {
    auto rows = parse_csv(text);
    if (rows.empty()) throw ParseError("missing CSV header", 1);
    std::string header;
    for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
        if (i) header.push_back(',');
        header += trim(rows[0].fields[i]);
    }
    if (header != kCsvHeader) {
        throw ParseError("unexpected CSV header '" + header + "'", rows[0].line);
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].fields.size() != 4) {
            throw ParseError("expected 4 fields, found " + std::to_string(rows[r].fields.size()), rows[r].line);
        }
    }
    rows.erase(rows.begin());
    return rows;
}

}  // namespace

LabeledCorpus import_csv_string(std::string_view text, std::shared_ptr<const TechniqueRegistry> registry) {
    auto rows = dataset_rows(text);
    if (rows.empty()) throw EmptyCorpusError("dataset has a header but no rows");
    std::vector<AttackSample> samples;
    std::vector<std::size_t> bad_rows;
    std::string bad_ids;
    for (const auto& row : rows) {
        auto parent = registry->resolve(trim(row.fields[1]));
        if (!parent) {
            bad_rows.push_back(row.line);
            if (bad_ids.size() < 200) bad_ids += (bad_ids.empty() ? "" : ", ") + row.fields[1];
            continue;
        }
        AttackSample s;
        s.text = row.fields[0];
        s.technique_id = *parent;
        auto sub = trim(row.fields[2]);
        if (!sub.empty()) s.subtechnique_id = sub;
        s.technique_name = row.fields[3].empty() ? registry->name_of(sub.empty() ? *parent : sub) : row.fields[3];
        if (trim(s.text).empty()) {
            throw ParseError("empty text", row.line);
        }
        samples.push_back(std::move(s));
    }
    if (!bad_rows.empty()) {
        std::string lines;
        for (std::size_t i = 0; i < bad_rows.size() && i < 20; ++i) lines += (i ? "," : "") + std::to_string(bad_rows[i]);
        throw ImportError("unknown technique ids (" + bad_ids + ") on lines " + lines, bad_rows);
    }
    return LabeledCorpus(std::move(samples), std::move(registry));
}

LabeledCorpus import_csv(const std::filesystem::path& path, std::shared_ptr<const TechniqueRegistry> registry) {
    return import_csv_string(read_file(path), std::move(registry));
}

TechniqueRegistry registry_from_csv(const std::filesystem::path& path) {
    auto rows = dataset_rows(read_file(path));
    std::map<std::string, std::string> parent_names;
    std::map<std::string, std::string> sub_names;
    for (const auto& row : rows) {
        auto id = trim(row.fields[1]);
        auto parent = parent_technique_id(id);
        if (!is_technique_id(parent)) {
            throw ImportError("malformed technique id " + id, {row.line});
        }
        auto sub = trim(row.fields[2]);
        if (is_subtechnique_id(id) && sub.empty()) sub = id;
        auto& name = parent_names[parent];
        if (sub.empty() || sub == parent) {
            if (name.empty()) name = row.fields[3];
        } else if (is_subtechnique_id(sub)) {
            sub_names.emplace(sub, row.fields[3]);
        }
    }
    std::vector<TechniqueRef> refs;
    for (auto& [id, name] : parent_names) refs.push_back({id, name, {}});
    return TechniqueRegistry(std::move(refs), std::move(sub_names));
}

// ---------------------------------------------------------------------------
// TRAM import

json ImportReport::to_json() const {
    json rej = json::array();
    for (const auto& [pos, id] : rejected) rej.push_back({{"record", pos}, {"technique_id", id}});
    return {{"records", records}, {"accepted", accepted}, {"rejected", std::move(rej)}};
}

LabeledCorpus import_tram_string(std::string_view text, std::shared_ptr<const TechniqueRegistry> registry,
                                 ImportReport* report) {
    ImportReport scratch;
    ImportReport& rep = report ? *report : scratch;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed TRAM JSON: ") + e.what());
    }
    const json* records = nullptr;
    if (doc.is_array()) {
        records = &doc;
    } else if (doc.is_object() && doc.contains("sentences") && doc["sentences"].is_array()) {
        records = &doc["sentences"];
    } else {
        throw SchemaError("TRAM export must be an array or an object with a 'sentences' array");
    }
    std::vector<AttackSample> samples;
    rep.records = records->size();
    for (std::size_t pos = 0; pos < records->size(); ++pos) {
        const json& rec = (*records)[pos];
        if (!rec.is_object()) throw SchemaError("TRAM record " + std::to_string(pos) + " is not an object");
        std::string raw_text;
        if (rec.contains("text") && rec["text"].is_string()) raw_text = rec["text"];
        else if (rec.contains("sentence") && rec["sentence"].is_string()) raw_text = rec["sentence"];
        std::string cleaned = clean_text(raw_text);

        std::vector<std::string> ids;
        if (rec.contains("mappings") && rec["mappings"].is_array()) {
            for (const auto& m : rec["mappings"]) {
                if (m.is_object() && m.contains("attack_id") && m["attack_id"].is_string()) ids.push_back(m["attack_id"]);
                else if (m.is_string()) ids.push_back(m.get<std::string>());
            }
        }
        for (const char* key : {"attack_id", "technique_id", "label"}) {
            if (rec.contains(key) && rec[key].is_string()) ids.push_back(rec[key]);
        }
        if (cleaned.empty() || ids.empty()) {
            rep.rejected.emplace_back(pos, ids.empty() ? std::string() : ids.front());
            continue;
        }
        for (const auto& id : ids) {
            auto parent = registry->resolve(trim(id));
            if (!parent) {
                rep.rejected.emplace_back(pos, id);
                continue;
            }
            AttackSample s;
            s.text = cleaned;
            s.technique_id = *parent;
            if (is_subtechnique_id(trim(id))) s.subtechnique_id = trim(id);
            s.technique_name = registry->name_of(s.subtechnique_id.value_or(*parent));
            samples.push_back(std::move(s));
        }
    }
    rep.accepted = samples.size();
    if (samples.empty()) {
        throw EmptyCorpusError("TRAM export yielded no samples");
    }
    return LabeledCorpus(std::move(samples), std::move(registry));
}

LabeledCorpus import_tram(const std::filesystem::path& path, std::shared_ptr<const TechniqueRegistry> registry,
                          ImportReport* report) {
    return import_tram_string(read_file(path), std::move(registry), report);
}

// ---------------------------------------------------------------------------
// Merge and split

LabeledCorpus merge(const LabeledCorpus& a, const LabeledCorpus& b) {
    if (a.registry().fingerprint() != b.registry().fingerprint()) {
        throw MergeError("cannot merge corpora over different registries (" + a.registry().fingerprint() + " vs " +
                         b.registry().fingerprint() + ")");
    }
    std::vector<AttackSample> samples = a.samples();
    samples.insert(samples.end(), b.samples().begin(), b.samples().end());
    return LabeledCorpus(std::move(samples), a.registry_ptr());
}

SplitPair stratified_split(const LabeledCorpus& corpus, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ArgumentError("split ratio must lie in (0, 1)");
    }
    if (corpus.empty()) {
        throw EmptyCorpusError("cannot split an empty corpus");
    }
    const auto labels = corpus.labels();
    std::vector<std::vector<std::size_t>> by_class(corpus.registry().size());
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    Rng rng(seed);
    std::vector<std::size_t> train, test;
    for (auto& members : by_class) {
        if (members.empty()) continue;
        const double n = static_cast<double>(members.size());
        // The epsilon absorbs representation error in (1 - ratio), e.g. 10 * 0.19999999999999996.
        std::size_t n_test = members.size() == 1 ? 0 : static_cast<std::size_t>(std::floor(n * (1.0 - ratio) + 1e-9));
        rng.shuffle(members);
        test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
        train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    SplitPair out{corpus.subset(train), corpus.subset(test), seed, ratio, std::move(train), std::move(test)};
    return out;
}

// ---------------------------------------------------------------------------
// Ground-truth documents

GroundTruthDocument ground_truth_from_json(const json& doc, const TechniqueRegistry& registry) {
    GroundTruthDocument out;
    try {
        out.doc_id = doc.at("doc_id").get<std::string>();
        out.title = doc.value("title", "");
        out.source_url = doc.value("source_url", "");
        for (const auto& s : doc.at("sentences")) out.sentences.push_back(s.get<std::string>());
        std::vector<std::size_t> bad;
        std::string bad_ids;
        std::size_t pos = 0;
        for (const auto& t : doc.at("techniques")) {
            auto id = t.get<std::string>();
            if (auto parent = registry.resolve(id)) {
                out.techniques.insert(*parent);
            } else {
                bad.push_back(pos);
                bad_ids += (bad_ids.empty() ? "" : ", ") + id;
            }
            ++pos;
        }
        if (!bad.empty()) {
            throw ImportError("document " + out.doc_id + " references unknown techniques: " + bad_ids, bad);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed ground-truth document: ") + e.what());
    }
    if (out.sentences.empty()) {
        throw SchemaError("document " + out.doc_id + " has no sentences");
    }
    return out;
}

GroundTruthDocument load_ground_truth(const std::filesystem::path& path, const TechniqueRegistry& registry) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return ground_truth_from_json(doc, registry);
}

json ground_truth_to_json(const GroundTruthDocument& doc) {
    return {{"doc_id", doc.doc_id},
            {"title", doc.title},
            {"source_url", doc.source_url},
            {"sentences", doc.sentences},
            {"techniques", doc.techniques}};
}

}  // namespace attackmap
