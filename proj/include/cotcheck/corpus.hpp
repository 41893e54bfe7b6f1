#pragma once

/**
 * corpus.hpp — dataset model, question-complexity scoring, hop categories.
 *
 * Two distinct complexity scorers coexist on purpose and are never merged:
 *   score_complexity  integer c in [1,4] from three binary indicators
 *   hop_complexity    real h in [1,4] from saturated linguistic features
 * and `categorize` supports the two bucketing conventions they feed
 * (CategorizeMode::question maps c=1 to 1-hop; CategorizeMode::annotated
 * maps hop count 0 to 1-hop).
 */

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cotcheck/textkit.hpp"

namespace cotcheck {

struct QaRecord {
    std::string id;
    std::string question;
    std::string gold_answer;
    std::optional<std::vector<std::string>> gold_path;
    std::optional<std::string> time_scope;
    std::optional<int> annotated_hops;
};

enum class HopCategory { one_hop, two_hop, three_hop, four_plus_hop };

inline const char* to_string(HopCategory c) {
    switch (c) {
        case HopCategory::one_hop: return "1-hop";
        case HopCategory::two_hop: return "2-hop";
        case HopCategory::three_hop: return "3-hop";
        case HopCategory::four_plus_hop: return "4+-hop";
    }
    return "?";
}

inline const std::vector<HopCategory>& all_hop_categories() {
    static const std::vector<HopCategory> v = {
        HopCategory::one_hop, HopCategory::two_hop, HopCategory::three_hop,
        HopCategory::four_plus_hop};
    return v;
}

enum class CategorizeMode { question, annotated };

inline const char* to_string(CategorizeMode m) {
    return m == CategorizeMode::question ? "question" : "annotated";
}

/// True when the text contains a standalone 4-digit token in [1000, 2999].
inline bool has_year_token(std::string_view text) {
    for (const auto& w : detail::boundary_words(text)) {
        if (w.size() != 4) continue;
        bool digits = true;
        for (char c : w) digits = digits && detail::is_digit(c);
        if (!digits) continue;
        const int v = std::stoi(w);
        if (v >= 1000 && v <= 2999) return true;
    }
    return false;
}

namespace detail {

/// Capitalized-word occurrences, skipping the first word of each sentence.
inline int capitalized_word_count(std::string_view text) {
    int count = 0;
    for (const auto& sentence : split_sentences(text).sentences) {
        std::istringstream words(sentence);
        std::string w;
        bool first = true;
        while (words >> w) {
            if (!first && std::isupper(static_cast<unsigned char>(w[0]))) ++count;
            first = false;
        }
    }
    return count;
}

}  // namespace detail

/// Heuristic hop count c(q) = min(4, 1 + [multi-sentence] + [clausal] + [time]).
inline int score_complexity(std::string_view question, bool time_scope_annotated) {
    int c = 1;
    if (split_sentences(question).sentences.size() > 1) ++c;
    if (split_clauses(question) > 1) ++c;
    if (time_scope_annotated || has_year_token(question)) ++c;
    return std::min(4, c);
}

/// Real-valued hop complexity
///   h = min(4, max(1, 1 + min(1, s-1) + min(1, (c-1)/2) + min(1, w/3) + 1_time))
/// with s = sentences, c = clauses, w = capitalized words (sentence-initial
/// words excluded).
inline double hop_complexity(std::string_view question, bool time_scope_annotated) {
    const double s = static_cast<double>(split_sentences(question).sentences.size());
    const double c = static_cast<double>(split_clauses(question));
    const double w = static_cast<double>(detail::capitalized_word_count(question));
    const double time = (time_scope_annotated || has_year_token(question)) ? 1.0 : 0.0;
    const double h = 1.0 + std::min(1.0, s - 1.0) + std::min(1.0, (c - 1.0) / 2.0) +
                     std::min(1.0, w / 3.0) + time;
    return std::min(4.0, std::max(1.0, h));
}

/// Bucketing. question mode: c<=1 -> 1-hop, 2 -> 2-hop, 3 -> 3-hop, >=4 -> 4+.
/// annotated mode: h=0 -> 1-hop, 1 -> 2-hop, 2 -> 3-hop, >=3 -> 4+.
inline HopCategory categorize(int value, CategorizeMode mode) {
    if (value < 0) throw std::invalid_argument("categorize: negative hop value");
    if (mode == CategorizeMode::question) {
        if (value <= 1) return HopCategory::one_hop;
        if (value == 2) return HopCategory::two_hop;
        if (value == 3) return HopCategory::three_hop;
        return HopCategory::four_plus_hop;
    }
    if (value == 0) return HopCategory::one_hop;
    if (value == 1) return HopCategory::two_hop;
    if (value == 2) return HopCategory::three_hop;
    return HopCategory::four_plus_hop;
}

/// Category of a record under the configured mode. annotated mode uses the
/// record's hop annotation when present, else floor(h(q)).
inline HopCategory categorize_record(const QaRecord& r, CategorizeMode mode) {
    const bool annotated = r.time_scope.has_value();
    if (mode == CategorizeMode::question) {
        return categorize(score_complexity(r.question, annotated), mode);
    }
    const int value = r.annotated_hops
                          ? *r.annotated_hops
                          : static_cast<int>(std::floor(hop_complexity(r.question, annotated)));
    return categorize(value, mode);
}

namespace detail {

inline QaRecord record_from_json(const nlohmann::json& j, std::size_t line_no) {
    const auto fail = [line_no](const std::string& what) -> std::runtime_error {
        return std::runtime_error("line " + std::to_string(line_no) + ": " + what);
    };
    if (!j.is_object()) throw fail("expected a JSON object");
    QaRecord r;
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
        throw fail("missing or empty string field 'id'");
    }
    r.id = j["id"].get<std::string>();
    if (!j.contains("question") || !j["question"].is_string() ||
        j["question"].get<std::string>().empty()) {
        throw fail("missing or empty string field 'question'");
    }
    r.question = j["question"].get<std::string>();
    if (!j.contains("answer") || !j["answer"].is_string() ||
        j["answer"].get<std::string>().empty()) {
        throw fail("missing or empty string field 'answer'");
    }
    r.gold_answer = j["answer"].get<std::string>();
    if (j.contains("reasoning_path") && !j["reasoning_path"].is_null()) {
        if (!j["reasoning_path"].is_array()) throw fail("'reasoning_path' must be an array");
        std::vector<std::string> path;
        for (const auto& h : j["reasoning_path"]) {
            if (!h.is_string() || h.get<std::string>().empty()) {
                throw fail("'reasoning_path' entries must be non-empty strings");
            }
            path.push_back(h.get<std::string>());
        }
        r.gold_path = std::move(path);
    }
    if (j.contains("time_scope") && !j["time_scope"].is_null()) {
        const auto& ts = j["time_scope"];
        if (ts.is_boolean()) {
            if (ts.get<bool>()) r.time_scope = "true";
        } else if (ts.is_string()) {
            if (!ts.get<std::string>().empty()) r.time_scope = ts.get<std::string>();
        } else {
            throw fail("'time_scope' must be a string or boolean");
        }
    }
    if (j.contains("hops") && !j["hops"].is_null()) {
        if (!j["hops"].is_number_integer() || j["hops"].get<int>() < 0) {
            throw fail("'hops' must be a non-negative integer");
        }
        r.annotated_hops = j["hops"].get<int>();
    }
    return r;
}

}  // namespace detail

/// Reads the canonical JSON-lines corpus. Unknown fields are ignored (variant
/// corpora add kind/seed/original_id). Malformed lines and duplicate ids fail
/// with line numbers.
inline std::vector<QaRecord> ingest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());
    std::vector<QaRecord> records;
    std::map<std::string, std::size_t> seen;  // id -> line
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": invalid JSON (" + e.what() + ")");
        }
        if (j.is_object() && j.contains("_header")) continue;  // provenance line
        QaRecord r = detail::record_from_json(j, line_no);
        auto [it, inserted] = seen.emplace(r.id, line_no);
        if (!inserted) {
            throw std::runtime_error("duplicate id '" + r.id + "' at line " +
                                     std::to_string(line_no) + " (first at line " +
                                     std::to_string(it->second) + ")");
        }
        records.push_back(std::move(r));
    }
    return records;
}

inline nlohmann::json to_json(const QaRecord& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["question"] = r.question;
    j["answer"] = r.gold_answer;
    if (r.gold_path) j["reasoning_path"] = *r.gold_path;
    if (r.time_scope) j["time_scope"] = *r.time_scope;
    if (r.annotated_hops) j["hops"] = *r.annotated_hops;
    return j;
}

inline void write_corpus(const std::filesystem::path& path,
                         const std::vector<QaRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path.string());
    for (const auto& r : records) out << to_json(r).dump() << "\n";
}

namespace detail {

inline const nlohmann::json* first_field(const nlohmann::json& j,
                                         std::initializer_list<const char*> names) {
    for (const char* n : names) {
        if (j.contains(n) && !j[n].is_null()) return &j[n];
    }
    return nullptr;
}

inline std::string json_to_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array() && !v.empty()) return json_to_text(v.front());
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return std::to_string(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return "";
}

}  // namespace detail

/// Maps one raw MenatQA-style object onto the canonical record. Field names
/// vary across dataset dumps, so common spellings are accepted.
inline QaRecord convert_menatqa_item(const nlohmann::json& j, std::size_t index) {
    const auto fail = [index](const std::string& what) -> std::runtime_error {
        return std::runtime_error("item " + std::to_string(index) + ": " + what);
    };
    if (!j.is_object()) throw fail("expected a JSON object");
    QaRecord r;
    if (const auto* f = detail::first_field(j, {"id", "qid", "question_id", "_id"})) {
        r.id = detail::json_to_text(*f);
    }
    if (r.id.empty()) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "q%04zu", index);
        r.id = buf;
    }
    if (const auto* f = detail::first_field(j, {"question", "q", "query"})) {
        r.question = detail::json_to_text(*f);
    }
    if (r.question.empty()) throw fail("no question field");
    if (const auto* f = detail::first_field(j, {"answer", "answers", "gold_answer", "a"})) {
        r.gold_answer = detail::json_to_text(*f);
    }
    if (r.gold_answer.empty()) throw fail("no answer field");
    if (const auto* f = detail::first_field(
            j, {"reasoning_path", "path", "facts", "decomposition", "steps"})) {
        if (f->is_array() && !f->empty()) {
            std::vector<std::string> path;
            for (const auto& h : *f) {
                const std::string s = detail::json_to_text(h);
                if (!s.empty()) path.push_back(s);
            }
            if (!path.empty()) r.gold_path = std::move(path);
        }
    }
    if (const auto* f = detail::first_field(
            j, {"time_scope", "time scope", "scope", "temporal_scope", "time"})) {
        if (f->is_boolean()) {
            if (f->get<bool>()) r.time_scope = "true";
        } else {
            const std::string s = detail::json_to_text(*f);
            if (!s.empty()) r.time_scope = s;
        }
    }
    if (const auto* f = detail::first_field(j, {"hops", "hop", "num_hops", "n_hops"})) {
        if (f->is_number_integer() && f->get<int>() >= 0) r.annotated_hops = f->get<int>();
    }
    return r;
}

/// Converts a raw MenatQA dump (JSON array, JSON lines, or {"data": [...]})
/// into canonical records.
inline std::vector<QaRecord> convert_menatqa(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    std::vector<nlohmann::json> items;
    nlohmann::json parsed = nlohmann::json::parse(content, nullptr, false);
    if (!parsed.is_discarded()) {
        if (parsed.is_array()) {
            items.assign(parsed.begin(), parsed.end());
        } else if (parsed.is_object() && parsed.contains("data") && parsed["data"].is_array()) {
            items.assign(parsed["data"].begin(), parsed["data"].end());
        } else if (parsed.is_object()) {
            items.push_back(parsed);
        }
    } else {
        // JSON-lines fallback
        std::istringstream lines(content);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(lines, line)) {
            ++line_no;
            if (detail::trim(line).empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": invalid JSON");
            }
            items.push_back(std::move(j));
        }
    }
    if (items.empty()) throw std::runtime_error("no records found in " + path.string());

    std::vector<QaRecord> records;
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < items.size(); ++i) {
        QaRecord r = convert_menatqa_item(items[i], i);
        auto [it, inserted] = seen.emplace(r.id, i);
        if (!inserted) r.id += "_" + std::to_string(i);  // raw dumps may repeat ids
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace cotcheck
