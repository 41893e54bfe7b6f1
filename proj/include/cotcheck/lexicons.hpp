#pragma once

/**
 * lexicons.hpp — fixed, versioned word lists.
 *
 * The lists below are the authoritative defaults; `resources/` ships the
 * same lists as plain-text files (one entry per line, UTF-8) so external
 * tooling can consume them, and a test pins file/header agreement.
 * Changing any list is a scoring-behavior change and must bump kVersion.
 */

#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cotcheck::lexicons {

/// ~50 English function words removed by keyword extraction. Sorted.
inline const std::vector<std::string>& stopwords() {
    static const std::vector<std::string> v = {
        "a",     "an",    "and",   "are",   "as",    "at",    "be",
        "because", "been", "but",  "by",    "did",   "do",    "does",
        "for",   "from",  "had",   "has",   "have",  "how",   "if",
        "in",    "into",  "is",    "it",    "its",   "not",   "of",
        "on",    "or",    "that",  "the",   "them",  "these", "they",
        "this",  "those", "to",    "was",   "we",    "were",  "what",
        "when",  "where", "which", "who",   "whom",  "whose", "why",
        "with",  "you"};
    return v;
}

/// Clause-splitting connectives. Sorted.
inline const std::vector<std::string>& connectives() {
    static const std::vector<std::string> v = {"and", "because", "but",
                                               "if",  "or",      "when"};
    return v;
}

/// Discourse markers checked by the faithfulness indicator. Sorted.
inline const std::vector<std::string>& discourse_markers() {
    static const std::vector<std::string> v = {
        "because", "consequently", "hence", "since", "so", "therefore", "thus"};
    return v;
}

/// Structured-explanation markers counted by plausibility. Sorted.
inline const std::vector<std::string>& structured_markers() {
    static const std::vector<std::string> v = {
        "finally", "first", "next", "second", "step", "then", "third"};
    return v;
}

/// Hedging vocabulary for the confidence U indicator. Multi-word entries
/// are matched as substrings, single words as whole tokens. Sorted.
inline const std::vector<std::string>& uncertainty_tokens() {
    static const std::vector<std::string> v = {
        "maybe", "might", "not sure", "perhaps", "possibly", "unclear", "unsure"};
    return v;
}

/// Failure vocabulary for the confidence C indicator. Sorted.
inline const std::vector<std::string>& error_tokens() {
    static const std::vector<std::string> v = {
        "cannot", "error", "n/a", "sorry", "unable", "undefined"};
    return v;
}

/// Relation keywords for logical-form extraction, in lexicon order.
inline const std::vector<std::string>& relations() {
    static const std::vector<std::string> v = {
        "is",  "was",    "are",  "were",    "has",   "had",  "equals",
        "became", "won", "held", "located", "plays", "played"};
    return v;
}

/// Hedging fillers inserted by the semantic-noise perturbation. Sorted.
inline const std::vector<std::string>& hedges() {
    static const std::vector<std::string> v = {
        "actually", "arguably",  "basically", "essentially",
        "frankly",  "honestly",  "literally", "presumably"};
    return v;
}

/// Distractor sentences (each naming an irrelevant entity and number).
inline const std::vector<std::string>& distractors() {
    static const std::vector<std::string> v = {
        "Meanwhile, the Zurich observatory recorded 47 minor tremors that month.",
        "A bakery in Lisbon reportedly sold 312 pastries before noon.",
        "The Nairobi transit authority added 12 new bus routes in spring.",
        "Archivists in Oslo catalogued 85 medieval manuscripts last week.",
        "A museum in Kyoto displayed 23 lacquered boxes during the exhibit.",
        "The Antwerp port handled 9100 containers over the weekend.",
        "Researchers in Adelaide tagged 66 migratory pelicans this season.",
        "A workshop in Tbilisi repaired 140 antique clocks over two years."};
    return v;
}

/// Word-for-word synonym rewrites used by the rephrasing perturbation.
inline const std::vector<std::pair<std::string, std::string>>& synonyms() {
    static const std::vector<std::pair<std::string, std::string>> v = {
        {"after", "following"},  {"before", "preceding"},
        {"biggest", "largest"},  {"bought", "purchased"},
        {"end", "conclude"},     {"famous", "renowned"},
        {"made", "created"},     {"many", "numerous"},
        {"start", "commence"},   {"won", "secured"}};
    return v;
}

/// Leading-interrogative rewrites used by the rephrasing perturbation.
inline const std::vector<std::pair<std::string, std::string>>& interrogatives() {
    static const std::vector<std::pair<std::string, std::string>> v = {
        {"who", "which person"},
        {"what", "which thing"},
        {"where", "in which place"},
        {"when", "at what time"}};
    return v;
}

/// Loads a one-entry-per-line UTF-8 lexicon file. Blank lines are skipped.
inline std::vector<std::string> load_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

/// Loads a tab-separated two-column mapping file.
inline std::vector<std::pair<std::string, std::string>> load_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error("malformed mapping line (no tab): " + line);
        }
        out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return out;
}

}  // namespace cotcheck::lexicons
