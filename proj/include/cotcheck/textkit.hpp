#pragma once

/**
 * textkit.hpp — shared deterministic text primitives.
 *
 * Every metric in this library goes through the single tokenization and
 * normalization policy defined here, so token-level scores are comparable
 * across modules. The policy is byte-deterministic:
 *
 *   tokenize   : ASCII-lowercase; punctuation is deleted, except a '.'
 *                between two digits (decimal point) and a '%' directly
 *                after a digit; tokens are whitespace-separated runs.
 *                Bytes >= 0x80 (UTF-8 continuations etc.) pass through
 *                unchanged; only ASCII is case-folded.
 *   normalize  : tokenize, drop the articles {a, an, the}, re-join with
 *                single spaces.
 *
 * All functions are pure; no shared state, safe from any thread.
 */

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cotcheck/lexicons.hpp"

namespace cotcheck {

/// Ordered list of lowercase tokens. No token is empty or contains whitespace.
struct TokenSeq {
    std::vector<std::string> tokens;
};

/// Ordered list of non-empty sentence strings (terminal punctuation kept).
struct SentenceList {
    std::vector<std::string> sentences;
};

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline bool is_alnum(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

inline char to_lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

/// Word characters for boundary-sensitive matching: ASCII alnum plus any
/// non-ASCII byte.
inline bool is_word_char(char c) {
    return is_alnum(c) || static_cast<unsigned char>(c) >= 0x80;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

/// Lowercased whitespace-free words of the raw string (maximal runs of word
/// characters). Used for word-boundary lexicon matching, not for metrics.
inline std::vector<std::string> boundary_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
        if (is_word_char(c)) {
            cur.push_back(static_cast<unsigned char>(c) >= 0x80 ? c : to_lower(c));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

}  // namespace detail

/// Applies the library-wide token policy. Empty input yields an empty
/// sequence; repeated application to the joined result is a fixed point.
inline TokenSeq tokenize(std::string_view text) {
    TokenSeq out;
    std::string cur;
    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = text[i];
        if (detail::is_space(c)) {
            if (!cur.empty()) {
                out.tokens.push_back(std::move(cur));
                cur.clear();
            }
            continue;
        }
        if (detail::is_alnum(c) || static_cast<unsigned char>(c) >= 0x80) {
            cur.push_back(static_cast<unsigned char>(c) >= 0x80 ? c : detail::to_lower(c));
        } else if (c == '.' && i > 0 && i + 1 < n && detail::is_digit(text[i - 1]) &&
                   detail::is_digit(text[i + 1])) {
            cur.push_back('.');
        } else if (c == '%' && i > 0 && detail::is_digit(text[i - 1])) {
            cur.push_back('%');
        }
        // every other punctuation byte is deleted
    }
    if (!cur.empty()) out.tokens.push_back(std::move(cur));
    return out;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

inline std::set<std::string> token_set(std::string_view text) {
    auto seq = tokenize(text);
    return std::set<std::string>(seq.tokens.begin(), seq.tokens.end());
}

/// Extractive-QA style answer normalization: lowercase, policy punctuation
/// strip, article removal, single-space joining. Idempotent.
inline std::string normalize_answer(std::string_view text) {
    auto seq = tokenize(text);
    std::vector<std::string> kept;
    kept.reserve(seq.tokens.size());
    for (auto& t : seq.tokens) {
        if (t == "a" || t == "an" || t == "the") continue;
        kept.push_back(std::move(t));
    }
    return join_tokens(kept);
}

/// |a∩b| / |a∪b|; 0 when the union is empty.
inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    for (const auto& x : small) {
        if (large.count(x)) ++inter;
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Minimum number of unit-cost insertions/deletions/substitutions turning
/// `a` into `b`, under a caller-supplied element equality.
template <typename T, typename Eq>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b, Eq equal) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::size_t> prev(m + 1);
    std::vector<std::size_t> cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (equal(a[i - 1], b[j - 1]) ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
    return levenshtein(a, b, [](const T& x, const T& y) { return x == y; });
}

/// Splits on '.', '?' or '!' followed by whitespace or end of input. The
/// terminal character stays with its sentence; empty segments are dropped,
/// a trailing unterminated segment is kept.
inline SentenceList split_sentences(std::string_view text) {
    SentenceList out;
    std::string cur;
    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = text[i];
        cur.push_back(c);
        const bool terminal = (c == '.' || c == '?' || c == '!');
        if (terminal && (i + 1 == n || detail::is_space(text[i + 1]))) {
            std::string s = detail::trim(cur);
            if (!s.empty()) out.sentences.push_back(std::move(s));
            cur.clear();
        }
    }
    std::string s = detail::trim(cur);
    if (!s.empty()) out.sentences.push_back(std::move(s));
    return out;
}

/// Clause count = 1 + standalone occurrences of the six connectives
/// (and, or, but, because, when, if); word-boundary, case-insensitive.
inline std::size_t split_clauses(std::string_view text) {
    const auto& connectives = lexicons::connectives();
    std::size_t hits = 0;
    for (const auto& w : detail::boundary_words(text)) {
        if (std::find(connectives.begin(), connectives.end(), w) != connectives.end()) ++hits;
    }
    return 1 + hits;
}

/// Policy tokens minus the fixed stopword list, as a set.
inline std::set<std::string> extract_keywords(std::string_view text) {
    const auto& stop = lexicons::stopwords();
    std::set<std::string> out;
    for (auto& t : tokenize(text).tokens) {
        if (!std::binary_search(stop.begin(), stop.end(), t)) out.insert(std::move(t));
    }
    return out;
}

}  // namespace cotcheck
