#pragma once

// Independent test oracles. Everything here is deliberately naive —
// exponential recursion, all-pairs boolean matrices, rule re-statements —
// and shares no code with the implementation paths it checks.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracles {

/// Naive exponential-recursion edit distance.
template <typename T>
std::size_t naive_levenshtein(const std::vector<T>& a, const std::vector<T>& b,
                              std::size_t i = 0, std::size_t j = 0) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    if (a[i] == b[j]) return naive_levenshtein(a, b, i + 1, j + 1);
    const std::size_t del = naive_levenshtein(a, b, i + 1, j);
    const std::size_t ins = naive_levenshtein(a, b, i, j + 1);
    const std::size_t sub = naive_levenshtein(a, b, i + 1, j + 1);
    return 1 + std::min({del, ins, sub});
}

/// Brute-force set Jaccard via element-by-element scans.
inline double set_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t inter = 0;
    std::size_t uni = 0;
    std::set<std::string> all = a;
    all.insert(b.begin(), b.end());
    uni = all.size();
    for (const auto& x : a) {
        if (b.count(x)) ++inter;
    }
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Floyd–Warshall boolean reachability over n nodes; diagonal stays false
/// unless a cycle exists. Adjacency is a dense matrix.
inline std::vector<std::vector<bool>> floyd_warshall_closure(
    std::vector<std::vector<bool>> reach) {
    const std::size_t n = reach.size();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!reach[i][k]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (reach[k][j]) reach[i][j] = true;
            }
        }
    }
    return reach;
}

/// Brute-force transitivity per the published pair rule, restated from
/// scratch: fraction of (i<j) pairs with object_i == subject_j.
struct FormLite {
    std::string subject;
    std::string object;
};

inline double pairwise_transitivity(const std::vector<FormLite>& forms) {
    const std::size_t t = forms.size();
    if (t < 2) return 0.0;
    std::size_t hits = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) {
            ++pairs;
            if (forms[i].object == forms[j].subject) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(pairs);
}

inline double pairwise_flow_transitivity(const std::vector<FormLite>& forms) {
    const std::size_t t = forms.size();
    std::size_t hits = 0;
    std::size_t overlaps = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) {
            ++pairs;
            if (forms[i].object == forms[j].subject) ++hits;
            const bool overlap = forms[i].subject == forms[j].subject ||
                                 forms[i].subject == forms[j].object ||
                                 forms[i].object == forms[j].subject ||
                                 forms[i].object == forms[j].object;
            if (overlap) ++overlaps;
        }
    }
    const double delta_part = static_cast<double>(hits) / static_cast<double>(pairs);
    const double phi_part = std::min(0.1 * static_cast<double>(overlaps), 1.0);
    return 0.5 * (delta_part + phi_part);
}

/// Independent sum/count accumulator for mean-by-group checks.
template <typename K>
std::map<K, double> group_means(const std::vector<std::pair<K, double>>& items) {
    std::map<K, std::vector<double>> buckets;
    for (const auto& [k, v] : items) buckets[k].push_back(v);
    std::map<K, double> out;
    for (const auto& [k, vs] : buckets) {
        double s = 0.0;
        for (double v : vs) s += v;
        out[k] = s / static_cast<double>(vs.size());
    }
    return out;
}

/// Character-class re-statement of the tokenizer policy, scanning rule by
/// rule (kept independent of textkit's implementation).
inline std::vector<std::string> charclass_tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        const bool digit_before = i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]));
        const bool digit_after =
            i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]));
        if (std::isspace(c)) {
            flush();
        } else if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (c >= 0x80) {
            cur.push_back(static_cast<char>(c));
        } else if (text[i] == '.' && digit_before && digit_after) {
            cur.push_back('.');
        } else if (text[i] == '%' && digit_before) {
            cur.push_back('%');
        }
    }
    flush();
    return out;
}

/// Deterministic pseudo-random word pool for fuzzing.
inline std::string random_word(std::mt19937_64& rng, int max_len = 6) {
    const std::size_t len = 1 + rng() % static_cast<std::uint64_t>(max_len);
    std::string w;
    for (std::size_t i = 0; i < len; ++i) {
        w.push_back(static_cast<char>('a' + rng() % 26));
    }
    return w;
}

}  // namespace oracles
