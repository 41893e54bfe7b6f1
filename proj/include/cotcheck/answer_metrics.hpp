#pragma once

/**
 * answer_metrics.hpp — answer- and reasoning-path-level accuracy metrics.
 *
 * The BLEU variant is pinned here because "sentence BLEU" is ambiguous:
 * modified n-gram precisions for n = 1..min(4, |hyp|) with uniform weights,
 * add-one smoothing for n >= 2 (never for unigrams), brevity penalty
 * exp(1 - |ref|/|hyp|) when the hypothesis is shorter, gold as reference.
 */

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cotcheck/corpus.hpp"
#include "cotcheck/textkit.hpp"
#include "cotcheck/trace.hpp"

namespace cotcheck {

struct AnswerScore {
    int em = 0;
    double f1 = 0.0;
    double bleu = 0.0;
    std::optional<int> cot_em;                   // absent without a gold path
    std::vector<double> soft_step_sims;          // aligned steps, gold path present
};

/// 1 iff the two strings are equal after answer normalization.
inline int exact_match(std::string_view pred, std::string_view gold) {
    return normalize_answer(pred) == normalize_answer(gold) ? 1 : 0;
}

/// Token-multiset F1 over normalized strings. Both empty -> 1, one empty -> 0.
inline double token_f1(std::string_view pred, std::string_view gold) {
    const auto p = tokenize(normalize_answer(pred)).tokens;
    const auto g = tokenize(normalize_answer(gold)).tokens;
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    std::map<std::string, std::size_t> gold_counts;
    for (const auto& t : g) ++gold_counts[t];
    std::size_t overlap = 0;
    for (const auto& t : p) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double prec = static_cast<double>(overlap) / static_cast<double>(p.size());
    const double rec = static_cast<double>(overlap) / static_cast<double>(g.size());
    return 2.0 * prec * rec / (prec + rec);
}

namespace detail {

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(
    const std::vector<std::string>& toks, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    if (toks.size() < n) return counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
    }
    return counts;
}

}  // namespace detail

/// Sentence BLEU of the prediction against the gold reference. Empty
/// prediction or zero unigram overlap scores 0.
inline double sentence_bleu(std::string_view pred, std::string_view gold) {
    const auto hyp = tokenize(pred).tokens;
    const auto ref = tokenize(gold).tokens;
    if (hyp.empty()) return 0.0;
    const std::size_t max_n = std::min<std::size_t>(4, hyp.size());
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        const auto hyp_counts = detail::ngram_counts(hyp, n);
        const auto ref_counts = detail::ngram_counts(ref, n);
        std::size_t matched = 0;
        std::size_t total = 0;
        for (const auto& [gram, count] : hyp_counts) {
            total += count;
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) matched += std::min(count, it->second);
        }
        double p;
        if (n == 1) {
            if (matched == 0) return 0.0;
            p = static_cast<double>(matched) / static_cast<double>(total);
        } else {
            p = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
        }
        log_sum += std::log(p);
    }
    double bp = 1.0;
    if (hyp.size() < ref.size()) {
        bp = std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(hyp.size()));
    }
    return bp * std::exp(log_sum / static_cast<double>(max_n));
}

/// Strict path match: equal length and every aligned step normalize-equal.
inline int cot_exact_match(const std::vector<std::string>& pred_path,
                           const std::vector<std::string>& gold_path) {
    if (pred_path.size() != gold_path.size()) return 0;
    for (std::size_t i = 0; i < pred_path.size(); ++i) {
        if (normalize_answer(pred_path[i]) != normalize_answer(gold_path[i])) return 0;
    }
    return 1;
}

/// Token-set Jaccard between one gold and one predicted step.
inline double soft_step_similarity(std::string_view gold_step, std::string_view pred_step) {
    return jaccard(token_set(gold_step), token_set(pred_step));
}

/// All answer-level scores of one trace against one record.
inline AnswerScore score_answer(const QaRecord& record, const ReasoningTrace& trace) {
    AnswerScore s;
    s.em = exact_match(trace.final_answer, record.gold_answer);
    s.f1 = token_f1(trace.final_answer, record.gold_answer);
    s.bleu = sentence_bleu(trace.final_answer, record.gold_answer);
    if (record.gold_path) {
        s.cot_em = cot_exact_match(trace.steps, *record.gold_path);
        const std::size_t n = std::min(record.gold_path->size(), trace.steps.size());
        for (std::size_t i = 0; i < n; ++i) {
            s.soft_step_sims.push_back(
                soft_step_similarity((*record.gold_path)[i], trace.steps[i]));
        }
    }
    return s;
}

/// Arithmetic mean per hop category; categories with no members are absent.
template <typename V>
std::map<HopCategory, double> aggregate_by_category(
    const std::vector<std::pair<HopCategory, V>>& scores) {
    std::map<HopCategory, std::pair<double, std::size_t>> acc;
    for (const auto& [cat, v] : scores) {
        auto& [sum, count] = acc[cat];
        sum += static_cast<double>(v);
        ++count;
    }
    std::map<HopCategory, double> out;
    for (const auto& [cat, sc] : acc) out[cat] = sc.first / static_cast<double>(sc.second);
    return out;
}

}  // namespace cotcheck
