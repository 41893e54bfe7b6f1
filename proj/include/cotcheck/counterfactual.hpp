#pragma once

/**
 * counterfactual.hpp — numeric-entity extraction, counterfactual question
 * generation, and the CP/RA/AA/SC metric family.
 *
 * Span surgery contract: the variant question differs from the original
 * exactly at the modified span, so replacing the new value with the old
 * text restores the original byte-for-byte.
 *
 * Strategy/magnitude sets:
 *   percentage  new = old * (1 +/- d),  |d| in {0.10, 0.20, 0.30}
 *   absolute    new = old +/- d,        |d| in {1, 5, 10}
 *   temporal    year +/- d,             |d| in {1, 5, 10}, years only
 *   multiplier  new = old * k,           k  in {0.5, 2, 10}
 * Values are re-rendered at the original decimal precision, widened only
 * when the exact result needs more places (capped at 4).
 */

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cotcheck/answer_metrics.hpp"
#include "cotcheck/corpus.hpp"
#include "cotcheck/textkit.hpp"
#include "cotcheck/trace.hpp"

namespace cotcheck {

enum class SpanKind { integer, decimal, percent, currency, year };

inline const char* to_string(SpanKind k) {
    switch (k) {
        case SpanKind::integer: return "integer";
        case SpanKind::decimal: return "decimal";
        case SpanKind::percent: return "percent";
        case SpanKind::currency: return "currency";
        case SpanKind::year: return "year";
    }
    return "?";
}

struct NumericSpan {
    std::size_t begin = 0;  // char offset of the full lexical form
    std::size_t end = 0;
    std::string text;    // e.g. "$200M", "15%", "1995"
    double value = 0.0;  // numeric part, e.g. 200
    SpanKind kind = SpanKind::integer;
    std::string prefix;  // currency marker, if any
    std::string suffix;  // "%" or magnitude letter, if any
    int decimals = 0;    // fraction digits in the original rendering
};

enum class Strategy { percentage, absolute_change, temporal, multiplier };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::percentage: return "percentage";
        case Strategy::absolute_change: return "absolute";
        case Strategy::temporal: return "temporal";
        case Strategy::multiplier: return "multiplier";
    }
    return "?";
}

inline Strategy parse_strategy(std::string_view name) {
    if (name == "percentage") return Strategy::percentage;
    if (name == "absolute") return Strategy::absolute_change;
    if (name == "temporal") return Strategy::temporal;
    if (name == "multiplier") return Strategy::multiplier;
    throw std::invalid_argument("unknown modification strategy: " + std::string(name));
}

struct Modification {
    Strategy strategy = Strategy::percentage;
    double magnitude = 0.0;
    NumericSpan target;
    std::string new_value;  // full replacement text, markers included
};

struct NotModifiableError : std::runtime_error {
    explicit NotModifiableError(const std::string& what) : std::runtime_error(what) {}
};

struct ModifiedQuestion {
    std::string question;
    Modification modification;
};

namespace detail {

inline bool is_currency_prefix(std::string_view text, std::size_t i, std::size_t* len) {
    if (text[i] == '$') {
        *len = 1;
        return true;
    }
    // UTF-8 "€" (E2 82 AC) and "£" (C2 A3)
    if (text.size() - i >= 3 && text.substr(i, 3) == "\xE2\x82\xAC") {
        *len = 3;
        return true;
    }
    if (text.size() - i >= 2 && text.substr(i, 2) == "\xC2\xA3") {
        *len = 2;
        return true;
    }
    return false;
}

inline bool is_magnitude_letter(char c) { return c == 'K' || c == 'M' || c == 'B'; }

}  // namespace detail

/// Scans for integers, decimals, percentages, currency amounts, and 4-digit
/// years, left to right, with character offsets. Digit runs glued to other
/// word characters ("2nd") are not spans; an uppercase K/M/B magnitude
/// letter is absorbed as formatting suffix.
inline std::vector<NumericSpan> extract_numbers(std::string_view text) {
    std::vector<NumericSpan> spans;
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        std::size_t prefix_len = 0;
        const bool currency = detail::is_currency_prefix(text, i, &prefix_len) &&
                              i + prefix_len < n && detail::is_digit(text[i + prefix_len]);
        std::size_t start = i;
        std::size_t d = currency ? i + prefix_len : i;
        if (!detail::is_digit(text[d])) {
            ++i;
            continue;
        }
        if (!currency && d > 0 && detail::is_word_char(text[d - 1])) {
            // glued to a word ("v2"), skip the digit run
            while (i < n && detail::is_digit(text[i])) ++i;
            continue;
        }
        NumericSpan span;
        span.begin = start;
        if (currency) span.prefix = std::string(text.substr(start, prefix_len));
        const std::size_t digits_begin = d;
        while (d < n && detail::is_digit(text[d])) ++d;
        std::size_t int_digits = d - digits_begin;
        if (d + 1 < n && text[d] == '.' && detail::is_digit(text[d + 1])) {
            ++d;
            const std::size_t frac_begin = d;
            while (d < n && detail::is_digit(text[d])) ++d;
            span.decimals = static_cast<int>(d - frac_begin);
        }
        std::size_t end = d;
        if (end < n && text[end] == '%') {
            span.kind = SpanKind::percent;
            span.suffix = "%";
            ++end;
        } else if (end < n && detail::is_magnitude_letter(text[end]) &&
                   (end + 1 >= n || !detail::is_word_char(text[end + 1]))) {
            span.suffix = std::string(1, text[end]);
            ++end;
        } else if (end < n && detail::is_word_char(text[end])) {
            // digits glued into a longer word ("2nd", "A1b"), not a span
            i = end;
            continue;
        }
        span.end = end;
        span.text = std::string(text.substr(span.begin, span.end - span.begin));
        span.value = std::stod(std::string(
            text.substr(digits_begin, d - digits_begin)));
        if (currency) {
            span.kind = SpanKind::currency;
        } else if (span.kind != SpanKind::percent) {
            if (span.decimals > 0) {
                span.kind = SpanKind::decimal;
            } else if (int_digits == 4 && span.suffix.empty() && span.value >= 1000 &&
                       span.value <= 2999) {
                span.kind = SpanKind::year;
            } else {
                span.kind = SpanKind::integer;
            }
        }
        spans.push_back(std::move(span));
        i = end;
    }
    return spans;
}

namespace detail {

/// Renders `value` at the original precision, widening (up to 4 places) only
/// as far as the exact result requires; trailing zeros beyond the original
/// precision are trimmed.
inline std::string format_value(double value, int original_decimals) {
    constexpr int kMaxDecimals = 4;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", kMaxDecimals, value);
    std::string s(buf);
    const std::size_t dot = s.find('.');
    int keep = kMaxDecimals;
    while (keep > original_decimals && s[dot + static_cast<std::size_t>(keep)] == '0') --keep;
    if (keep == 0) return s.substr(0, dot);
    return s.substr(0, dot + 1 + static_cast<std::size_t>(keep));
}

inline bool magnitude_allowed(Strategy strategy, double delta) {
    const auto near = [](double a, double b) { return std::fabs(a - b) < 1e-9; };
    switch (strategy) {
        case Strategy::percentage:
            return near(std::fabs(delta), 0.10) || near(std::fabs(delta), 0.20) ||
                   near(std::fabs(delta), 0.30);
        case Strategy::absolute_change:
        case Strategy::temporal:
            return near(std::fabs(delta), 1.0) || near(std::fabs(delta), 5.0) ||
                   near(std::fabs(delta), 10.0);
        case Strategy::multiplier:
            return near(delta, 0.5) || near(delta, 2.0) || near(delta, 10.0);
    }
    return false;
}

inline bool span_compatible(Strategy strategy, SpanKind kind) {
    if (strategy == Strategy::temporal) return kind == SpanKind::year;
    return kind != SpanKind::year;
}

}  // namespace detail

/// Rewrites the first compatible numeric span under (strategy, delta).
/// Throws NotModifiableError when no compatible span exists (or every
/// compatible rewrite would leave the text unchanged).
inline ModifiedQuestion apply_modification(std::string_view question, Strategy strategy,
                                           double delta) {
    if (!detail::magnitude_allowed(strategy, delta)) {
        throw std::invalid_argument(std::string("magnitude not allowed for strategy ") +
                                    to_string(strategy) + ": " + std::to_string(delta));
    }
    for (const auto& span : extract_numbers(question)) {
        if (!detail::span_compatible(strategy, span.kind)) continue;
        double new_value = span.value;
        switch (strategy) {
            case Strategy::percentage: new_value = span.value * (1.0 + delta); break;
            case Strategy::absolute_change: new_value = span.value + delta; break;
            case Strategy::temporal: new_value = span.value + delta; break;
            case Strategy::multiplier: new_value = span.value * delta; break;
        }
        Modification mod;
        mod.strategy = strategy;
        mod.magnitude = delta;
        mod.target = span;
        mod.new_value =
            span.prefix + detail::format_value(new_value, span.decimals) + span.suffix;
        if (mod.new_value == span.text) continue;  // no-op rewrite, keep scanning
        ModifiedQuestion out;
        out.question = std::string(question.substr(0, span.begin)) + mod.new_value +
                       std::string(question.substr(span.end));
        out.modification = std::move(mod);
        return out;
    }
    throw NotModifiableError(std::string("no span compatible with strategy ") +
                             to_string(strategy));
}

namespace detail {

/// The digit rendering of a replacement value ("16.5" from "16.5%").
inline std::string digit_part(const std::string& rendered) {
    std::string out;
    for (char c : rendered) {
        if (is_digit(c) || c == '.' || c == '-') out.push_back(c);
    }
    return out;
}

/// All maximal numeric substrings ("12", "3.5") of a string.
inline std::vector<std::string> digit_strings(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        std::size_t b = i;
        while (i < n && is_digit(text[i])) ++i;
        if (i + 1 < n && text[i] == '.' && is_digit(text[i + 1])) {
            ++i;
            while (i < n && is_digit(text[i])) ++i;
        }
        out.emplace_back(text.substr(b, i - b));
    }
    return out;
}

}  // namespace detail

/// CP: 1 iff the two traces differ at all AND the modified value's digits
/// appear in the variant's reasoning steps.
inline int change_propagation(const ReasoningTrace& original, const ReasoningTrace& variant,
                              const Modification& mod) {
    const bool differ = original.steps != variant.steps ||
                        original.final_answer != variant.final_answer;
    if (!differ) return 0;
    const std::string digits = detail::digit_part(mod.new_value);
    if (digits.empty()) return 0;
    return reasoning_text(variant).find(digits) != std::string::npos ? 1 : 0;
}

/// RA: 1 iff the step counts differ or some aligned step pair has token
/// Jaccard below the similarity threshold (0.5 unless overridden).
inline int reasoning_adaptation(const ReasoningTrace& original, const ReasoningTrace& variant,
                                double similarity_threshold = 0.5) {
    if (original.steps.size() != variant.steps.size()) return 1;
    for (std::size_t i = 0; i < original.steps.size(); ++i) {
        if (jaccard(token_set(original.steps[i]), token_set(variant.steps[i])) <
            similarity_threshold) {
            return 1;
        }
    }
    return 0;
}

/// AA: with an oracle answer, 1 iff the answers differ and the variant answer
/// exactly matches the oracle. Without one, a labeled heuristic surrogate:
/// answers differ and the variant answer carries the modified value or a
/// number absent from the original answer.
inline int answer_adjustment(const ReasoningTrace& original, const ReasoningTrace& variant,
                             const Modification& mod,
                             const std::optional<std::string>& expected_answer) {
    const bool differ = exact_match(original.final_answer, variant.final_answer) == 0;
    if (!differ) return 0;
    if (expected_answer) {
        return exact_match(variant.final_answer, *expected_answer);
    }
    const std::string digits = detail::digit_part(mod.new_value);
    if (!digits.empty() && variant.final_answer.find(digits) != std::string::npos) return 1;
    const auto orig_nums = detail::digit_strings(original.final_answer);
    for (const auto& nv : detail::digit_strings(variant.final_answer)) {
        if (std::find(orig_nums.begin(), orig_nums.end(), nv) == orig_nums.end()) return 1;
    }
    return 0;
}

/// SC = 1 - lev(orig, var)/max(|orig|, |var|) with normalized-step equality;
/// 1 when both are empty.
inline double step_consistency(const std::vector<std::string>& original_steps,
                               const std::vector<std::string>& variant_steps) {
    if (original_steps.empty() && variant_steps.empty()) return 1.0;
    const std::size_t dist = levenshtein(
        original_steps, variant_steps, [](const std::string& a, const std::string& b) {
            return normalize_answer(a) == normalize_answer(b);
        });
    const double denom =
        static_cast<double>(std::max(original_steps.size(), variant_steps.size()));
    return 1.0 - static_cast<double>(dist) / denom;
}

struct CounterfactualPair {
    std::string id;
    std::string original_question;
    std::string variant_question;
    ReasoningTrace original_trace;
    ReasoningTrace variant_trace;
    Modification modification;
    int cp = 0;
    int ra = 0;
    int aa = 0;
    double sc = 0.0;
    bool aa_oracle = false;  // true when AA was judged against an oracle answer
    bool traces_differ = false;  // CP sub-condition (a)
    bool value_in_reasoning = false;  // CP sub-condition (prose)
};

/// Builds one scored pair from already-generated traces.
inline CounterfactualPair score_pair(const QaRecord& record, const ModifiedQuestion& modified,
                                     const ReasoningTrace& original_trace,
                                     const ReasoningTrace& variant_trace,
                                     const std::optional<std::string>& expected_answer) {
    CounterfactualPair p;
    p.id = record.id;
    p.original_question = record.question;
    p.variant_question = modified.question;
    p.original_trace = original_trace;
    p.variant_trace = variant_trace;
    p.modification = modified.modification;
    p.traces_differ = original_trace.steps != variant_trace.steps ||
                      original_trace.final_answer != variant_trace.final_answer;
    const std::string digits = detail::digit_part(p.modification.new_value);
    p.value_in_reasoning =
        !digits.empty() && reasoning_text(variant_trace).find(digits) != std::string::npos;
    p.cp = change_propagation(original_trace, variant_trace, p.modification);
    p.ra = reasoning_adaptation(original_trace, variant_trace);
    p.aa = answer_adjustment(original_trace, variant_trace, p.modification, expected_answer);
    p.sc = step_consistency(original_trace.steps, variant_trace.steps);
    p.aa_oracle = expected_answer.has_value();
    return p;
}

struct CounterfactualRates {
    std::size_t n = 0;
    double cp_rate = 0.0;
    double ra_rate = 0.0;
    double aa_rate = 0.0;
    double mean_sc = 0.0;
    std::map<HopCategory, double> difficulty;  // 1 - mean((CP+RA+AA)/3) per category
};

/// Aggregates indicator rates and per-complexity difficulty. `categories`
/// must align with `pairs`.
inline CounterfactualRates aggregate_rates(const std::vector<CounterfactualPair>& pairs,
                                           const std::vector<HopCategory>& categories) {
    if (pairs.empty()) throw std::invalid_argument("aggregate_rates: empty pair list");
    if (pairs.size() != categories.size()) {
        throw std::invalid_argument("aggregate_rates: category list misaligned");
    }
    CounterfactualRates r;
    r.n = pairs.size();
    std::map<HopCategory, std::pair<double, std::size_t>> acc;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        r.cp_rate += p.cp;
        r.ra_rate += p.ra;
        r.aa_rate += p.aa;
        r.mean_sc += p.sc;
        auto& [sum, count] = acc[categories[i]];
        sum += static_cast<double>(p.cp + p.ra + p.aa) / 3.0;
        ++count;
    }
    const double n = static_cast<double>(r.n);
    r.cp_rate /= n;
    r.ra_rate /= n;
    r.aa_rate /= n;
    r.mean_sc /= n;
    for (const auto& [cat, sc] : acc) {
        r.difficulty[cat] = 1.0 - sc.first / static_cast<double>(sc.second);
    }
    return r;
}

}  // namespace cotcheck
