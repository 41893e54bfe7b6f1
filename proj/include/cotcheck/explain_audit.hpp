#pragma once

/**
 * explain_audit.hpp — faithfulness, plausibility, hallucination scoring.
 *
 * F = 1 + [keyword overlap >= 0.3] + [answer in explanation]
 *       + [step flow >= 0.3] + [discourse marker present]          (1..5)
 * P = 1 + [>=10 tokens] + [>=20 tokens] + [struct markers >= 2]
 *       + [reused question keywords >= 2] + [coherent]             (1..6)
 * hallucinated = [P >= 4 and F <= 2]
 *
 * Note: P ranges to 6 by construction even though plausibility is often
 * reported on a /5 scale; reports flag the scale instead of rescaling.
 */

#include <array>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cotcheck/corpus.hpp"
#include "cotcheck/textkit.hpp"

namespace cotcheck {

struct FaithfulnessComponents {
    double keyword_overlap = 0.0;  // o_q
    bool keyword_overlap_ok = false;
    bool answer_present = false;
    double flow = 0.0;
    bool flow_ok = false;
    bool discourse_present = false;
};

struct FaithfulnessResult {
    int score = 1;  // 1..5
    FaithfulnessComponents components;
};

struct PlausibilityComponents {
    std::size_t token_count = 0;
    bool len10 = false;
    bool len20 = false;
    std::size_t struct_count = 0;
    bool struct_ok = false;
    std::size_t domain_count = 0;
    bool domain_ok = false;
    double coherence = 0.0;
    bool coherent = false;
};

struct PlausibilityResult {
    int score = 1;  // 1..6
    PlausibilityComponents components;
};

struct ExplanationAudit {
    int faithfulness = 1;
    int plausibility = 1;
    int hallucinated = 0;
    FaithfulnessComponents f_components;
    PlausibilityComponents p_components;
};

struct CategoryAuditStats {
    double mean_f = 0.0;
    double mean_p = 0.0;
    double halluc_rate = 0.0;
    std::size_t n = 0;
};

struct AuditSummary {
    double mean_f = 0.0;
    double mean_p = 0.0;
    double halluc_rate = 0.0;
    std::size_t n = 0;
    std::map<HopCategory, CategoryAuditStats> per_category;
};

namespace detail {

inline std::string join_steps(const std::vector<std::string>& steps) {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i) out.push_back(' ');
        out += steps[i];
    }
    return out;
}

/// Mean token-set Jaccard between consecutive elements. A single element is
/// vacuously coherent (1.0); zero elements have no flow at all (0.0), which
/// keeps the empty explanation at the baseline score.
inline double mean_adjacent_jaccard(const std::vector<std::string>& parts) {
    if (parts.empty()) return 0.0;
    if (parts.size() == 1) return 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        sum += jaccard(token_set(parts[i]), token_set(parts[i + 1]));
    }
    return sum / static_cast<double>(parts.size() - 1);
}

}  // namespace detail

inline FaithfulnessResult faithfulness(std::string_view question,
                                       const std::vector<std::string>& explanation_steps,
                                       std::string_view predicted_answer) {
    FaithfulnessResult r;
    const std::string joined = detail::join_steps(explanation_steps);

    const auto kq = extract_keywords(question);
    const auto ke = extract_keywords(joined);
    if (!kq.empty()) {
        std::size_t inter = 0;
        for (const auto& k : kq) inter += ke.count(k);
        r.components.keyword_overlap =
            static_cast<double>(inter) / static_cast<double>(kq.size());
    }
    r.components.keyword_overlap_ok = r.components.keyword_overlap >= 0.3;

    const std::string norm_answer = normalize_answer(predicted_answer);
    const std::string norm_joined = normalize_answer(joined);
    r.components.answer_present =
        !norm_answer.empty() && norm_joined.find(norm_answer) != std::string::npos;

    r.components.flow = detail::mean_adjacent_jaccard(explanation_steps);
    r.components.flow_ok = r.components.flow >= 0.3;

    const auto toks = token_set(joined);
    for (const auto& m : lexicons::discourse_markers()) {
        if (toks.count(m)) {
            r.components.discourse_present = true;
            break;
        }
    }

    r.score = 1 + (r.components.keyword_overlap_ok ? 1 : 0) +
              (r.components.answer_present ? 1 : 0) + (r.components.flow_ok ? 1 : 0) +
              (r.components.discourse_present ? 1 : 0);
    return r;
}

inline PlausibilityResult plausibility(std::string_view question,
                                       const std::vector<std::string>& explanation_steps) {
    PlausibilityResult r;
    const std::string joined = detail::join_steps(explanation_steps);
    const auto toks = tokenize(joined).tokens;

    r.components.token_count = toks.size();
    r.components.len10 = toks.size() >= 10;
    r.components.len20 = toks.size() >= 20;

    const auto& markers = lexicons::structured_markers();
    for (const auto& t : toks) {
        if (std::binary_search(markers.begin(), markers.end(), t)) ++r.components.struct_count;
    }
    r.components.struct_ok = r.components.struct_count >= 2;

    const auto kq = extract_keywords(question);
    const std::set<std::string> eset(toks.begin(), toks.end());
    for (const auto& k : kq) {
        if (eset.count(k)) ++r.components.domain_count;  // distinct reused keywords
    }
    r.components.domain_ok = r.components.domain_count >= 2;

    const auto sentences = split_sentences(joined).sentences;
    r.components.coherence = detail::mean_adjacent_jaccard(sentences);
    r.components.coherent = r.components.coherence >= 0.2;

    r.score = 1 + (r.components.len10 ? 1 : 0) + (r.components.len20 ? 1 : 0) +
              (r.components.struct_ok ? 1 : 0) + (r.components.domain_ok ? 1 : 0) +
              (r.components.coherent ? 1 : 0);
    return r;
}

/// 1 iff plausible but unfaithful (P >= 4 and F <= 2). Rejects out-of-range
/// scores.
inline int hallucinated(int faithfulness_score, int plausibility_score) {
    if (faithfulness_score < 1 || faithfulness_score > 5) {
        throw std::out_of_range("faithfulness score must be in [1,5]");
    }
    if (plausibility_score < 1 || plausibility_score > 6) {
        throw std::out_of_range("plausibility score must be in [1,6]");
    }
    return (plausibility_score >= 4 && faithfulness_score <= 2) ? 1 : 0;
}

inline ExplanationAudit audit_explanation(std::string_view question,
                                          const std::vector<std::string>& explanation_steps,
                                          std::string_view predicted_answer) {
    ExplanationAudit a;
    const auto f = faithfulness(question, explanation_steps, predicted_answer);
    const auto p = plausibility(question, explanation_steps);
    a.faithfulness = f.score;
    a.plausibility = p.score;
    a.hallucinated = hallucinated(f.score, p.score);
    a.f_components = f.components;
    a.p_components = p.components;
    return a;
}

inline AuditSummary summarize(
    const std::vector<std::pair<HopCategory, ExplanationAudit>>& audits) {
    if (audits.empty()) throw std::invalid_argument("summarize: empty audit list");
    AuditSummary s;
    std::map<HopCategory, std::array<double, 4>> acc;  // sumF, sumP, sumH, n
    for (const auto& [cat, a] : audits) {
        s.mean_f += a.faithfulness;
        s.mean_p += a.plausibility;
        s.halluc_rate += a.hallucinated;
        auto& c = acc[cat];
        c[0] += a.faithfulness;
        c[1] += a.plausibility;
        c[2] += a.hallucinated;
        c[3] += 1.0;
    }
    s.n = audits.size();
    const double n = static_cast<double>(s.n);
    s.mean_f /= n;
    s.mean_p /= n;
    s.halluc_rate /= n;
    for (const auto& [cat, c] : acc) {
        s.per_category[cat] = CategoryAuditStats{c[0] / c[3], c[1] / c[3], c[2] / c[3],
                                                 static_cast<std::size_t>(c[3])};
    }
    return s;
}

}  // namespace cotcheck
