#pragma once

/**
 * perturbation.hpp — seeded question perturbations and robustness metrics.
 *
 * Determinism contract: the same (kind, seed, question) always yields the
 * same perturbed string, byte for byte, on any toolchain. All randomness
 * flows through std::mt19937_64 with in-house bounded draws and an in-house
 * Fisher-Yates (std::uniform_int_distribution and std::shuffle are
 * implementation-defined and would break this).
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cotcheck/lexicons.hpp"
#include "cotcheck/textkit.hpp"
#include "cotcheck/trace.hpp"

namespace cotcheck {

enum class PerturbationKind {
    token_shuffle,
    distractor_injection,
    rephrasing,
    semantic_noise,
    combined
};

inline const char* to_string(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::token_shuffle: return "token_shuffle";
        case PerturbationKind::distractor_injection: return "distractor_injection";
        case PerturbationKind::rephrasing: return "rephrasing";
        case PerturbationKind::semantic_noise: return "semantic_noise";
        case PerturbationKind::combined: return "combined";
    }
    return "?";
}

inline PerturbationKind parse_perturbation_kind(std::string_view name) {
    if (name == "token_shuffle") return PerturbationKind::token_shuffle;
    if (name == "distractor_injection") return PerturbationKind::distractor_injection;
    if (name == "rephrasing") return PerturbationKind::rephrasing;
    if (name == "semantic_noise") return PerturbationKind::semantic_noise;
    if (name == "combined") return PerturbationKind::combined;
    throw std::invalid_argument("unknown perturbation kind: " + std::string(name));
}

inline const std::vector<PerturbationKind>& all_perturbation_kinds() {
    static const std::vector<PerturbationKind> v = {
        PerturbationKind::token_shuffle, PerturbationKind::distractor_injection,
        PerturbationKind::rephrasing, PerturbationKind::semantic_noise,
        PerturbationKind::combined};
    return v;
}

struct PerturbationVariant {
    PerturbationKind kind = PerturbationKind::token_shuffle;
    std::uint64_t seed = 0;
    std::string original_id;
    std::string perturbed_question;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stable 64-bit stream derivation for composed perturbations.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Draw in [0, n). n must be positive. Modulo keeps the draw sequence
/// toolchain-independent; bias is irrelevant at these pool sizes.
inline std::size_t draw_below(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

template <typename T>
void fisher_yates(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[draw_below(rng, i)]);
    }
}

inline std::vector<std::string> whitespace_split(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (is_space(c)) {
            if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

/// Splits off a trailing run of sentence punctuation ("?", "...", "?!").
inline std::pair<std::string, std::string> detach_tail_punct(std::string_view q) {
    std::size_t e = q.size();
    while (e > 0 && (q[e - 1] == '.' || q[e - 1] == '!' || q[e - 1] == '?' ||
                     q[e - 1] == ';' || q[e - 1] == ':' || q[e - 1] == ',')) {
        --e;
    }
    return {std::string(q.substr(0, e)), std::string(q.substr(e))};
}

inline std::string shuffle_interior(std::string_view question, std::uint64_t seed) {
    auto [body, tail] = detach_tail_punct(question);
    auto words = whitespace_split(body);
    if (words.size() <= 3) return std::string(question);  // degenerate, pass through
    std::mt19937_64 rng(seed);
    std::vector<std::string> interior(words.begin() + 1, words.end());
    const std::string original = join_words(interior);
    std::vector<std::string> shuffled = interior;
    for (int attempt = 0; attempt < 10; ++attempt) {
        fisher_yates(shuffled, rng);
        if (join_words(shuffled) != original) break;  // all-equal interiors never differ
    }
    return words.front() + " " + join_words(shuffled) + tail;
}

inline std::string inject_distractor(std::string_view question, std::uint64_t seed) {
    const auto& pool = lexicons::distractors();
    std::mt19937_64 rng(seed);
    return pool[draw_below(rng, pool.size())] + " " + std::string(question);
}

inline std::string match_case(const std::string& replacement, const std::string& original) {
    if (original.empty() || replacement.empty()) return replacement;
    if (std::isupper(static_cast<unsigned char>(original[0]))) {
        std::string r = replacement;
        r[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(r[0])));
        return r;
    }
    return replacement;
}

inline std::string rephrase(std::string_view question) {
    auto words = whitespace_split(question);
    if (words.empty()) return std::string(question);
    std::vector<std::string> out;
    out.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        const std::string& w = words[i];
        std::size_t core_begin = 0;
        std::size_t core_end = w.size();
        while (core_begin < core_end && !is_word_char(w[core_begin])) ++core_begin;
        while (core_end > core_begin && !is_word_char(w[core_end - 1])) --core_end;
        std::string core = w.substr(core_begin, core_end - core_begin);
        std::string lowered = core;
        for (char& c : lowered) c = to_lower(c);

        std::string replacement;
        if (i == 0) {
            for (const auto& [from, to] : lexicons::interrogatives()) {
                if (lowered == from) {
                    replacement = to;
                    break;
                }
            }
        }
        if (replacement.empty()) {
            for (const auto& [from, to] : lexicons::synonyms()) {
                if (lowered == from) {
                    replacement = to;
                    break;
                }
            }
        }
        if (replacement.empty()) {
            out.push_back(w);
        } else {
            out.push_back(w.substr(0, core_begin) + match_case(replacement, core) +
                          w.substr(core_end));
        }
    }
    return join_words(out);
}

inline std::string add_semantic_noise(std::string_view question, std::uint64_t seed) {
    auto [body, tail] = detach_tail_punct(question);
    auto words = whitespace_split(body);
    if (words.empty()) return std::string(question);
    std::mt19937_64 rng(seed);
    const auto& pool = lexicons::hedges();
    // two fillers at gap positions in [1, #words], relative to the original list
    std::pair<std::size_t, std::string> ins[2];
    for (auto& [gap, filler] : ins) {
        filler = pool[draw_below(rng, pool.size())];
        gap = 1 + draw_below(rng, words.size());
    }
    if (ins[0].first < ins[1].first) std::swap(ins[0], ins[1]);
    for (const auto& [gap, filler] : ins) {
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(gap), filler);
    }
    return join_words(words) + tail;
}

}  // namespace detail

/// Perturbed question under one of the five strategies. Deterministic in
/// (kind, seed, question).
inline PerturbationVariant perturb(std::string_view question, PerturbationKind kind,
                                   std::uint64_t seed, std::string_view original_id = {}) {
    PerturbationVariant v;
    v.kind = kind;
    v.seed = seed;
    v.original_id = std::string(original_id);
    switch (kind) {
        case PerturbationKind::token_shuffle:
            v.perturbed_question = detail::shuffle_interior(question, seed);
            break;
        case PerturbationKind::distractor_injection:
            v.perturbed_question = detail::inject_distractor(question, seed);
            break;
        case PerturbationKind::rephrasing:
            v.perturbed_question = detail::rephrase(question);
            break;
        case PerturbationKind::semantic_noise:
            v.perturbed_question = detail::add_semantic_noise(question, seed);
            break;
        case PerturbationKind::combined: {
            // shuffle ∘ distractor ∘ noise with derived sub-seeds
            const std::string noised =
                detail::add_semantic_noise(question, detail::derive_seed(seed, 1));
            const std::string distracted =
                detail::inject_distractor(noised, detail::derive_seed(seed, 2));
            v.perturbed_question =
                detail::shuffle_interior(distracted, detail::derive_seed(seed, 3));
            break;
        }
        default:
            throw std::invalid_argument("unknown perturbation kind");
    }
    return v;
}

/// Mean per-record token Jaccard between base and variant reasoning texts.
inline double reason_sim(const std::vector<ReasoningTrace>& base,
                         const std::vector<ReasoningTrace>& variant) {
    if (base.size() != variant.size()) {
        throw std::invalid_argument("reason_sim: trace lists differ in length");
    }
    if (base.empty()) throw std::invalid_argument("reason_sim: empty trace lists");
    double sum = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        sum += jaccard(token_set(reasoning_text(base[i])), token_set(reasoning_text(variant[i])));
    }
    return sum / static_cast<double>(base.size());
}

/// Mean per-record token Jaccard between base and variant final answers.
/// Artifact definition of Table-style "semantic consistency".
inline double sem_sim(const std::vector<ReasoningTrace>& base,
                      const std::vector<ReasoningTrace>& variant) {
    if (base.size() != variant.size()) {
        throw std::invalid_argument("sem_sim: trace lists differ in length");
    }
    if (base.empty()) throw std::invalid_argument("sem_sim: empty trace lists");
    double sum = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        sum += jaccard(token_set(base[i].final_answer), token_set(variant[i].final_answer));
    }
    return sum / static_cast<double>(base.size());
}

namespace detail {

inline bool contains_lexicon_token(const ReasoningTrace& trace,
                                   const std::vector<std::string>& entries) {
    const std::string scan = !trace.raw_text.empty()
                                 ? trace.raw_text
                                 : reasoning_text(trace) + " " + trace.final_answer;
    std::string lowered;
    lowered.reserve(scan.size());
    for (char c : scan) lowered.push_back(to_lower(c));
    const auto toks = token_set(lowered);
    for (const auto& e : entries) {
        const bool multiword = e.find(' ') != std::string::npos ||
                               e.find('/') != std::string::npos;
        if (multiword) {
            if (lowered.find(e) != std::string::npos) return true;
        } else if (toks.count(e)) {
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Conf = 0.3 L + 0.3 S + 0.2 U + 0.2 C with
///   L: answer length in [5, 20] tokens,  S: more than one step,
///   U: no uncertainty token,             C: no error token.
inline double confidence(const ReasoningTrace& trace) {
    const std::size_t answer_tokens = tokenize(trace.final_answer).tokens.size();
    const bool l = answer_tokens >= 5 && answer_tokens <= 20;
    const bool s = trace.steps.size() > 1;
    const bool u = !detail::contains_lexicon_token(trace, lexicons::uncertainty_tokens());
    const bool c = !detail::contains_lexicon_token(trace, lexicons::error_tokens());
    return 0.3 * l + 0.3 * s + 0.2 * u + 0.2 * c;
}

inline double dataset_confidence(const std::vector<ReasoningTrace>& traces) {
    if (traces.empty()) throw std::invalid_argument("dataset_confidence: empty trace list");
    double sum = 0.0;
    for (const auto& t : traces) sum += confidence(t);
    return sum / static_cast<double>(traces.size());
}

/// Dataset-level means for one corpus run.
struct AggregateScores {
    double em = 0.0;
    double cot_em = 0.0;
    double confidence = 0.0;
};

struct RobustnessRow {
    double em_drop = 0.0;
    double cot_drop = 0.0;
    double sem_sim = 0.0;
    double reason_sim = 0.0;
    double conf_degradation = 0.0;
    double robustness = 0.0;
    double baseline_em = 0.0;
    double variant_em = 0.0;
    double baseline_cot = 0.0;
    double variant_cot = 0.0;
};

inline double clip01(double x) { return std::max(0.0, std::min(1.0, x)); }

/// Composite row:
///   Robustness = clip_[0,1]( 0.3 (1 - dEM) + 0.3 (1 - dCoT)
///                            + 0.2 SemSim + 0.2 ReasonSim ).
/// Drops stay signed; only the composite is clipped.
inline RobustnessRow robustness_row(const AggregateScores& baseline,
                                    const AggregateScores& variant, double sem_similarity,
                                    double reason_similarity) {
    RobustnessRow row;
    row.baseline_em = baseline.em;
    row.variant_em = variant.em;
    row.baseline_cot = baseline.cot_em;
    row.variant_cot = variant.cot_em;
    row.em_drop = baseline.em - variant.em;
    row.cot_drop = baseline.cot_em - variant.cot_em;
    row.sem_sim = sem_similarity;
    row.reason_sim = reason_similarity;
    row.conf_degradation = baseline.confidence - variant.confidence;
    row.robustness = clip01(0.3 * (1.0 - row.em_drop) + 0.3 * (1.0 - row.cot_drop) +
                            0.2 * row.sem_sim + 0.2 * row.reason_sim);
    return row;
}

/// Rows ordered by descending robustness; ties break on kind name ascending.
inline std::vector<std::pair<PerturbationKind, RobustnessRow>> rank_variants(
    const std::map<PerturbationKind, RobustnessRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("rank_variants: empty row map");
    std::vector<std::pair<PerturbationKind, RobustnessRow>> out(rows.begin(), rows.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second.robustness != b.second.robustness) {
            return a.second.robustness > b.second.robustness;
        }
        return std::string_view(to_string(a.first)) < std::string_view(to_string(b.first));
    });
    return out;
}

}  // namespace cotcheck
