#pragma once

/**
 * logic_graph.hpp — logical-form extraction, reasoning graphs, transitive
 * closure, forward/backward consistency, transitivity scoring.
 *
 * Conventions pinned here (the scores are exact string arithmetic):
 *  - delta_ij = 1 iff normalized object of form i equals normalized subject
 *    of form j, literal string equality (two empty strings are equal);
 *  - phi(L_i, L_j) = 1 iff the literal {subject, object} string sets of the
 *    two forms intersect;
 *  - transitivity of fewer than 2 forms is 0; flow_transitivity of fewer
 *    than 2 forms is an error (evaluate_pair maps it to 0).
 */

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cotcheck/corpus.hpp"
#include "cotcheck/textkit.hpp"
#include "cotcheck/trace.hpp"

namespace cotcheck {

struct LogicalForm {
    std::string subject;
    std::string relation;  // empty when no relation keyword matched
    std::string object;
    std::set<std::string> values;  // numeric / percent / year tokens
};

struct ReasoningGraph {
    std::set<std::string> nodes;
    std::set<std::pair<std::string, std::string>> edges;
    std::set<std::pair<std::string, std::string>> closure;
};

namespace detail {

struct WordSpan {
    std::string lowered;
    std::size_t begin = 0;
    std::size_t end = 0;
    bool capitalized = false;
};

inline std::vector<WordSpan> word_spans(std::string_view text) {
    std::vector<WordSpan> spans;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(text[i])) ++i;
        if (i >= n) break;
        WordSpan w;
        w.begin = i;
        while (i < n && !is_space(text[i])) ++i;
        w.end = i;
        std::string_view raw = text.substr(w.begin, w.end - w.begin);
        w.capitalized = std::isupper(static_cast<unsigned char>(raw[0])) != 0;
        for (char c : raw) {
            if (is_word_char(c)) {
                w.lowered.push_back(static_cast<unsigned char>(c) >= 0x80 ? c : to_lower(c));
            }
        }
        spans.push_back(std::move(w));
    }
    return spans;
}

inline bool is_numeric_token(const std::string& t) {
    if (t.empty()) return false;
    std::size_t end = t.size();
    if (t.back() == '%') {
        if (t.size() == 1) return false;
        --end;
    }
    bool seen_digit = false;
    bool seen_dot = false;
    for (std::size_t i = 0; i < end; ++i) {
        if (is_digit(t[i])) {
            seen_digit = true;
        } else if (t[i] == '.' && !seen_dot && i > 0 && i + 1 < end) {
            seen_dot = true;
        } else {
            return false;
        }
    }
    return seen_digit;
}

}  // namespace detail

/// Rule-based (subject, relation, object, values) extraction from one step.
/// The leftmost relation-lexicon word splits the step; without one, the
/// first and last capitalized spans stand in for subject and object.
inline LogicalForm extract_logical_form(std::string_view step) {
    LogicalForm form;
    for (const auto& t : tokenize(step).tokens) {
        if (detail::is_numeric_token(t)) form.values.insert(t);
    }

    const auto words = detail::word_spans(step);
    const auto& lexicon = lexicons::relations();
    const detail::WordSpan* relation_word = nullptr;
    for (const auto& w : words) {
        if (std::find(lexicon.begin(), lexicon.end(), w.lowered) != lexicon.end()) {
            relation_word = &w;
            break;
        }
    }

    if (relation_word != nullptr) {
        form.relation = relation_word->lowered;
        form.subject = normalize_answer(step.substr(0, relation_word->begin));
        std::string_view rest = step.substr(relation_word->end);
        const std::size_t stop = rest.find_first_of(".,;:!?");
        form.object = normalize_answer(stop == std::string_view::npos ? rest
                                                                      : rest.substr(0, stop));
        return form;
    }

    // fallback: capitalized spans (maximal runs of capitalized words)
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // [begin,end) char offsets
    for (std::size_t i = 0; i < words.size();) {
        if (!words[i].capitalized) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < words.size() && words[j + 1].capitalized) ++j;
        spans.emplace_back(words[i].begin, words[j].end);
        i = j + 1;
    }
    if (!spans.empty()) {
        form.subject =
            normalize_answer(step.substr(spans.front().first,
                                         spans.front().second - spans.front().first));
        form.object = normalize_answer(
            step.substr(spans.back().first, spans.back().second - spans.back().first));
    }
    return form;
}

inline std::vector<LogicalForm> extract_logical_forms(const std::vector<std::string>& steps) {
    std::vector<LogicalForm> forms;
    forms.reserve(steps.size());
    for (const auto& s : steps) forms.push_back(extract_logical_form(s));
    return forms;
}

/// Directed graph over entity strings. An edge (s_t, o_t) exists iff the
/// form's relation and both endpoints are non-empty; nodes are the edge
/// endpoints. Closure is left empty (see transitive_closure).
inline ReasoningGraph build_graph(const std::vector<LogicalForm>& forms) {
    ReasoningGraph g;
    for (const auto& f : forms) {
        if (f.relation.empty() || f.subject.empty() || f.object.empty()) continue;
        g.edges.emplace(f.subject, f.object);
        g.nodes.insert(f.subject);
        g.nodes.insert(f.object);
    }
    return g;
}

/// Reachability closure: (u,v) in E+ iff a directed path of >= 1 edge leads
/// from u to v. Self-loops appear only for nodes on cycles.
inline ReasoningGraph transitive_closure(ReasoningGraph g) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [u, v] : g.edges) adj[u].push_back(v);
    g.closure.clear();
    for (const auto& u : g.nodes) {
        std::set<std::string> visited;
        std::deque<std::string> queue;
        auto it = adj.find(u);
        if (it == adj.end()) continue;
        for (const auto& v : it->second) queue.push_back(v);
        while (!queue.empty()) {
            std::string v = std::move(queue.front());
            queue.pop_front();
            if (!visited.insert(v).second) continue;
            g.closure.emplace(u, v);
            auto jt = adj.find(v);
            if (jt != adj.end()) {
                for (const auto& w : jt->second) {
                    if (!visited.count(w)) queue.push_back(w);
                }
            }
        }
    }
    return g;
}

/// Edge list dump, one "subject<TAB>object" line per edge, sorted.
inline std::string to_edge_list(const ReasoningGraph& g) {
    std::string out;
    for (const auto& [u, v] : g.edges) {
        out += u;
        out.push_back('\t');
        out += v;
        out.push_back('\n');
    }
    return out;
}

/// Jaccard between the token unions of forward and backward step lists.
inline double consistency(const std::vector<std::string>& forward_steps,
                          const std::vector<std::string>& backward_steps) {
    std::set<std::string> wf;
    std::set<std::string> wb;
    for (const auto& s : forward_steps) {
        auto t = token_set(s);
        wf.insert(t.begin(), t.end());
    }
    for (const auto& s : backward_steps) {
        auto t = token_set(s);
        wb.insert(t.begin(), t.end());
    }
    return jaccard(wf, wb);
}

/// (sum over i<j of [o_i == s_j]) / C(T,2); 0 when T < 2.
inline double transitivity(const std::vector<LogicalForm>& forms) {
    const std::size_t t = forms.size();
    if (t < 2) return 0.0;
    std::size_t linked = 0;
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) {
            if (forms[i].object == forms[j].subject) ++linked;
        }
    }
    const double pairs = static_cast<double>(t) * static_cast<double>(t - 1) / 2.0;
    return static_cast<double>(linked) / pairs;
}

/// Flow-adjusted transitivity:
///   0.5 * ( sum(delta_ij)/C(T,2) + min(0.1 * sum(phi_ij), 1.0) ).
inline double flow_transitivity(const std::vector<LogicalForm>& forms) {
    const std::size_t t = forms.size();
    if (t < 2) throw std::invalid_argument("flow_transitivity requires at least 2 forms");
    std::size_t linked = 0;
    std::size_t overlapping = 0;
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = i + 1; j < t; ++j) {
            if (forms[i].object == forms[j].subject) ++linked;
            const std::set<std::string> ei = {forms[i].subject, forms[i].object};
            const std::set<std::string> ej = {forms[j].subject, forms[j].object};
            bool intersects = false;
            for (const auto& e : ei) {
                if (ej.count(e)) {
                    intersects = true;
                    break;
                }
            }
            if (intersects) ++overlapping;
        }
    }
    const double pairs = static_cast<double>(t) * static_cast<double>(t - 1) / 2.0;
    const double delta_part = static_cast<double>(linked) / pairs;
    const double phi_part = std::min(0.1 * static_cast<double>(overlapping), 1.0);
    return 0.5 * (delta_part + phi_part);
}

struct ConsistencyResult {
    double consistency = 0.0;
    double transitivity = 0.0;
    double flow_transitivity = 0.0;
    std::size_t forward_len = 0;
    std::size_t backward_len = 0;
    HopCategory category = HopCategory::one_hop;
};

/// Scores one forward/backward trace pair. Transitivity is computed on the
/// forward chain's logical forms; the category comes from the annotated-hop
/// mapping.
inline ConsistencyResult evaluate_pair(const ReasoningTrace& forward,
                                       const ReasoningTrace& backward,
                                       int annotated_hops) {
    ConsistencyResult r;
    r.consistency = consistency(forward.steps, backward.steps);
    const auto forms = extract_logical_forms(forward.steps);
    r.transitivity = transitivity(forms);
    r.flow_transitivity = forms.size() >= 2 ? flow_transitivity(forms) : 0.0;
    r.forward_len = forward.steps.size();
    r.backward_len = backward.steps.size();
    r.category = categorize(annotated_hops, CategorizeMode::annotated);
    return r;
}

}  // namespace cotcheck
