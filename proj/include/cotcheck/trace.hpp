#pragma once

#include <string>
#include <vector>

namespace cotcheck {

/// A parsed model generation: ordered reasoning steps plus the final answer.
/// Both may be empty — a failed generation is representable. raw_text keeps
/// the unparsed output; answer_marker_found is false when the final answer
/// had to be recovered from the last non-empty line instead of an
/// "Answer:" marker.
struct ReasoningTrace {
    std::vector<std::string> steps;
    std::string final_answer;
    std::string raw_text;
    bool answer_marker_found = true;
};

/// The reasoning portion as one string (steps joined by single spaces).
inline std::string reasoning_text(const ReasoningTrace& t) {
    std::string out;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        if (i) out.push_back(' ');
        out += t.steps[i];
    }
    return out;
}

}  // namespace cotcheck
