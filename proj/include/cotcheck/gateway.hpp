#pragma once

/**
 * gateway.hpp — client to an external text-generation service with prompt
 * templates and a record/replay cache.
 *
 * Modes:
 *   replay  — cache only; a miss raises CacheMissError, the network is
 *             never touched.
 *   record  — cache hits short-circuit; misses call the service and append
 *             the response to the cache file.
 *   live    — always calls the service, never touches the cache.
 *
 * The wire protocol is the de-facto chat-completions JSON shape; it is
 * fully isolated behind this header. Transport is injectable for tests.
 * Evaluation presets pin temperature = 0 so replay is deterministic.
 */

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cotcheck/detail/sha256.hpp"
#include "cotcheck/textkit.hpp"
#include "cotcheck/trace.hpp"

namespace cotcheck {

struct GenerationRequest {
    std::string prompt;
    int max_tokens = 512;
    double temperature = 0.0;
    std::vector<std::string> stop;
    std::string tag;  // forward | backward | explanation
};

enum class GatewayMode { record, replay, live };

inline const char* to_string(GatewayMode m) {
    switch (m) {
        case GatewayMode::record: return "record";
        case GatewayMode::replay: return "replay";
        case GatewayMode::live: return "live";
    }
    return "?";
}

inline GatewayMode parse_gateway_mode(std::string_view name) {
    if (name == "record") return GatewayMode::record;
    if (name == "replay") return GatewayMode::replay;
    if (name == "live") return GatewayMode::live;
    throw std::invalid_argument("unknown gateway mode: " + std::string(name));
}

struct GatewayConfig {
    std::string endpoint_url;  // e.g. http://localhost:8000/v1/chat/completions
    std::string model_id = "qwen3-0.6b";
    std::string api_key;       // from environment, never from reports
    GatewayMode mode = GatewayMode::replay;
    std::filesystem::path cache_path;
    int concurrency = 4;
    int retry_cap = 3;
};

struct CacheMissError : std::runtime_error {
    explicit CacheMissError(const std::string& key)
        : std::runtime_error("replay cache miss for key " + key), key(key) {}
    std::string key;
};

struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

struct TransportResult {
    int status = 0;
    std::string body;
};

/// (url, api_key, request_body_json) -> HTTP result. Injectable for tests.
using Transport = std::function<TransportResult(const std::string& url,
                                                const std::string& api_key,
                                                const std::string& body)>;

/// Canonical cache key: SHA-256 over the sorted-key JSON of the request
/// fields plus the model id.
inline std::string request_key(const GenerationRequest& req, const std::string& model_id) {
    nlohmann::json j;
    j["max_tokens"] = req.max_tokens;
    j["model"] = model_id;
    j["prompt"] = req.prompt;
    j["stop"] = req.stop;
    j["tag"] = req.tag;
    j["temperature"] = req.temperature;
    return detail::sha256_hex(j.dump());
}

/// Append-only JSON-lines response cache, one
/// {key, request, response_text, timestamp} object per line. Reads are
/// lock-free after load; writes are serialized.
class ResponseCache {
  public:
    ResponseCache() = default;

    explicit ResponseCache(std::filesystem::path file) : file_(std::move(file)) {
        if (file_.empty() || !std::filesystem::exists(file_)) return;
        std::ifstream in(file_);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("key") || !j.contains("response_text")) {
                throw std::runtime_error("cache file " + file_.string() + " line " +
                                         std::to_string(line_no) + ": malformed entry");
            }
            entries_[j["key"].get<std::string>()] = j["response_text"].get<std::string>();
        }
    }

    bool lookup(const std::string& key, std::string* response) const {
        std::shared_lock lock(mutex_);
        auto it = entries_.find(key);
        if (it == entries_.end()) return false;
        *response = it->second;
        return true;
    }

    void store(const std::string& key, const nlohmann::json& request,
               const std::string& response) {
        std::unique_lock lock(mutex_);
        if (entries_.count(key)) return;
        entries_[key] = response;
        if (file_.empty()) return;
        std::ofstream out(file_, std::ios::app);
        if (!out) throw std::runtime_error("cannot append to cache file: " + file_.string());
        nlohmann::json j;
        j["key"] = key;
        j["request"] = request;
        j["response_text"] = response;
        j["timestamp"] = static_cast<std::int64_t>(
            std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count());
        out << j.dump() << "\n";
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

  private:
    std::filesystem::path file_;
    std::map<std::string, std::string> entries_;
    mutable std::shared_mutex mutex_;
};

/// The generation entry point all analyses go through. Replay mode needs no
/// transport; record/live mode callers pass one (the CLI wires the HTTP
/// transport from http_transport.hpp, tests inject stubs).
class GenerationClient {
  public:
    explicit GenerationClient(GatewayConfig config, Transport transport = {})
        : config_(std::move(config)),
          cache_(std::make_shared<ResponseCache>(config_.cache_path)),
          transport_(std::move(transport)) {}

    const GatewayConfig& config() const { return config_; }
    const ResponseCache& cache() const { return *cache_; }

    std::string generate(const GenerationRequest& req) {
        const std::string key = request_key(req, config_.model_id);
        std::string cached;
        if (config_.mode == GatewayMode::replay) {
            if (cache_->lookup(key, &cached)) return cached;
            throw CacheMissError(key);
        }
        if (config_.mode == GatewayMode::record && cache_->lookup(key, &cached)) {
            return cached;
        }
        const std::string response = call_service(req);
        if (config_.mode == GatewayMode::record) {
            cache_->store(key, request_json(req), response);
        }
        return response;
    }

    nlohmann::json request_json(const GenerationRequest& req) const {
        nlohmann::json j;
        j["model"] = config_.model_id;
        j["messages"] = nlohmann::json::array({
            nlohmann::json{{"role", "user"}, {"content", req.prompt}},
        });
        j["temperature"] = req.temperature;
        j["max_tokens"] = req.max_tokens;
        if (!req.stop.empty()) j["stop"] = req.stop;
        return j;
    }

  private:
    std::string call_service(const GenerationRequest& req) {
        if (!transport_) {
            throw TransportError("no transport configured (mode " +
                                 std::string(to_string(config_.mode)) + ")");
        }
        if (config_.endpoint_url.empty()) {
            throw TransportError("no endpoint configured (mode " +
                                 std::string(to_string(config_.mode)) + ")");
        }
        const std::string body = request_json(req).dump();
        std::string last_error;
        for (int attempt = 0; attempt <= config_.retry_cap; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(100u << (attempt - 1)));
            }
            TransportResult result;
            try {
                result = transport_(config_.endpoint_url, config_.api_key, body);
            } catch (const std::exception& e) {
                last_error = e.what();
                continue;
            }
            if (result.status != 200) {
                last_error = "HTTP status " + std::to_string(result.status);
                continue;
            }
            nlohmann::json j = nlohmann::json::parse(result.body, nullptr, false);
            if (j.is_discarded() || !j.contains("choices") || j["choices"].empty() ||
                !j["choices"][0].contains("message") ||
                !j["choices"][0]["message"].contains("content")) {
                last_error = "malformed completion response";
                continue;
            }
            return j["choices"][0]["message"]["content"].get<std::string>();
        }
        throw TransportError("generation failed after " +
                             std::to_string(config_.retry_cap + 1) + " attempts: " +
                             last_error);
    }

    GatewayConfig config_;
    std::shared_ptr<ResponseCache> cache_;
    Transport transport_;
};

/// Parses raw model output into a trace. Steps are lines of the form
/// "Step k: ..." or numbered-list lines "k." / "k)"; the final answer is the
/// remainder of the last line whose content starts with "Answer:" (or
/// "Final Answer:"), else the last non-empty line with the quality flag
/// cleared. Total on any input.
inline ReasoningTrace parse_trace(std::string_view raw) {
    ReasoningTrace trace;
    trace.raw_text = std::string(raw);
    trace.answer_marker_found = false;

    std::string last_non_empty;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        std::size_t eol = raw.find('\n', pos);
        if (eol == std::string_view::npos) eol = raw.size();
        std::string line = detail::trim(raw.substr(pos, eol - pos));
        pos = eol + 1;
        if (line.empty()) continue;
        last_non_empty = line;

        // answer marker?
        std::string lowered;
        lowered.reserve(line.size());
        for (char c : line) lowered.push_back(detail::to_lower(c));
        for (const char* marker : {"final answer:", "answer:"}) {
            const std::size_t mlen = std::string_view(marker).size();
            if (lowered.rfind(marker, 0) == 0) {
                trace.final_answer = detail::trim(line.substr(mlen));
                trace.answer_marker_found = true;
                break;
            }
        }
        if (trace.answer_marker_found && (lowered.rfind("answer:", 0) == 0 ||
                                          lowered.rfind("final answer:", 0) == 0)) {
            continue;
        }

        // step prefix?
        std::size_t i = 0;
        if (lowered.rfind("step", 0) == 0) {
            i = 4;
            while (i < line.size() && detail::is_space(line[i])) ++i;
            std::size_t digits = i;
            while (digits < line.size() && detail::is_digit(line[digits])) ++digits;
            if (digits > i && digits < line.size() &&
                (line[digits] == ':' || line[digits] == '.' || line[digits] == ')')) {
                trace.steps.push_back(detail::trim(line.substr(digits + 1)));
                continue;
            }
        }
        i = 0;
        while (i < line.size() && detail::is_digit(line[i])) ++i;
        if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
            trace.steps.push_back(detail::trim(line.substr(i + 1)));
            continue;
        }
    }
    if (!trace.answer_marker_found) trace.final_answer = last_non_empty;
    return trace;
}

/// Inverse of parse_trace for marker-free step text; used by fixtures and
/// round-trip tests.
inline std::string format_trace(const std::vector<std::string>& steps,
                                std::string_view answer) {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out += "Step " + std::to_string(i + 1) + ": " + steps[i] + "\n";
    }
    out += "Answer: ";
    out += answer;
    return out;
}

namespace detail {

inline std::string substitute(std::string text, std::string_view placeholder,
                              std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
    return text;
}

}  // namespace detail

/// Versioned prompt templates. The resource files under resources/prompts/
/// carry the same text; a test pins agreement.
inline const std::string& forward_template() {
    static const std::string t =
        "You are answering a question and must show explicit reasoning.\n"
        "Question: {question}\n"
        "Think step by step. Write each step on its own line in the form \"Step k: ...\".\n"
        "Finish with exactly one line of the form \"Answer: <final answer>\".\n";
    return t;
}

inline const std::string& backward_template() {
    static const std::string t =
        "You are reconstructing the question that leads to a known answer.\n"
        "Answer: {answer}\n"
        "Work backwards step by step. Write each step on its own line in the form \"Step k: ...\".\n"
        "Finish with exactly one line of the form \"Answer: <the question you reconstructed>\".\n";
    return t;
}

inline const std::string& explain_template() {
    static const std::string t =
        "Explain how one arrives at the answer \"{answer}\" for the question below.\n"
        "Question: {question}\n"
        "Write the explanation as numbered steps, each on its own line in the form \"Step k: ...\".\n"
        "Finish with exactly one line of the form \"Answer: {answer}\".\n";
    return t;
}

inline GenerationRequest prompt_forward(std::string_view question) {
    if (question.empty()) throw std::invalid_argument("prompt_forward: empty question");
    GenerationRequest req;
    req.prompt = detail::substitute(forward_template(), "{question}", question);
    req.tag = "forward";
    return req;
}

inline GenerationRequest prompt_backward(std::string_view answer) {
    if (answer.empty()) throw std::invalid_argument("prompt_backward: empty answer");
    GenerationRequest req;
    req.prompt = detail::substitute(backward_template(), "{answer}", answer);
    req.tag = "backward";
    return req;
}

inline GenerationRequest prompt_explain(std::string_view question, std::string_view answer) {
    if (question.empty() || answer.empty()) {
        throw std::invalid_argument("prompt_explain: empty question or answer");
    }
    GenerationRequest req;
    req.prompt = detail::substitute(
        detail::substitute(explain_template(), "{question}", question), "{answer}", answer);
    req.tag = "explanation";
    return req;
}

}  // namespace cotcheck
