#pragma once

/*
 * Providers backed by an OpenAI-compatible HTTP endpoint:
 *
 *   POST {endpoint_url}/chat/completions   policy, complexity, outcome reward
 *   POST {endpoint_url}/embeddings         text and image embeddings
 *
 * Requests carry "Authorization: Bearer $<api_key_env>". Images go out as
 * base64 data URLs. Transport errors, timeouts, 429 and 5xx responses are
 * retried up to max_retries times; any failure reports the attempt count.
 * Every call builds its own client, so a provider can be shared across
 * threads.
 */

#include "thoughtcards/image.hpp"
#include "thoughtcards/providers/prompts.hpp"
#include "thoughtcards/providers/provider.hpp"

#include "httplib.h"
#include "json.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace thoughtcards::http {

using namespace std::chrono_literals;

inline constexpr std::string_view kDefaultApiKeyEnv = "THOUGHTCARDS_API_KEY";

struct ProviderConfig {
    std::string endpoint_url = "http://localhost:8000/v1";
    std::string api_key_env = std::string(kDefaultApiKeyEnv);
    std::string model_name;
    std::chrono::milliseconds timeout = 60s;
    int max_retries = 2;
    std::vector<std::chrono::milliseconds> backoff = {500ms, 2000ms};

    void validate() const {
        if (max_retries < 0) throw UsageError("max_retries must be >= 0");
        if (timeout <= 0ms) throw UsageError("timeout must be positive");
        if (endpoint_url.find("://") == std::string::npos) throw UsageError("endpoint_url needs a scheme: " + endpoint_url);
    }
};

struct Endpoint {
    std::string origin;     // scheme://host[:port]
    std::string base_path;  // "" or "/v1"
};

inline Endpoint parse_endpoint(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw UsageError("endpoint_url needs a scheme: " + std::string(url));
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint e;
    e.origin = std::string(url.substr(0, path_start));
    if (path_start != std::string_view::npos) e.base_path = std::string(url.substr(path_start));
    while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
    return e;
}

/// POSTs JSON with bearer auth and bounded retries.
class Transport {
public:
    explicit Transport(ProviderConfig config) : config_(std::move(config)), endpoint_(parse_endpoint(config_.endpoint_url)) {
        config_.validate();
    }

    const ProviderConfig& config() const noexcept { return config_; }

    nlohmann::json post_json(std::string_view route, const nlohmann::json& body) const {
        const std::string path = endpoint_.base_path + std::string(route);
        const std::string payload = body.dump();
        const int max_attempts = config_.max_retries + 1;
        std::string last_error;

        for (int attempt = 1; attempt <= max_attempts; ++attempt) {
            if (attempt > 1 && !config_.backoff.empty()) {
                const auto idx = std::min<std::size_t>(static_cast<std::size_t>(attempt - 2), config_.backoff.size() - 1);
                std::this_thread::sleep_for(config_.backoff[idx]);
            }

            httplib::Client client(endpoint_.origin);
            const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
            const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
            client.set_connection_timeout(secs.count(), usecs.count());
            client.set_read_timeout(secs.count(), usecs.count());
            client.set_write_timeout(secs.count(), usecs.count());

            httplib::Headers headers;
            if (const char* token = std::getenv(config_.api_key_env.c_str()); token != nullptr && *token != '\0') {
                headers.emplace("Authorization", std::string("Bearer ") + token);
            }

            auto res = client.Post(path, headers, payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status < 200 || res->status >= 300) {
                throw ProviderError("POST " + path + " failed with HTTP " + std::to_string(res->status), attempt);
            }
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::parse_error&) {
                throw ProviderError("POST " + path + " returned malformed JSON", attempt);
            }
        }
        throw ProviderError("POST " + path + " failed after " + std::to_string(max_attempts) + " attempts: " + last_error,
                            max_attempts);
    }

private:
    ProviderConfig config_;
    Endpoint endpoint_;
};

// ============================================================================
// Chat helpers
// ============================================================================

inline nlohmann::json user_message(std::string_view text, const std::optional<ImagePayload>& image) {
    if (!image) return {{"role", "user"}, {"content", text}};
    nlohmann::json parts = nlohmann::json::array();
    parts.push_back({{"type", "text"}, {"text", text}});
    parts.push_back({{"type", "image_url"}, {"image_url", {{"url", image_data_url(*image)}}}});
    return {{"role", "user"}, {"content", std::move(parts)}};
}

inline std::string chat(const Transport& transport, std::string_view system, nlohmann::json user,
                        const GenerationParams& params) {
    nlohmann::json body = {
        {"model", transport.config().model_name},
        {"messages", nlohmann::json::array({{{"role", "system"}, {"content", system}}, std::move(user)})},
        {"temperature", params.temperature},
        {"max_tokens", params.max_tokens},
    };
    if (params.seed) body["seed"] = *params.seed;
    const nlohmann::json reply = transport.post_json("/chat/completions", body);
    try {
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        std::string text = content.is_string() ? content.get<std::string>() : std::string();
        if (detail::trim(text).empty()) throw ProviderError("empty model output");
        return text;
    } catch (const nlohmann::json::exception&) {
        throw ProviderError("chat completion response lacks choices[0].message.content");
    }
}

/// Last non-empty line of `text` parsed as a number.
inline double parse_trailing_number(std::string_view text) {
    std::string_view line = detail::trim(text);
    if (auto nl = line.rfind('\n'); nl != std::string_view::npos) line = detail::trim(line.substr(nl + 1));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size() || line.empty()) {
        throw ParseError("expected a number, got '" + std::string(line) + "'");
    }
    return value;
}

// ============================================================================
// Providers
// ============================================================================

class HttpPolicy final : public PolicyModel {
public:
    explicit HttpPolicy(ProviderConfig config) : transport_(std::move(config)) {}

    ReasoningStep generate_step(const Query& query, std::span<const ReasoningStep> history, Action action,
                                const GenerationParams& params) const override {
        const std::string prompt = prompts::step_prompt(query, history, prompts::action_instruction(action));
        return make_step(action, chat(transport_, prompts::kSystem, user_message(prompt, query.image), params));
    }

    ReasoningStep force_answer(const Query& query, std::span<const ReasoningStep> history,
                               const GenerationParams& params) const override {
        const std::string prompt = prompts::step_prompt(query, history, prompts::kForceAnswer);
        return make_step(Action::ChainOfThought,
                         chat(transport_, prompts::kSystem, user_message(prompt, query.image), params));
    }

    std::string sample_answer(const Query& query, int sample_index, const GenerationParams& params) const override {
        GenerationParams p = params;
        if (p.seed) p.seed = *p.seed + static_cast<std::uint64_t>(sample_index);
        const std::string prompt = prompts::step_prompt(query, {}, prompts::kDirectAnswer);
        const std::string reply = chat(transport_, prompts::kSystem, user_message(prompt, query.image), p);
        if (auto marked = extract_answer(reply)) return *marked;
        return normalize_answer(reply);
    }

private:
    Transport transport_;
};

/// Expects the embeddings endpoint to accept image data URLs as input for
/// image embeddings (as CLIP-style servers do).
class HttpEmbedder final : public Embedder {
public:
    /// `dimension` 0 accepts whatever the server returns.
    explicit HttpEmbedder(ProviderConfig config, std::size_t dimension = 0)
        : transport_(std::move(config)), dimension_(dimension) {}

    Embedding embed_text(std::string_view text) const override {
        if (text.empty()) throw UsageError("cannot embed empty text");
        return embed(text);
    }

    Embedding embed_image(const ImagePayload& image) const override { return embed(image_data_url(image)); }

private:
    Embedding embed(std::string_view input) const {
        const nlohmann::json body = {{"model", transport_.config().model_name}, {"input", input}};
        const nlohmann::json reply = transport_.post_json("/embeddings", body);
        std::vector<double> values;
        try {
            values = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
        } catch (const nlohmann::json::exception&) {
            throw ProviderError("embedding response lacks data[0].embedding");
        }
        if (dimension_ != 0 && values.size() != dimension_) {
            throw DimensionMismatch("embedding has dimension " + std::to_string(values.size()) + ", run uses " +
                                    std::to_string(dimension_));
        }
        return Embedding::normalize(std::move(values));
    }

    Transport transport_;
    std::size_t dimension_;
};

class HttpComplexityEstimator final : public ComplexityEstimator {
public:
    explicit HttpComplexityEstimator(ProviderConfig config) : transport_(std::move(config)) {}

    double estimate_complexity(const Query& query) const override {
        GenerationParams params;
        params.temperature = 0.0;
        const std::string prompt = "Problem:\n" + query.text + "\n\n" + std::string(prompts::kComplexity);
        const double count =
            parse_trailing_number(chat(transport_, prompts::kSystem, user_message(prompt, query.image), params));
        if (!(count >= 0.0)) throw ParseError("negative condition count");
        return count;
    }

private:
    Transport transport_;
};

class HttpOutcomeScorer final : public OutcomeScorer {
public:
    explicit HttpOutcomeScorer(ProviderConfig config) : transport_(std::move(config)) {}

    double score_outcome(const Query& query, const Trajectory& t) const override {
        GenerationParams params;
        params.temperature = 0.0;
        std::string prompt = "Problem:\n" + query.text + "\n\nProposed solution:\n" + prompts::render_history(t.steps);
        const double score =
            parse_trailing_number(chat(transport_, prompts::kOutcomeScore, nlohmann::json{{"role", "user"}, {"content", prompt}}, params));
        if (!(score >= 0.0 && score <= 1.0)) throw ParseError("outcome score outside [0, 1]");
        return score;
    }

private:
    Transport transport_;
};

}  // namespace thoughtcards::http
