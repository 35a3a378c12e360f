#pragma once

// Run configuration, read from JSON. Every field is optional:
//
// {
//   "providers": {
//     "policy":     {"kind": "mock"} | {"kind": "http", "endpoint_url": ..., "api_key_env": ...,
//                                       "model_name": ..., "timeout_ms": ..., "max_retries": ...,
//                                       "backoff_ms": [...]},
//     "embedding":  {...},
//     "complexity": {...},
//     "reward":     {"kind": "none" | "mock" | "http", ...}
//   },
//   "mock_script": "path/to/script.json",
//   "embedding_dim": 64,
//   "mcts": {"iterations": 32, "branching": 3, "max_depth": 6, "exploration_weight": 1.0,
//            "alpha": 0.5, "vote_samples": 3},
//   "voc": {"k": 0.9},
//   "generation": {"temperature": 0.7, "max_tokens": 512},
//   "seed_limit": 500,
//   "run_seed": 0
// }

#include "thoughtcards/cards.hpp"
#include "thoughtcards/mcts.hpp"
#include "thoughtcards/providers/http.hpp"
#include "thoughtcards/providers/mock.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

namespace thoughtcards {

enum class ProviderKind { None, Mock, Http };

inline ProviderKind parse_provider_kind(std::string_view s) {
    if (s == "mock") return ProviderKind::Mock;
    if (s == "http") return ProviderKind::Http;
    if (s == "none") return ProviderKind::None;
    throw UsageError("unknown provider kind '" + std::string(s) + "'");
}

struct ProviderSlot {
    ProviderKind kind = ProviderKind::Mock;
    http::ProviderConfig http;
};

inline constexpr std::size_t kDefaultSeedLimit = 500;

struct RunConfig {
    ProviderSlot policy;
    ProviderSlot embedding;
    ProviderSlot complexity;
    ProviderSlot reward{ProviderKind::None, {}};
    std::optional<std::filesystem::path> mock_script;
    std::optional<std::size_t> embedding_dim;  // mock default 64; http accepts the server's size
    mcts::MctsConfig mcts;
    cards::VocConfig voc;
    GenerationParams generation;
    std::optional<std::size_t> seed_limit;
    std::uint64_t run_seed = 0;

    void validate() const {
        mcts.validate();
        voc.validate();
        generation.validate();
        for (const ProviderSlot* slot : {&policy, &embedding, &complexity, &reward}) {
            if (slot->kind != ProviderKind::Http) continue;
            slot->http.validate();
            if (std::getenv(slot->http.api_key_env.c_str()) == nullptr) {
                throw UsageError("environment variable " + slot->http.api_key_env + " is not set");
            }
        }
        if (policy.kind == ProviderKind::None || embedding.kind == ProviderKind::None ||
            complexity.kind == ProviderKind::None) {
            throw UsageError("only the reward provider may be 'none'");
        }
        if (policy.kind == ProviderKind::Mock && !mock_script) throw UsageError("mock policy needs a mock_script");
    }
};

namespace detail {

inline void read_slot(const nlohmann::json& j, ProviderSlot& slot) {
    if (j.contains("kind")) slot.kind = parse_provider_kind(j["kind"].get<std::string>());
    auto& h = slot.http;
    h.endpoint_url = j.value("endpoint_url", h.endpoint_url);
    h.api_key_env = j.value("api_key_env", h.api_key_env);
    h.model_name = j.value("model_name", h.model_name);
    if (j.contains("timeout_ms")) h.timeout = std::chrono::milliseconds(j["timeout_ms"].get<long long>());
    h.max_retries = j.value("max_retries", h.max_retries);
    if (j.contains("backoff_ms")) {
        h.backoff.clear();
        for (const auto& ms : j["backoff_ms"]) h.backoff.emplace_back(ms.get<long long>());
    }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    RunConfig c;
    try {
        if (j.contains("providers")) {
            const auto& p = j["providers"];
            if (p.contains("policy")) detail::read_slot(p["policy"], c.policy);
            if (p.contains("embedding")) detail::read_slot(p["embedding"], c.embedding);
            if (p.contains("complexity")) detail::read_slot(p["complexity"], c.complexity);
            if (p.contains("reward")) detail::read_slot(p["reward"], c.reward);
        }
        if (j.contains("mock_script")) {
            std::filesystem::path script = j["mock_script"].get<std::string>();
            c.mock_script = script.is_absolute() ? script : base_dir / script;
        }
        if (j.contains("embedding_dim")) c.embedding_dim = j["embedding_dim"].get<std::size_t>();
        if (j.contains("mcts")) {
            const auto& m = j["mcts"];
            c.mcts.iterations = m.value("iterations", c.mcts.iterations);
            c.mcts.branching = m.value("branching", c.mcts.branching);
            c.mcts.max_depth = m.value("max_depth", c.mcts.max_depth);
            c.mcts.exploration_weight = m.value("exploration_weight", c.mcts.exploration_weight);
            c.mcts.alpha = m.value("alpha", c.mcts.alpha);
            c.mcts.vote_samples = m.value("vote_samples", c.mcts.vote_samples);
        }
        if (j.contains("voc")) c.voc.k = j["voc"].value("k", c.voc.k);
        if (j.contains("generation")) {
            c.generation.temperature = j["generation"].value("temperature", c.generation.temperature);
            c.generation.max_tokens = j["generation"].value("max_tokens", c.generation.max_tokens);
        }
        if (j.contains("seed_limit") && !j["seed_limit"].is_null()) c.seed_limit = j["seed_limit"].get<std::size_t>();
        c.run_seed = j.value("run_seed", c.run_seed);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("invalid config: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path.string() + "'");
    try {
        return config_from_json(nlohmann::json::parse(in), path.parent_path());
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError("config '" + path.string() + "': " + e.what());
    }
}

/// Owns the provider objects a RunConfig describes.
class ProviderSet {
public:
    explicit ProviderSet(const RunConfig& config) {
        config.validate();
        switch (config.policy.kind) {
            case ProviderKind::Mock:
                policy_ = std::make_unique<ScriptedPolicy>(PolicyScript::load(*config.mock_script));
                break;
            default:
                policy_ = std::make_unique<http::HttpPolicy>(config.policy.http);
        }
        if (config.embedding.kind == ProviderKind::Mock) {
            embedder_ = std::make_unique<HashEmbedder>(config.embedding_dim.value_or(HashEmbedder::kDefaultDimension));
        } else {
            embedder_ = std::make_unique<http::HttpEmbedder>(config.embedding.http, config.embedding_dim.value_or(0));
        }
        if (config.complexity.kind == ProviderKind::Mock) {
            complexity_ = std::make_unique<ConditionCountEstimator>();
        } else {
            complexity_ = std::make_unique<http::HttpComplexityEstimator>(config.complexity.http);
        }
        if (config.reward.kind == ProviderKind::Mock) {
            orm_ = std::make_unique<GoldMatchScorer>();
        } else if (config.reward.kind == ProviderKind::Http) {
            orm_ = std::make_unique<http::HttpOutcomeScorer>(config.reward.http);
        }
    }

    Providers view() const { return Providers{*policy_, *embedder_, *complexity_, orm_.get()}; }
    const PolicyModel& policy() const { return *policy_; }

private:
    std::unique_ptr<PolicyModel> policy_;
    std::unique_ptr<Embedder> embedder_;
    std::unique_ptr<ComplexityEstimator> complexity_;
    std::unique_ptr<OutcomeScorer> orm_;
};

}  // namespace thoughtcards
