#pragma once

/*
 * Deterministic providers for tests and offline runs.
 *
 * ScriptedPolicy answers from a JSON script that maps
 *
 *     "<query_id>|<a_i>→<a_j>→..."   ->  step content
 *
 * where the path lists the actions taken so far followed by the requested
 * action. Exact keys are matched byte-for-byte. A path segment may also be
 * `*` (any one action) or `**` (zero or more actions), so a script can cover
 * whole families of paths without enumerating them. When several patterns
 * match, the most specific wins:
 *
 *   1. an exact key;
 *   2. the pattern with the most literal action segments;
 *   3. then the most `*` segments;
 *   4. then the fewest `**` segments;
 *   5. then the lexicographically smallest key.
 *
 * Vote samples use "<query_id>|@vote/<i>", falling back to "<query_id>|@vote".
 * A request nothing matches fails with "unscripted request".
 */

#include "thoughtcards/image.hpp"
#include "thoughtcards/providers/provider.hpp"
#include "thoughtcards/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace thoughtcards {

inline constexpr std::string_view kVoteKey = "@vote";

/// Path-segment form of a script key.
inline std::string path_key(std::string_view query_id, std::span<const Action> path) {
    std::string key(query_id);
    key += '|';
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i != 0) key += kTemplateArrow;
        key += short_name(path[i]);
    }
    return key;
}

class PolicyScript {
public:
    PolicyScript() = default;

    static PolicyScript from_json(const nlohmann::json& doc) {
        if (!doc.is_object()) throw ParseError("mock script must be a JSON object");
        PolicyScript script;
        for (const auto& [key, value] : doc.items()) {
            if (!value.is_string()) throw ParseError("mock script value for '" + key + "' must be a string");
            script.add(key, value.get<std::string>());
        }
        script.finish();
        return script;
    }

    static PolicyScript load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open mock script '" + path.string() + "'");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("mock script '" + path.string() + "': " + e.what());
        }
        return from_json(doc);
    }

    const std::string* lookup(std::string_view query_id, std::span<const Action> path) const {
        const std::string key = path_key(query_id, path);
        if (auto it = exact_.find(key); it != exact_.end()) return &it->second;
        auto pit = patterns_.find(std::string(query_id));
        if (pit == patterns_.end()) return nullptr;
        for (const auto& p : pit->second) {
            if (matches(p.segments, path)) return &p.content;
        }
        return nullptr;
    }

    const std::string* lookup_vote(std::string_view query_id, int index) const {
        std::string base(query_id);
        base += '|';
        base += kVoteKey;
        if (auto it = exact_.find(base + "/" + std::to_string(index)); it != exact_.end()) return &it->second;
        if (auto it = exact_.find(base); it != exact_.end()) return &it->second;
        return nullptr;
    }

    std::size_t size() const noexcept {
        std::size_t n = exact_.size();
        for (const auto& [_, v] : patterns_) n += v.size();
        return n;
    }

private:
    enum class Segment : int { Any = -1, AnyRun = -2 };  // non-negative values are action indices

    struct Pattern {
        std::vector<int> segments;
        int literals = 0;
        int singles = 0;
        int runs = 0;
        std::string key;
        std::string content;
    };

    void add(const std::string& key, std::string content) {
        const auto bar = key.rfind('|');
        if (bar == std::string::npos || bar == 0) throw ParseError("mock script key '" + key + "' lacks 'query_id|'");
        std::string_view path = std::string_view(key).substr(bar + 1);
        if (path == kVoteKey || path.starts_with(std::string(kVoteKey) + "/")) {
            exact_.emplace(key, std::move(content));
            return;
        }

        Pattern p;
        p.key = key;
        p.content = std::move(content);
        while (true) {
            const auto arrow = path.find(kTemplateArrow);
            const std::string_view token = path.substr(0, arrow);
            if (token == "*") {
                p.segments.push_back(static_cast<int>(Segment::Any));
                ++p.singles;
            } else if (token == "**") {
                p.segments.push_back(static_cast<int>(Segment::AnyRun));
                ++p.runs;
            } else if (auto a = parse_action(token); a && token == short_name(*a)) {
                p.segments.push_back(static_cast<int>(action_index(*a)));
                ++p.literals;
            } else {
                throw ParseError("mock script key '" + key + "' has invalid segment '" + std::string(token) + "'");
            }
            if (arrow == std::string_view::npos) break;
            path.remove_prefix(arrow + kTemplateArrow.size());
        }

        if (p.singles == 0 && p.runs == 0) {
            exact_.emplace(key, std::move(p.content));
        } else {
            patterns_[key.substr(0, bar)].push_back(std::move(p));
        }
    }

    void finish() {
        for (auto& [_, list] : patterns_) {
            std::sort(list.begin(), list.end(), [](const Pattern& a, const Pattern& b) {
                return std::tuple(-a.literals, -a.singles, a.runs, std::string_view(a.key)) <
                       std::tuple(-b.literals, -b.singles, b.runs, std::string_view(b.key));
            });
        }
    }

    static bool matches(std::span<const int> pattern, std::span<const Action> path) {
        if (pattern.empty()) return path.empty();
        const int head = pattern.front();
        if (head == static_cast<int>(Segment::AnyRun)) {
            for (std::size_t skip = 0; skip <= path.size(); ++skip) {
                if (matches(pattern.subspan(1), path.subspan(skip))) return true;
            }
            return false;
        }
        if (path.empty()) return false;
        if (head != static_cast<int>(Segment::Any) && head != static_cast<int>(action_index(path.front()))) return false;
        return matches(pattern.subspan(1), path.subspan(1));
    }

    std::unordered_map<std::string, std::string> exact_;
    std::unordered_map<std::string, std::vector<Pattern>> patterns_;  // keyed by query id
};

/// Policy model backed by a PolicyScript. The image and sampling
/// parameters are ignored; output depends only on (query id, path).
class ScriptedPolicy final : public PolicyModel {
public:
    explicit ScriptedPolicy(PolicyScript script) : script_(std::move(script)) {}

    ReasoningStep generate_step(const Query& query, std::span<const ReasoningStep> history, Action action,
                                const GenerationParams&) const override {
        std::vector<Action> path;
        path.reserve(history.size() + 1);
        for (const auto& s : history) path.push_back(s.action);
        path.push_back(action);
        const std::string* content = script_.lookup(query.id, path);
        if (content == nullptr) throw ProviderError("unscripted request: " + path_key(query.id, path));
        if (content->empty()) throw ProviderError("empty model output for " + path_key(query.id, path));
        return make_step(action, *content);
    }

    ReasoningStep force_answer(const Query& query, std::span<const ReasoningStep> history,
                               const GenerationParams& params) const override {
        return generate_step(query, history, Action::ChainOfThought, params);
    }

    std::string sample_answer(const Query& query, int sample_index, const GenerationParams&) const override {
        const std::string* content = script_.lookup_vote(query.id, sample_index);
        if (content == nullptr) {
            throw ProviderError("unscripted request: " + query.id + "|" + std::string(kVoteKey) + "/" +
                                std::to_string(sample_index));
        }
        if (auto marked = extract_answer(*content)) return *marked;
        return normalize_answer(*content);
    }

    const PolicyScript& script() const noexcept { return script_; }

private:
    PolicyScript script_;
};

/// Feature-hashed embedder. Each lowercase alphanumeric token maps to a
/// pseudo-random Gaussian vector seeded by its hash; a text embeds as the
/// normalized sum of its token vectors, so texts sharing vocabulary land
/// close together. Images embed from a hash of their base64 content.
class HashEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDefaultDimension = 64;

    explicit HashEmbedder(std::size_t dimension = kDefaultDimension, std::uint64_t seed = 0)
        : dimension_(dimension), seed_(seed) {
        if (dimension_ == 0) throw UsageError("embedding dimension must be positive");
    }

    Embedding embed_text(std::string_view text) const override {
        if (text.empty()) throw UsageError("cannot embed empty text");
        std::vector<double> sum(dimension_, 0.0);
        std::string token;
        bool any = false;
        auto flush = [&] {
            if (token.empty()) return;
            add_hashed(sum, "t:" + token);
            token.clear();
            any = true;
        };
        for (char c : text) {
            if (std::isalnum(static_cast<unsigned char>(c))) {
                token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            } else {
                flush();
            }
        }
        flush();
        if (!any) add_hashed(sum, "s:" + std::string(text));
        return Embedding::normalize(std::move(sum));
    }

    Embedding embed_image(const ImagePayload& image) const override {
        std::vector<double> v(dimension_, 0.0);
        add_hashed(v, "i:" + image_base64(image));
        return Embedding::normalize(std::move(v));
    }

    std::size_t dimension() const noexcept { return dimension_; }

private:
    void add_hashed(std::vector<double>& acc, std::string_view content) const {
        SplitMix64 gen(derive_seed(seed_, content));
        for (double& x : acc) x += standard_normal(gen);
    }

    std::size_t dimension_;
    std::uint64_t seed_;
};

/// Problem complexity as the number of declared known conditions.
class ConditionCountEstimator final : public ComplexityEstimator {
public:
    double estimate_complexity(const Query& query) const override {
        return static_cast<double>(query.conditions.size());
    }
};

/// 1 on a gold match, 0 on a mismatch, 0.5 when there is no gold answer.
class GoldMatchScorer final : public OutcomeScorer {
public:
    double score_outcome(const Query& query, const Trajectory& t) const override {
        if (!query.gold_answer) return 0.5;
        return normalize_answer(t.answer) == normalize_answer(*query.gold_answer) ? 1.0 : 0.0;
    }
};

}  // namespace thoughtcards
