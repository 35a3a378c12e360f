#pragma once

/*
 * Thought-card construction: pick the best search path per seed question by
 * a value-of-computation score, collect the question-path repository, and
 * distill it into one card per distinct action template.
 */

#include "thoughtcards/core.hpp"
#include "thoughtcards/mcts.hpp"
#include "thoughtcards/parallel.hpp"
#include "thoughtcards/providers/provider.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace thoughtcards::cards {

struct VocConfig {
    double k = 0.9;

    void validate() const {
        if (!(k >= 0.0 && k <= 1.0)) throw UsageError("voc k must be in [0, 1]");
    }
};

struct QuestionPathEntry {
    std::string query_id;
    Trajectory trajectory;
    double voc_score = 0.0;
    double pc = 0.0;
    Embedding tis;
};

struct ThoughtCard {
    std::string card_id;  // canonical template string
    ActionTemplate action_template;
    double avg_pc = 0.0;
    Embedding avg_tis;
    std::size_t support = 0;

    friend bool operator==(const ThoughtCard&, const ThoughtCard&) = default;
};

// ============================================================================
// Path scoring
// ============================================================================

/// k * reward - (1 - k) * cost
inline double voc_score(double reward, std::size_t cost, double k) noexcept {
    return k * reward - (1.0 - k) * static_cast<double>(cost);
}

/// Highest VOC score; ties go to the lower cost, then the smaller template string.
inline const Trajectory& select_best_path(std::span<const Trajectory> paths, double k) {
    if (paths.empty()) throw UsageError("select_best_path needs at least one path");
    const Trajectory* best = &paths.front();
    double best_score = voc_score(best->reward, cost(*best), k);
    std::string best_key = template_of(*best).to_string();
    for (const Trajectory& p : paths.subspan(1)) {
        const double score = voc_score(p.reward, cost(p), k);
        std::string key = template_of(p).to_string();
        if (std::tuple(-score, cost(p), std::string_view(key)) <
            std::tuple(-best_score, cost(*best), std::string_view(best_key))) {
            best = &p;
            best_score = score;
            best_key = std::move(key);
        }
    }
    return *best;
}

// ============================================================================
// Repository
// ============================================================================

struct QueryFailure {
    std::string query_id;
    std::string message;
};

struct RepositoryBuild {
    std::vector<QuestionPathEntry> entries;  // sorted by query_id
    std::size_t queries = 0;
    std::size_t solved = 0;
    std::size_t skipped = 0;  // search found no answer-bearing path
    std::vector<QueryFailure> failures;
};

struct BuildOptions {
    int jobs = 1;
    GenerationParams params;
    mcts::TraceSink trace;  // must be thread-safe when jobs > 1
};

/// Searches every seed query, keeps the best path of each solved one and
/// annotates it with problem complexity and text-image semantics.
inline RepositoryBuild build_repository(std::span<const Query> seed, const Providers& providers,
                                        const mcts::MctsConfig& mcts_config, const VocConfig& voc,
                                        const BuildOptions& options = {}) {
    if (seed.empty()) throw UsageError("seed set is empty");
    mcts_config.validate();
    voc.validate();
    std::set<std::string_view> ids;
    for (const Query& q : seed) {
        validate(q);
        if (!ids.insert(q.id).second) throw UsageError("duplicate query id '" + q.id + "'");
    }

    struct Slot {
        std::optional<QuestionPathEntry> entry;
        std::optional<std::string> error;
    };
    std::vector<Slot> slots(seed.size());

    parallel_for(seed.size(), options.jobs, [&](std::size_t i) {
        const Query& q = seed[i];
        try {
            const auto paths = mcts::run_search(q, providers.policy, mcts_config, options.params, options.trace).paths;
            if (paths.empty()) return;
            const Trajectory& best = select_best_path(paths, voc.k);
            QuestionPathEntry e;
            e.query_id = q.id;
            e.trajectory = best;
            e.voc_score = voc_score(best.reward, cost(best), voc.k);
            e.pc = providers.complexity.estimate_complexity(q);
            if (!(e.pc >= 0.0) || !std::isfinite(e.pc)) throw ParseError("complexity must be a finite non-negative number");
            e.tis = joint_embedding(providers.embedder, q.image, q.text);
            slots[i].entry = std::move(e);
        } catch (const std::exception& ex) {
            slots[i].error = ex.what();
        }
    });

    RepositoryBuild out;
    out.queries = seed.size();
    for (std::size_t i = 0; i < seed.size(); ++i) {
        if (slots[i].error) {
            out.failures.push_back({seed[i].id, *slots[i].error});
        } else if (slots[i].entry) {
            out.entries.push_back(std::move(*slots[i].entry));
        } else {
            ++out.skipped;
        }
    }
    out.solved = out.entries.size();
    if (out.failures.size() == seed.size()) {
        throw Error("every seed query failed; first error: " + out.failures.front().message);
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const auto& a, const auto& b) { return a.query_id < b.query_id; });
    std::sort(out.failures.begin(), out.failures.end(),
              [](const auto& a, const auto& b) { return a.query_id < b.query_id; });
    return out;
}

// ============================================================================
// Distillation
// ============================================================================

class DistillationError : public Error {
public:
    DistillationError(std::string card_id, const std::string& what)
        : Error("card " + card_id + ": " + what), card_id_(std::move(card_id)) {}

    const std::string& card_id() const noexcept { return card_id_; }

private:
    std::string card_id_;
};

/// One card per distinct template, carrying the mean complexity and the
/// re-normalized mean embedding of its supporting questions. Sorted by id.
inline std::vector<ThoughtCard> distill_cards(std::span<const QuestionPathEntry> repo) {
    if (repo.empty()) throw UsageError("cannot distill an empty repository");
    std::map<std::string, std::vector<const QuestionPathEntry*>> groups;
    for (const auto& e : repo) groups[template_of(e.trajectory).to_string()].push_back(&e);

    std::vector<ThoughtCard> cards;
    cards.reserve(groups.size());
    for (auto& [id, members] : groups) {
        // Fixed summation order keeps the result independent of input order.
        std::sort(members.begin(), members.end(),
                  [](const auto* a, const auto* b) { return a->query_id < b->query_id; });
        ThoughtCard card;
        card.card_id = id;
        card.action_template = ActionTemplate::parse(id);
        double pc_sum = 0.0;
        std::vector<Embedding> tis;
        tis.reserve(members.size());
        for (const auto* m : members) {
            pc_sum += m->pc;
            tis.push_back(m->tis);
        }
        card.avg_pc = pc_sum / static_cast<double>(members.size());
        try {
            card.avg_tis = mean_embedding(tis);
        } catch (const Error& e) {
            throw DistillationError(id, e.what());
        }
        card.support = members.size();
        cards.push_back(std::move(card));
    }
    return cards;
}

// ============================================================================
// Card files
// ============================================================================

inline constexpr std::string_view kCardSchemaVersion = "1";

class CardFileError : public Error {
public:
    enum class Kind { Io, VersionMismatch, Malformed, DimensionMismatch };

    CardFileError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

inline nlohmann::json cards_to_json(std::span<const ThoughtCard> cards) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : cards) {
        nlohmann::json tmpl = nlohmann::json::array();
        for (Action a : c.action_template.actions) tmpl.push_back(std::string(short_name(a)));
        list.push_back({
            {"card_id", c.card_id},
            {"template", std::move(tmpl)},
            {"avg_pc", c.avg_pc},
            {"avg_tis", std::vector<double>(c.avg_tis.values().begin(), c.avg_tis.values().end())},
            {"support", c.support},
        });
    }
    return {
        {"schema_version", kCardSchemaVersion},
        {"embedding_dim", cards.empty() ? 0 : cards.front().avg_tis.dimension()},
        {"cards", std::move(list)},
    };
}

inline std::vector<ThoughtCard> cards_from_json(const nlohmann::json& doc) {
    using Kind = CardFileError::Kind;
    auto malformed = [](const std::string& what) { return CardFileError(Kind::Malformed, "malformed card file: " + what); };

    if (!doc.is_object()) throw malformed("top level is not an object");
    if (!doc.contains("schema_version") || !doc["schema_version"].is_string()) throw malformed("missing schema_version");
    if (const auto v = doc["schema_version"].get<std::string>(); v != kCardSchemaVersion) {
        throw CardFileError(Kind::VersionMismatch, "unsupported card schema version '" + v + "'");
    }
    if (!doc.contains("embedding_dim") || !doc["embedding_dim"].is_number_unsigned()) throw malformed("missing embedding_dim");
    if (!doc.contains("cards") || !doc["cards"].is_array()) throw malformed("missing cards array");
    const auto dim = doc["embedding_dim"].get<std::size_t>();

    std::vector<ThoughtCard> cards;
    std::set<std::string> seen;
    for (const auto& rec : doc["cards"]) {
        try {
            ThoughtCard c;
            c.card_id = rec.at("card_id").get<std::string>();
            std::vector<Action> actions;
            for (const auto& tok : rec.at("template")) {
                auto a = parse_action(tok.get<std::string>());
                if (!a) throw malformed("bad action '" + tok.get<std::string>() + "'");
                actions.push_back(*a);
            }
            if (actions.empty()) throw malformed("empty template in " + c.card_id);
            c.action_template.actions = std::move(actions);
            if (c.action_template.to_string() != c.card_id) throw malformed("card_id does not match template: " + c.card_id);
            if (!seen.insert(c.card_id).second) throw malformed("duplicate card " + c.card_id);
            c.avg_pc = rec.at("avg_pc").get<double>();
            if (!(c.avg_pc >= 0.0) || !std::isfinite(c.avg_pc)) throw malformed("negative avg_pc in " + c.card_id);
            auto tis = rec.at("avg_tis").get<std::vector<double>>();
            if (tis.size() != dim) {
                throw CardFileError(Kind::DimensionMismatch, "card " + c.card_id + " has dimension " +
                                                                 std::to_string(tis.size()) + ", library has " +
                                                                 std::to_string(dim));
            }
            c.avg_tis = Embedding::from_unit(std::move(tis));
            if (!rec.at("support").is_number_unsigned()) throw malformed("support must be a positive integer");
            c.support = rec.at("support").get<std::size_t>();
            if (c.support < 1) throw malformed("support must be >= 1 in " + c.card_id);
            cards.push_back(std::move(c));
        } catch (const CardFileError&) {
            throw;
        } catch (const std::exception& e) {
            throw malformed(e.what());
        }
    }
    return cards;
}

inline void save_cards(std::span<const ThoughtCard> cards, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CardFileError(CardFileError::Kind::Io, "cannot write card file '" + path.string() + "'");
    out << cards_to_json(cards).dump(2) << '\n';
    if (!out) throw CardFileError(CardFileError::Kind::Io, "write failed for '" + path.string() + "'");
}

inline std::vector<ThoughtCard> load_cards(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CardFileError(CardFileError::Kind::Io, "cannot open card file '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw CardFileError(CardFileError::Kind::Malformed, "malformed card file: " + std::string(e.what()));
    }
    return cards_from_json(doc);
}

}  // namespace thoughtcards::cards
