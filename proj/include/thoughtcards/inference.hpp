#pragma once

/*
 * Guided inference: run each retrieved card as a reasoning plan for the test
 * query, then pick the final answer.
 *
 * Verification votes first. Answer-bearing candidates are clustered by
 * normalized answer and the modal cluster wins (ties go to the cluster that
 * appears first in retrieval order). The outcome reward model, when present,
 * only ranks members inside the winning cluster; without one the cheapest
 * member wins. Failed and answerless candidates never count toward the vote.
 */

#include "thoughtcards/cards.hpp"
#include "thoughtcards/matching.hpp"
#include "thoughtcards/providers/provider.hpp"
#include "thoughtcards/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace thoughtcards::inference {

using cards::ThoughtCard;

enum class CandidateStatus { Answered, Answerless, Failed };

inline std::string_view to_string(CandidateStatus s) noexcept {
    switch (s) {
        case CandidateStatus::Answered: return "answered";
        case CandidateStatus::Answerless: return "answerless";
        case CandidateStatus::Failed: return "failed";
    }
    return "failed";
}

struct Candidate {
    std::string card_id;
    std::optional<Trajectory> trajectory;  // only for answered candidates
    std::string normalized_answer;
    std::optional<double> orm_score;
    CandidateStatus status = CandidateStatus::Failed;
    std::string error;

    bool answered() const noexcept { return status == CandidateStatus::Answered && trajectory.has_value(); }
    std::size_t cost() const noexcept { return trajectory ? thoughtcards::cost(*trajectory) : 0; }
};

/// Candidate from a completed trajectory.
inline Candidate answered_candidate(std::string card_id, Trajectory t) {
    Candidate c;
    c.card_id = std::move(card_id);
    c.normalized_answer = normalize_answer(t.answer);
    c.trajectory = std::move(t);
    c.status = CandidateStatus::Answered;
    return c;
}

struct VerifiedResult {
    Trajectory final;
    std::string answer;
    std::string selected_card;
    double vote_confidence = 0.0;
    std::vector<Candidate> candidates;
};

// ============================================================================
// Card instantiation
// ============================================================================

/// Runs the card's actions in order. Stops early at the first step that
/// states an answer; if none does, appends one forced chain-of-thought
/// step. Returns nullopt when even that step has no answer. Provider
/// failures propagate.
inline std::optional<Trajectory> instantiate_card(const Query& query, const ThoughtCard& card,
                                                  const PolicyModel& policy, const GenerationParams& params) {
    std::vector<ReasoningStep> steps;
    steps.reserve(card.action_template.size() + 1);
    for (Action a : card.action_template.actions) {
        steps.push_back(policy.generate_step(query, steps, a, params));
        if (steps.back().extracted_answer) break;
    }
    if (!steps.back().extracted_answer) {
        steps.push_back(policy.force_answer(query, steps, params));
        if (!steps.back().extracted_answer) return std::nullopt;
    }
    Trajectory t;
    t.query_id = query.id;
    t.answer = *steps.back().extracted_answer;
    t.steps = std::move(steps);
    t.reward = 0.0;
    return t;
}

/// instantiate_card, with failures and missing answers folded into the status.
inline Candidate run_candidate(const Query& query, const ThoughtCard& card, const PolicyModel& policy,
                               const GenerationParams& params) {
    try {
        if (auto t = instantiate_card(query, card, policy, params)) return answered_candidate(card.card_id, std::move(*t));
        Candidate c;
        c.card_id = card.card_id;
        c.status = CandidateStatus::Answerless;
        return c;
    } catch (const std::exception& e) {
        Candidate c;
        c.card_id = card.card_id;
        c.status = CandidateStatus::Failed;
        c.error = e.what();
        return c;
    }
}

// ============================================================================
// Verification
// ============================================================================

struct Vote {
    std::string answer;
    double confidence = 0.0;
    std::size_t count = 0;
};

/// Modal answer and its share; among equally frequent answers the one seen first wins.
inline Vote majority_vote(std::span<const std::string> answers) {
    if (answers.empty()) throw UsageError("majority_vote needs at least one answer");
    std::unordered_map<std::string_view, std::size_t> counts;
    for (const auto& a : answers) ++counts[a];
    Vote best;
    for (const auto& a : answers) {
        const std::size_t n = counts[a];
        if (n > best.count) {
            best.count = n;
            best.answer = a;
        }
    }
    best.confidence = static_cast<double>(best.count) / static_cast<double>(answers.size());
    return best;
}

inline VerifiedResult verify_and_select(const Query& query, std::vector<Candidate> candidates,
                                        const OutcomeScorer* orm = nullptr) {
    std::vector<std::string> answers;
    for (const auto& c : candidates) {
        if (c.answered()) answers.push_back(c.normalized_answer);
    }
    if (answers.empty()) throw VerificationError("no candidate produced an answer for query '" + query.id + "'");
    const Vote vote = majority_vote(answers);

    std::vector<std::size_t> cluster;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].answered() && candidates[i].normalized_answer == vote.answer) cluster.push_back(i);
    }
    if (orm != nullptr) {
        for (std::size_t i : cluster) candidates[i].orm_score = orm->score_outcome(query, *candidates[i].trajectory);
    }
    auto key = [&](std::size_t i) {
        const Candidate& c = candidates[i];
        return std::tuple(-c.orm_score.value_or(0.0), c.cost(), std::string_view(c.card_id));
    };
    const std::size_t winner = *std::min_element(cluster.begin(), cluster.end(),
                                                 [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

    VerifiedResult result;
    result.final = *candidates[winner].trajectory;
    result.answer = vote.answer;
    result.selected_card = candidates[winner].card_id;
    result.vote_confidence = vote.confidence;
    result.candidates = std::move(candidates);
    return result;
}

// ============================================================================
// Per-query pipeline
// ============================================================================

struct QueryResult {
    std::string query_id;
    std::optional<VerifiedResult> verified;
    std::vector<Candidate> candidates;  // always populated, also on failure
    std::string error;
};

/// Deterministic per-candidate generation seed.
inline GenerationParams candidate_params(const GenerationParams& base, std::uint64_t run_seed,
                                         std::string_view query_id, std::string_view card_id) {
    GenerationParams p = base;
    std::string key(query_id);
    key += '|';
    key += card_id;
    p.seed = derive_seed(run_seed, key);
    return p;
}

/// Retrieve cards, instantiate each, verify. Errors are captured in the result.
inline QueryResult answer_query(const Query& query, std::span<const ThoughtCard> library, const Providers& providers,
                                const GenerationParams& params = {}, std::uint64_t run_seed = 0) {
    QueryResult out;
    out.query_id = query.id;
    try {
        validate(query);
        const double pc = providers.complexity.estimate_complexity(query);
        const Embedding tis = joint_embedding(providers.embedder, query.image, query.text);
        const auto selected = matching::select_top5(library, tis, pc);
        for (const auto& card : selected) {
            out.candidates.push_back(
                run_candidate(query, card, providers.policy, candidate_params(params, run_seed, query.id, card.card_id)));
        }
        out.verified = verify_and_select(query, out.candidates, providers.orm);
        out.candidates = out.verified->candidates;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

/// Baseline without cards: one chain-of-thought pass straight from the query.
inline QueryResult answer_unguided(const Query& query, const PolicyModel& policy, const GenerationParams& params = {},
                                   std::uint64_t run_seed = 0) {
    static const ThoughtCard kSingleCot{"a4", ActionTemplate{{Action::ChainOfThought}}, 0.0, {}, 1};
    QueryResult out;
    out.query_id = query.id;
    try {
        validate(query);
        out.candidates.push_back(
            run_candidate(query, kSingleCot, policy, candidate_params(params, run_seed, query.id, "unguided")));
        out.verified = verify_and_select(query, out.candidates, nullptr);
        out.candidates = out.verified->candidates;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

/// One results-file record.
inline nlohmann::json to_json(const QueryResult& r) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : r.candidates) {
        nlohmann::json rec = {
            {"card_id", c.card_id},
            {"answer", c.answered() ? nlohmann::json(c.normalized_answer) : nlohmann::json(nullptr)},
            {"cost", c.answered() ? nlohmann::json(c.cost()) : nlohmann::json(nullptr)},
            {"orm_score", c.orm_score ? nlohmann::json(*c.orm_score) : nlohmann::json(nullptr)},
            {"status", to_string(c.status)},
        };
        if (!c.error.empty()) rec["error"] = c.error;
        cands.push_back(std::move(rec));
    }
    nlohmann::json rec = {
        {"query_id", r.query_id},
        {"answer", r.verified ? nlohmann::json(r.verified->answer) : nlohmann::json(nullptr)},
        {"vote_confidence", r.verified ? r.verified->vote_confidence : 0.0},
        {"selected_card", r.verified ? nlohmann::json(r.verified->selected_card) : nlohmann::json(nullptr)},
        {"candidates", std::move(cands)},
    };
    if (!r.error.empty()) rec["error"] = r.error;
    return rec;
}

}  // namespace thoughtcards::inference
