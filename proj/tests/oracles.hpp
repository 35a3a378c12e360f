#pragma once

// Direct re-statements of the scoring and selection rules, kept separate from
// the library so the two can be compared.

#include "support.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <map>
#include <optional>

namespace tc_oracle {

using Big = boost::multiprecision::cpp_bin_float_50;
using namespace thoughtcards;

inline Big uct(Big q, Big n, Big parent_n, Big w) {
    return q + w * boost::multiprecision::sqrt(boost::multiprecision::log(parent_n) / n);
}

inline Big q_update(Big parent_q, Big child_q, Big alpha) { return (Big(1) - alpha) * parent_q + alpha * child_q; }

inline Big voc(Big reward, Big cost, Big k) { return k * reward - (Big(1) - k) * cost; }

inline std::vector<Big> joint(std::span<const double> image, std::span<const double> text) {
    std::vector<Big> mean(image.size());
    Big sq = 0;
    for (std::size_t i = 0; i < image.size(); ++i) {
        mean[i] = (Big(image[i]) + Big(text[i])) / 2;
        sq += mean[i] * mean[i];
    }
    const Big norm = boost::multiprecision::sqrt(sq);
    for (auto& v : mean) v /= norm;
    return mean;
}

/// Minimum of combined-rank sums over every subset of size min(5, n).
inline std::size_t min_subset_sum(const std::vector<std::size_t>& combined) {
    const std::size_t n = combined.size();
    const std::size_t k = std::min<std::size_t>(5, n);
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        std::size_t sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) sum += combined[i];
        }
        best = std::min(best, sum);
    }
    return best;
}

struct VoteOutcome {
    std::string answer;
    double confidence = 0.0;
};

/// Modal answer; among equally frequent answers, the earliest in the list.
inline VoteOutcome vote(const std::vector<std::string>& answers) {
    std::map<std::string, std::size_t> count;
    for (const auto& a : answers) ++count[a];
    std::size_t top = 0;
    for (const auto& [_, c] : count) top = std::max(top, c);
    for (const auto& a : answers) {
        if (count[a] == top) return {a, static_cast<double>(top) / static_cast<double>(answers.size())};
    }
    return {};
}

struct Selection {
    std::string answer;
    std::string card_id;
    double confidence = 0.0;
};

/// Vote over answered candidates, then best ORM score within the winning
/// cluster (when scores are given), then lowest cost, then card_id.
inline std::optional<Selection> select(const std::vector<inference::Candidate>& candidates,
                                       const std::map<std::string, double>* orm_scores) {
    std::vector<std::string> answers;
    for (const auto& c : candidates) {
        if (c.status == inference::CandidateStatus::Answered) answers.push_back(c.normalized_answer);
    }
    if (answers.empty()) return std::nullopt;
    const VoteOutcome v = vote(answers);
    std::vector<const inference::Candidate*> cluster;
    for (const auto& c : candidates) {
        if (c.status == inference::CandidateStatus::Answered && c.normalized_answer == v.answer) cluster.push_back(&c);
    }
    auto score = [&](const inference::Candidate* c) { return orm_scores ? orm_scores->at(c->card_id) : 0.0; };
    const inference::Candidate* best = cluster.front();
    for (const auto* c : cluster) {
        const bool better = score(c) != score(best) ? score(c) > score(best)
                            : c->cost() != best->cost() ? c->cost() < best->cost()
                                                        : c->card_id < best->card_id;
        if (better) best = c;
    }
    return Selection{v.answer, best->card_id, v.confidence};
}

/// Outcome scorer keyed by card id, read from the first line of the first step.
class TableScorer final : public OutcomeScorer {
public:
    explicit TableScorer(std::map<std::string, double> by_card) : by_card_(std::move(by_card)) {}
    double score_outcome(const Query&, const Trajectory& t) const override {
        const std::string& first = t.steps.front().content;
        return by_card_.at(first.substr(0, first.find('\n')));
    }

private:
    std::map<std::string, double> by_card_;
};

/// Candidate whose trajectory has `cost` steps; the first step's content is
/// the card id so TableScorer can find it.
inline inference::Candidate candidate(const std::string& card_id, std::size_t cost, const std::string& answer) {
    Trajectory t;
    t.query_id = "q";
    if (cost == 1) {
        t.steps.push_back(make_step(Action::ChainOfThought, card_id + "\nFINAL ANSWER: " + answer));
    } else {
        t.steps.push_back(make_step(Action::SystemAnalysis, card_id));
        for (std::size_t i = 2; i < cost; ++i) t.steps.push_back(make_step(Action::OneStepThought, "n"));
        t.steps.push_back(make_step(Action::ChainOfThought, "FINAL ANSWER: " + answer));
    }
    t.answer = *t.steps.back().extracted_answer;
    return inference::answered_candidate(card_id, t);
}

}  // namespace tc_oracle
