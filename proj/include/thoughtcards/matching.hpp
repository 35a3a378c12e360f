#pragma once

// Card retrieval: rank cards by semantic similarity and by closeness in
// problem complexity, add the two ranks, keep the five best.

#include "thoughtcards/cards.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace thoughtcards::matching {

using cards::ThoughtCard;

inline constexpr std::size_t kRetrievedCards = 5;

struct CardRanking {
    std::string card_id;
    std::size_t r_tis = 0;
    std::size_t r_pc = 0;
    std::size_t combined = 0;
    double tis_score = 0.0;
    double pc_distance = 0.0;
    std::size_t index = 0;  // position in the input card list
};

namespace detail {

/// 1-based ranks from a strict weak order `better(i, j)`; ties fall back to card_id.
template <class Better>
std::vector<std::size_t> ranks_by(std::span<const ThoughtCard> cards, Better better) {
    std::vector<std::size_t> order(cards.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (better(a, b)) return true;
        if (better(b, a)) return false;
        return cards[a].card_id < cards[b].card_id;
    });
    std::vector<std::size_t> rank(cards.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
    return rank;
}

}  // namespace detail

/// Rank by dot(query_tis, card.avg_tis), highest first. Indexed like `cards`.
inline std::vector<std::size_t> rank_tis(std::span<const ThoughtCard> cards, const Embedding& query_tis) {
    if (cards.empty()) throw UsageError("cannot rank an empty card set");
    std::vector<double> score(cards.size());
    for (std::size_t i = 0; i < cards.size(); ++i) score[i] = query_tis.dot(cards[i].avg_tis);
    return detail::ranks_by(cards, [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
}

/// Rank by 1 / |query_pc - card.avg_pc|, highest first. An exact match is
/// treated as infinitely similar. Ordering by ascending distance is the same
/// order without the division.
inline std::vector<std::size_t> rank_pc(std::span<const ThoughtCard> cards, double query_pc) {
    if (cards.empty()) throw UsageError("cannot rank an empty card set");
    std::vector<double> dist(cards.size());
    for (std::size_t i = 0; i < cards.size(); ++i) dist[i] = std::abs(query_pc - cards[i].avg_pc);
    return detail::ranks_by(cards, [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
}

/// Sorts rows by combined rank, then card_id.
inline void order_by_combined(std::vector<CardRanking>& table) {
    std::sort(table.begin(), table.end(), [](const CardRanking& a, const CardRanking& b) {
        return a.combined != b.combined ? a.combined < b.combined : a.card_id < b.card_id;
    });
}

/// Full ranking table ordered by combined rank, then card_id.
inline std::vector<CardRanking> rank_cards(std::span<const ThoughtCard> cards, const Embedding& query_tis,
                                           double query_pc) {
    const auto r_tis = rank_tis(cards, query_tis);
    const auto r_pc = rank_pc(cards, query_pc);
    std::vector<CardRanking> table(cards.size());
    for (std::size_t i = 0; i < cards.size(); ++i) {
        table[i] = {cards[i].card_id,
                    r_tis[i],
                    r_pc[i],
                    r_tis[i] + r_pc[i],
                    query_tis.dot(cards[i].avg_tis),
                    std::abs(query_pc - cards[i].avg_pc),
                    i};
    }
    order_by_combined(table);
    return table;
}

/// The (up to) five rows with the smallest combined rank, best first. Taking
/// the five individually smallest values minimizes the subset sum.
inline std::vector<CardRanking> best_combined(std::vector<CardRanking> table) {
    order_by_combined(table);
    if (table.size() > kRetrievedCards) table.resize(kRetrievedCards);
    return table;
}

/// The (up to) five best-matching cards, best first.
inline std::vector<ThoughtCard> select_top5(std::span<const ThoughtCard> cards, const Embedding& query_tis,
                                            double query_pc) {
    std::vector<ThoughtCard> out;
    for (const auto& row : best_combined(rank_cards(cards, query_tis, query_pc))) out.push_back(cards[row.index]);
    return out;
}

inline nlohmann::json to_json(const CardRanking& r) {
    return {{"card_id", r.card_id},       {"r_tis", r.r_tis},         {"r_pc", r.r_pc},
            {"combined", r.combined},     {"tis_score", r.tis_score}, {"pc_distance", r.pc_distance}};
}

}  // namespace thoughtcards::matching
