#include "support.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <map>

using namespace thoughtcards;
using namespace thoughtcards::matching;
using namespace tc_test;
using cards::ThoughtCard;

namespace {

// Cards in 2-D whose dot product with (1, 0) is exactly `score`.
ThoughtCard scored(const std::string& tmpl, double score, double pc = 0.0) {
    return make_card(tmpl, pc, Embedding::from_unit({score, std::sqrt(1.0 - score * score)}, 1e-12));
}

const Embedding kAxis = Embedding::normalize({1.0, 0.0});

std::map<std::string, std::size_t> by_id(std::span<const ThoughtCard> cards, const std::vector<std::size_t>& ranks) {
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < cards.size(); ++i) out[cards[i].card_id] = ranks[i];
    return out;
}

}  // namespace

TEST(RankTis, WorkedExamples) {
    // c1, c2, c3 stand for three templates with scores 0.9, 0.2, 0.5.
    const std::vector<ThoughtCard> cards{scored("a1", 0.9), scored("a2", 0.2), scored("a3", 0.5)};
    const auto r = by_id(cards, rank_tis(cards, kAxis));
    EXPECT_EQ(r.at("a1"), 1u);
    EXPECT_EQ(r.at("a3"), 2u);
    EXPECT_EQ(r.at("a2"), 3u);

    const std::vector<ThoughtCard> single{scored("a5", 0.1)};
    EXPECT_EQ(rank_tis(single, kAxis), std::vector<std::size_t>{1});

    const std::vector<ThoughtCard> tied{scored("a2", 0.4), scored("a1", 0.4)};
    const auto t = by_id(tied, rank_tis(tied, kAxis));
    EXPECT_EQ(t.at("a1"), 1u);
    EXPECT_EQ(t.at("a2"), 2u);
}

TEST(RankTis, DimensionMismatch) {
    const std::vector<ThoughtCard> cards{scored("a1", 0.5)};
    EXPECT_THROW(rank_tis(cards, Embedding::normalize({1.0, 0.0, 0.0})), DimensionMismatch);
    EXPECT_THROW(rank_tis(std::vector<ThoughtCard>{}, kAxis), UsageError);
}

TEST(RankPc, WorkedExamples) {
    const std::vector<ThoughtCard> cards{scored("a1", 0.0, 3.0), scored("a2", 0.0, 5.0), scored("a3", 0.0, 2.0)};
    const auto r = by_id(cards, rank_pc(cards, 3.0));
    EXPECT_EQ(r.at("a1"), 1u);
    EXPECT_EQ(r.at("a3"), 2u);
    EXPECT_EQ(r.at("a2"), 3u);

    const std::vector<ThoughtCard> flat{scored("a3", 0.0, 1.0), scored("a1", 0.0, 1.0), scored("a2", 0.0, 1.0)};
    EXPECT_EQ(rank_pc(flat, 4.0), (std::vector<std::size_t>{3, 1, 2}));

    const std::vector<ThoughtCard> equidistant{scored("a6", 0.0, 2.0), scored("a5", 0.0, 4.0)};
    EXPECT_EQ(rank_pc(equidistant, 3.0), (std::vector<std::size_t>{2, 1}));
}

TEST(RankPc, ExactMatchBeatsTinyDistance) {
    const std::vector<ThoughtCard> cards{scored("a1", 0.0, 3.0 + 1e-12), scored("a2", 0.0, 3.0)};
    EXPECT_EQ(rank_pc(cards, 3.0), (std::vector<std::size_t>{2, 1}));
}

TEST(SelectTop5, WorkedExample) {
    // Combined values {c1:4, c2:7, c3:3, c4:9, c5:5, c6:6}.
    std::vector<CardRanking> rows;
    const std::vector<std::pair<std::string, std::size_t>> combined{
        {"c1", 4}, {"c2", 7}, {"c3", 3}, {"c4", 9}, {"c5", 5}, {"c6", 6}};
    for (const auto& [id, value] : combined) {
        CardRanking r;
        r.card_id = id;
        r.combined = value;
        rows.push_back(r);
    }
    std::vector<std::string> ids;
    for (const auto& r : best_combined(rows)) ids.push_back(r.card_id);
    EXPECT_EQ(ids, (std::vector<std::string>{"c3", "c1", "c5", "c6", "c2"}));

    // Exhaustive check over all C(6,5) subsets.
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t skip = 0; skip < 6; ++skip) {
        std::size_t sum = 0;
        for (std::size_t i = 0; i < 6; ++i) sum += i == skip ? 0 : combined[i].second;
        best = std::min(best, sum);
    }
    EXPECT_EQ(best, 3u + 4u + 5u + 6u + 7u);
}

TEST(SelectTop5, TieOnCombinedGoesToCardId) {
    std::vector<CardRanking> rows(7);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].card_id = "c" + std::to_string(7 - i);
        rows[i].combined = 5;
    }
    std::vector<std::string> ids;
    for (const auto& r : best_combined(rows)) ids.push_back(r.card_id);
    EXPECT_EQ(ids, (std::vector<std::string>{"c1", "c2", "c3", "c4", "c5"}));
}

TEST(SelectTop5, SmallLibraries) {
    const std::vector<ThoughtCard> three{scored("a1", 0.1), scored("a2", 0.9), scored("a3", 0.5)};
    EXPECT_EQ(select_top5(three, kAxis, 0.0).size(), 3u);
    std::vector<ThoughtCard> five;
    for (int i = 1; i <= 5; ++i) five.push_back(scored("a" + std::to_string(i), 0.1 * i, 0.0));
    const auto top = select_top5(five, kAxis, 0.0);
    ASSERT_EQ(top.size(), 5u);
    const auto table = rank_cards(five, kAxis, 0.0);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(top[i].card_id, table[i].card_id);
    for (std::size_t i = 1; i < 5; ++i) EXPECT_LE(table[i - 1].combined, table[i].combined);
}

TEST(RankCards, RanksArePermutations) {
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 10;
        std::vector<ThoughtCard> cards;
        std::uniform_int_distribution<int> pc(0, 4);
        for (const auto& t : random_templates(gen, n)) cards.push_back(make_card(t, pc(gen), random_unit(gen, 4)));
        const auto q = random_unit(gen, 4);
        for (const auto& ranks : {rank_tis(cards, q), rank_pc(cards, 2.0)}) {
            auto sorted = ranks;
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(sorted[i], i + 1);
        }
        EXPECT_EQ(rank_cards(cards, q, 2.0).size(), n);
    }
}

TEST(RankTis, InvariantUnderMonotoneTransform) {
    // Cards built from scores s and from s^3 (strictly increasing) rank identically.
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ThoughtCard> raw, cubed;
        for (const auto& t : random_templates(gen, 7)) {
            const double s = u(gen);
            raw.push_back(scored(t, s));
            cubed.push_back(scored(t, s * s * s));
        }
        EXPECT_EQ(rank_tis(raw, kAxis), rank_tis(cubed, kAxis));
    }
}

TEST(RankCards, ExplainJson) {
    const std::vector<ThoughtCard> cards{scored("a1", 0.5, 1.0)};
    const auto row = to_json(rank_cards(cards, kAxis, 3.0).front());
    EXPECT_EQ(row["card_id"], "a1");
    EXPECT_EQ(row["r_tis"], 1);
    EXPECT_EQ(row["combined"], 2);
    EXPECT_DOUBLE_EQ(row["pc_distance"].get<double>(), 2.0);
}
