#include "support.hpp"

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <limits>

using namespace thoughtcards;
using namespace thoughtcards::mcts;
using namespace tc_test;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Every path ends in a working note except those finishing with a4.
nlohmann::json chain_script(const std::string& id) {
    return {{id + "|**", "note"},
            {id + "|a4", "guess\nFINAL ANSWER: 5"},
            {id + "|**→a4", "not yet"},
            {id + "|**→a2→**→a4", "worked\nFINAL ANSWER: 12"},
            {id + "|@vote", "FINAL ANSWER: 12"}};
}

SearchTree tree_with_children(int n) {
    SearchTree t(make_query("q"));
    for (int i = 0; i < n; ++i) t.add_child(0, make_step(Action::SystemAnalysis, "note"));
    return t;
}

void expect_tree_invariants(const SearchTree& tree, int iterations) {
    EXPECT_EQ(tree.node(0).visits, static_cast<std::uint64_t>(iterations));
    std::vector<int> seen(tree.size(), 0);
    std::vector<NodeId> stack{0};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        ASSERT_EQ(seen[id]++, 0) << "node " << id << " reached twice";
        const SearchNode& n = tree.node(id);
        EXPECT_GE(n.q_value, 0.0);
        EXPECT_LE(n.q_value, 1.0);
        if (n.terminal) {
            EXPECT_TRUE(n.children.empty());
        }
        for (NodeId c : n.children) {
            const SearchNode& child = tree.node(c);
            EXPECT_EQ(child.parent, id);
            EXPECT_EQ(child.depth, n.depth + 1);
            EXPECT_LE(child.visits, n.visits);
            stack.push_back(c);
        }
    }
    for (int s : seen) EXPECT_EQ(s, 1);
}

}  // namespace

TEST(Uct, WorkedExamples) {
    EXPECT_NEAR(uct(0.5, 2, 8, 1.0), 1.51966699, 1e-8);
    EXPECT_DOUBLE_EQ(uct(0.5, 3, 1, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(uct(0.7, 4, 10, 0.0), 0.7);
    EXPECT_EQ(uct(0.1, 0, 5, 1.0), std::numeric_limits<double>::infinity());
}

TEST(Uct, HighPrecisionOracle) {
    const Big oracle = Big("0.5") + boost::multiprecision::sqrt(boost::multiprecision::log(Big(8)) / Big(2));
    EXPECT_NEAR(uct(0.5, 2, 8, 1.0), oracle.convert_to<double>(), 1e-12);
}

TEST(Uct, DecreasesWithVisits) {
    for (std::uint64_t n = 1; n < 50; ++n) EXPECT_GT(uct(0.3, n, 100, 0.7), uct(0.3, n + 1, 100, 0.7));
}

TEST(Select, RootOnly) {
    SearchTree t(make_query("q"));
    EXPECT_EQ(select(t, 1.0), std::vector<NodeId>{0});
}

TEST(Select, PrefersHigherUct) {
    SearchTree t = tree_with_children(2);
    t.node(0).visits = 6;
    t.node(1).q_value = 0.9;
    t.node(1).visits = 5;
    t.node(2).q_value = 0.1;
    t.node(2).visits = 1;
    EXPECT_NEAR(uct(0.9, 5, 6, 1.0), 1.4986, 1e-4);
    EXPECT_NEAR(uct(0.1, 1, 6, 1.0), 1.4386, 1e-4);
    EXPECT_EQ(select(t, 1.0), (std::vector<NodeId>{0, 1}));
}

TEST(Select, UnvisitedFirstAndTiesToSmallestId) {
    SearchTree t = tree_with_children(3);
    t.node(0).visits = 4;
    t.node(1).visits = 4;
    t.node(1).q_value = 1.0;
    EXPECT_EQ(select(t, 1.0), (std::vector<NodeId>{0, 2}));
    t.node(2).visits = 1;
    t.node(3).visits = 1;
    EXPECT_EQ(select(t, 0.0), (std::vector<NodeId>{0, 1}));
    t.node(1).q_value = 0.0;
    EXPECT_EQ(select(t, 0.0), (std::vector<NodeId>{0, 1}));
}

TEST(Select, StopsAtTerminal) {
    SearchTree t(make_query("q"));
    t.add_child(0, make_step(Action::ChainOfThought, "FINAL ANSWER: 1"));
    t.node(0).visits = 1;
    t.node(1).visits = 1;
    EXPECT_EQ(select(t, 1.0), (std::vector<NodeId>{0, 1}));
}

TEST(Expand, CreatesDistinctFreshChildren) {
    const auto policy = scripted(chain_script("q"));
    SearchTree t(make_query("q"));
    Rng rng(1);
    const auto two = expand(t, 0, policy, 2, {}, rng, 6);
    ASSERT_EQ(two.size(), 2u);
    for (NodeId c : two) {
        EXPECT_EQ(t.node(c).visits, 0u);
        EXPECT_EQ(t.node(c).q_value, 0.0);
    }
    SearchTree all(make_query("q"));
    const auto six = expand(all, 0, policy, 6, {}, rng, 6);
    std::set<Action> used;
    for (NodeId c : six) used.insert(all.node(c).step->action);
    EXPECT_EQ(used.size(), 6u);
    for (NodeId c : six) EXPECT_EQ(all.node(c).terminal, all.node(c).step->action == Action::ChainOfThought);
}

TEST(Expand, TerminalChildCarriesAnswer) {
    const auto policy = scripted({{"q|a4", "FINAL ANSWER: 12"}, {"q|**", "note"}});
    SearchTree t(make_query("q"));
    Rng rng(3);
    for (NodeId c : expand(t, 0, policy, 6, {}, rng, 6)) {
        if (t.node(c).step->action == Action::ChainOfThought) {
            EXPECT_TRUE(t.node(c).terminal);
            EXPECT_EQ(t.node(c).step->extracted_answer, "12");
        }
    }
}

TEST(Expand, ProviderFailureNamesNode) {
    const auto policy = scripted({{"q|a1", "note"}});
    SearchTree t(make_query("q"));
    Rng rng(4);
    try {
        expand(t, 0, policy, 6, {}, rng, 6);
        FAIL() << "expected ExpansionError";
    } catch (const ExpansionError& e) {
        EXPECT_EQ(e.node_id(), 0u);
    }
}

TEST(Expand, Preconditions) {
    const auto policy = scripted(chain_script("q"));
    SearchTree t(make_query("q"));
    const NodeId leaf = t.add_child(0, make_step(Action::ChainOfThought, "FINAL ANSWER: 1"));
    Rng rng(5);
    EXPECT_THROW(expand(t, leaf, policy, 1, {}, rng, 6), UsageError);
    EXPECT_THROW(expand(t, 0, policy, 1, {}, rng, 0), UsageError);
}

TEST(Simulate, TerminalIsNoOp) {
    const auto policy = scripted(chain_script("q"));
    SearchTree t(make_query("q"));
    const NodeId leaf = t.add_child(0, make_step(Action::ChainOfThought, "FINAL ANSWER: 1"));
    Rng rng(1);
    EXPECT_EQ(simulate(t, leaf, policy, MctsConfig{}, {}, rng), leaf);
    EXPECT_EQ(t.size(), 2u);
}

TEST(Simulate, DepthCutoffWithoutAnswer) {
    const auto policy = scripted({{"q|**", "note"}});
    SearchTree t(make_query("q"));
    MctsConfig cfg;
    cfg.max_depth = 4;
    Rng rng(1);
    const NodeId end = simulate(t, 0, policy, cfg, {}, rng);
    EXPECT_EQ(t.node(end).depth, 4);
    EXPECT_FALSE(t.node(end).terminal);
    EXPECT_EQ(t.size(), 5u);
    EXPECT_EQ(terminal_reward(t, end, policy, 3, {}), 0.0);
}

TEST(Simulate, ReachesScriptedChain) {
    const auto policy = scripted({{"q|a1", "reading"},
                                  {"q|a1→a2", "conditions"},
                                  {"q|a1→a2→*", "more notes"},
                                  {"q|a1→a2→a4", "FINAL ANSWER: 12"}});
    SearchTree t(make_query("q"));
    const NodeId a1 = t.add_child(0, make_step(Action::VisualParsing, "reading"));
    const NodeId a2 = t.add_child(a1, make_step(Action::SystemAnalysis, "conditions"));
    MctsConfig cfg;
    cfg.max_depth = 3;
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        SearchTree copy = t;
        Rng rng(seed);
        const NodeId end = simulate(copy, a2, policy, cfg, {}, rng);
        EXPECT_EQ(copy.node(end).depth, 3);
        if (copy.node(end).step->action == Action::ChainOfThought) {
            EXPECT_EQ(copy.node(end).step->extracted_answer, "12");
            ++solved;
        } else {
            EXPECT_FALSE(copy.node(end).terminal);
        }
    }
    EXPECT_GT(solved, 0);
}

TEST(TerminalReward, VoteShare) {
    const auto policy =
        scripted({{"q|@vote/0", "FINAL ANSWER: 7"}, {"q|@vote/1", "FINAL ANSWER: 7"}, {"q|@vote/2", "FINAL ANSWER: 2"}});
    SearchTree t(make_query("q"));
    const NodeId leaf = t.add_child(0, make_step(Action::ChainOfThought, "FINAL ANSWER: 7"));
    EXPECT_DOUBLE_EQ(terminal_reward(t, leaf, policy, 3, {}), 0.75);
    EXPECT_DOUBLE_EQ(terminal_reward(t, leaf, policy, 0, {}), 1.0);
}

TEST(Backpropagate, ConvexUpdate) {
    SearchTree t(make_query("q"));
    const NodeId c = t.add_child(0, make_step(Action::ChainOfThought, "FINAL ANSWER: 1"));
    t.node(0).q_value = 0.4;
    backpropagate(t, c, 0.8, 0.5);
    EXPECT_DOUBLE_EQ(t.node(c).q_value, 0.8);
    EXPECT_DOUBLE_EQ(t.node(0).q_value, 0.6);
    EXPECT_EQ(t.node(0).visits, 1u);
    EXPECT_EQ(t.node(c).visits, 1u);
}

TEST(Backpropagate, AlphaExtremes) {
    SearchTree t(make_query("q"));
    const NodeId a = t.add_child(0, make_step(Action::VisualParsing, "n"));
    const NodeId b = t.add_child(a, make_step(Action::ChainOfThought, "FINAL ANSWER: 1"));
    t.node(0).q_value = 0.2;
    t.node(a).q_value = 0.3;
    backpropagate(t, b, 0.9, 0.0);
    EXPECT_DOUBLE_EQ(t.node(a).q_value, 0.3);
    EXPECT_DOUBLE_EQ(t.node(0).q_value, 0.2);
    EXPECT_EQ(t.node(0).visits, 1u);
    backpropagate(t, b, 0.7, 1.0);
    EXPECT_DOUBLE_EQ(t.node(a).q_value, 0.7);
    EXPECT_DOUBLE_EQ(t.node(0).q_value, 0.7);
    EXPECT_EQ(t.node(b).visits, 2u);
}

TEST(Backpropagate, HighPrecisionOracleOnDeepPath) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        SearchTree t(make_query("q"));
        NodeId cur = 0;
        for (int d = 0; d < 5; ++d) cur = t.add_child(cur, make_step(Action::SystemAnalysis, "n"));
        std::vector<Big> q(6);
        for (NodeId id = 0; id < 6; ++id) {
            t.node(id).q_value = u(gen);
            q[id] = t.node(id).q_value;
        }
        const double reward = u(gen), alpha = u(gen);
        backpropagate(t, 5, reward, alpha);
        q[5] = reward;
        for (int id = 4; id >= 0; --id) q[id] = (Big(1) - alpha) * q[id] + Big(alpha) * q[id + 1];
        for (NodeId id = 0; id < 6; ++id) EXPECT_NEAR(t.node(id).q_value, q[id].convert_to<double>(), 1e-12);
    }
}

TEST(Search, FindsScriptedSolution) {
    const auto policy = scripted(chain_script("q"));
    MctsConfig cfg;
    cfg.iterations = 16;
    cfg.branching = 2;
    cfg.max_depth = 5;
    const auto result = run_search(make_query("q"), policy, cfg);
    bool gold = false;
    for (const auto& p : result.paths) {
        EXPECT_TRUE(is_valid(p));
        gold = gold || p.answer == "12";
    }
    EXPECT_TRUE(gold);
    expect_tree_invariants(result.tree, cfg.iterations);
}

TEST(Search, UnsolvableIsEmpty) {
    const auto policy = scripted({{"q|**", "note"}, {"q|@vote", "FINAL ANSWER: 1"}});
    const auto result = run_search(make_query("q"), policy, MctsConfig{});
    EXPECT_TRUE(result.paths.empty());
    expect_tree_invariants(result.tree, MctsConfig{}.iterations);
}

TEST(Search, Deterministic) {
    const auto policy = scripted(chain_script("q"));
    MctsConfig cfg;
    cfg.rng_seed = 17;
    EXPECT_EQ(search(make_query("q"), policy, cfg), search(make_query("q"), policy, cfg));
}

TEST(Search, TraceHasOneRecordPerIteration) {
    const auto policy = scripted(chain_script("q"));
    MctsConfig cfg;
    cfg.iterations = 9;
    std::vector<nlohmann::json> records;
    run_search(make_query("q"), policy, cfg, {},
               [&](const Query& q, const IterationTrace& t) { records.push_back(to_json(q.id, t)); });
    ASSERT_EQ(records.size(), 9u);
    EXPECT_EQ(records[0]["iteration"], 0);
    EXPECT_TRUE(records[0].contains("selected_path"));
    EXPECT_TRUE(records[0].contains("reward"));
}

TEST(Search, InvariantsOnToyCorpus) {
    const auto corpus = toy::generate_toy_corpus(20, 3);
    const ScriptedPolicy policy(PolicyScript::from_json(corpus.script));
    for (const auto& r : corpus.records) {
        const auto result = run_search(r.query, policy, MctsConfig{});
        expect_tree_invariants(result.tree, MctsConfig{}.iterations);
        for (const auto& p : result.paths) EXPECT_TRUE(is_valid(p));
    }
}

TEST(Config, Validation) {
    MctsConfig c;
    EXPECT_NO_THROW(c.validate());
    c.branching = 7;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.alpha = 1.5;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.iterations = 0;
    EXPECT_THROW(c.validate(), UsageError);
}
