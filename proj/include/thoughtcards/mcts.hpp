#pragma once

/*
 * Monte Carlo Tree Search over reasoning steps for a single query.
 *
 * The root stands for the bare query; every other node holds one reasoning
 * step. Each iteration runs
 *
 *   select    descend by UCT until a leaf or a terminal node
 *   expand    sample n distinct actions and generate one child per action
 *   simulate  extend a single child at a time until an answer or max depth
 *   reward    self-consistency agreement of the reached answer (0 at cutoff)
 *   backprop  Q(leaf) = reward, then Q(p) <- (1 - alpha) Q(p) + alpha Q(s)
 *             bottom-up, incrementing N on every node of the path
 *
 * Nodes created during simulation stay in the arena. A tree is confined to
 * one thread; run separate searches for separate queries in parallel.
 */

#include "thoughtcards/core.hpp"
#include "thoughtcards/providers/provider.hpp"
#include "thoughtcards/rng.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace thoughtcards::mcts {

using NodeId = std::size_t;

struct MctsConfig {
    int iterations = 32;
    int branching = 3;  // n
    int max_depth = 6;  // d_max
    double exploration_weight = 1.0;
    double alpha = 0.5;
    int vote_samples = 3;  // m
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (iterations < 1) throw UsageError("iterations must be positive");
        if (branching < 1 || branching > static_cast<int>(kAllActions.size())) {
            throw UsageError("branching must be in [1, 6]");
        }
        if (max_depth < 1) throw UsageError("max_depth must be positive");
        if (!(exploration_weight >= 0.0)) throw UsageError("exploration_weight must be >= 0");
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("alpha must be in [0, 1]");
        if (vote_samples < 1) throw UsageError("vote_samples must be positive");
    }
};

struct SearchNode {
    NodeId id = 0;
    std::optional<NodeId> parent;
    std::optional<ReasoningStep> step;
    double q_value = 0.0;
    std::uint64_t visits = 0;
    std::vector<NodeId> children;
    int depth = 0;
    bool terminal = false;
};

/// Arena of nodes rooted at index 0.
class SearchTree {
public:
    explicit SearchTree(Query query) : query_(std::move(query)) { nodes_.push_back(SearchNode{}); }

    const Query& query() const noexcept { return query_; }
    static constexpr NodeId root() noexcept { return 0; }

    const SearchNode& node(NodeId id) const { return nodes_.at(id); }
    SearchNode& node(NodeId id) { return nodes_.at(id); }
    const std::vector<SearchNode>& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    NodeId add_child(NodeId parent, ReasoningStep step) {
        const NodeId id = nodes_.size();
        SearchNode child;
        child.id = id;
        child.parent = parent;
        child.depth = nodes_.at(parent).depth + 1;
        child.terminal = step.extracted_answer.has_value();
        child.step = std::move(step);
        nodes_.push_back(std::move(child));
        nodes_[parent].children.push_back(id);
        return id;
    }

    /// Root-to-node ids, inclusive.
    std::vector<NodeId> path_to(NodeId id) const {
        std::vector<NodeId> path;
        for (std::optional<NodeId> cur = id; cur; cur = nodes_.at(*cur).parent) path.push_back(*cur);
        std::reverse(path.begin(), path.end());
        return path;
    }

    /// Steps from the root down to `id` (the root contributes none).
    std::vector<ReasoningStep> history(NodeId id) const {
        std::vector<ReasoningStep> steps;
        for (NodeId n : path_to(id)) {
            if (nodes_[n].step) steps.push_back(*nodes_[n].step);
        }
        return steps;
    }

    /// Trajectory ending at a terminal node; reward is that node's Q.
    Trajectory trajectory(NodeId leaf) const {
        const SearchNode& n = nodes_.at(leaf);
        if (!n.terminal || !n.step || !n.step->extracted_answer) {
            throw UsageError("node " + std::to_string(leaf) + " is not an answer-bearing terminal");
        }
        Trajectory t;
        t.query_id = query_.id;
        t.steps = history(leaf);
        t.answer = *n.step->extracted_answer;
        t.reward = std::clamp(n.q_value, 0.0, 1.0);
        return t;
    }

private:
    Query query_;
    std::vector<SearchNode> nodes_;
};

/// Provider failure while growing node `node_id`.
class ExpansionError : public ProviderError {
public:
    ExpansionError(NodeId node_id, const ProviderError& cause)
        : ProviderError("node " + std::to_string(node_id) + ": " + cause.what(), cause.attempts()), node_id_(node_id) {}

    NodeId node_id() const noexcept { return node_id_; }

private:
    NodeId node_id_;
};

using Rng = std::mt19937_64;

// ============================================================================
// Operations
// ============================================================================

/// Q + w * sqrt(ln N(parent) / N(node)); +inf for an unvisited node.
inline double uct(double q_value, std::uint64_t visits_node, std::uint64_t visits_parent, double w) {
    if (visits_node == 0) return std::numeric_limits<double>::infinity();
    return q_value + w * std::sqrt(std::log(static_cast<double>(visits_parent)) / static_cast<double>(visits_node));
}

/// Root-to-leaf path following the highest-UCT child; ties go to the lower id.
inline std::vector<NodeId> select(const SearchTree& tree, double w) {
    std::vector<NodeId> path{SearchTree::root()};
    for (;;) {
        const SearchNode& cur = tree.node(path.back());
        if (cur.terminal || cur.children.empty()) return path;
        NodeId best = cur.children.front();
        double best_score = -std::numeric_limits<double>::infinity();
        for (NodeId c : cur.children) {
            const SearchNode& child = tree.node(c);
            const double score = uct(child.q_value, child.visits, cur.visits, w);
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        path.push_back(best);
    }
}

namespace detail {

inline GenerationParams with_seed(const GenerationParams& params, Rng& rng) {
    GenerationParams p = params;
    p.seed = rng();
    return p;
}

}  // namespace detail

/// Adds `n` children for distinct uniformly sampled actions, each with Q = 0
/// and N = 0. Children whose step carries an answer are terminal.
inline std::vector<NodeId> expand(SearchTree& tree, NodeId node_id, const PolicyModel& policy, int n,
                                  const GenerationParams& params, Rng& rng, int max_depth) {
    const SearchNode& node = tree.node(node_id);
    if (node.terminal) throw UsageError("cannot expand terminal node " + std::to_string(node_id));
    if (node.depth >= max_depth) throw UsageError("cannot expand node " + std::to_string(node_id) + " at max depth");

    std::array<Action, 6> pool = kAllActions;
    const auto k = static_cast<std::size_t>(std::clamp(n, 0, static_cast<int>(pool.size())));
    partial_shuffle(std::span<Action>(pool), k, rng);

    const std::vector<ReasoningStep> history = tree.history(node_id);
    std::vector<NodeId> created;
    created.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        try {
            ReasoningStep step = policy.generate_step(tree.query(), history, pool[i], detail::with_seed(params, rng));
            created.push_back(tree.add_child(node_id, std::move(step)));
        } catch (const ProviderError& e) {
            throw ExpansionError(node_id, e);
        }
    }
    return created;
}

/// Extends one sampled child at a time from `node_id` until reaching an
/// answer or max depth, and returns the last node.
inline NodeId simulate(SearchTree& tree, NodeId node_id, const PolicyModel& policy, const MctsConfig& config,
                       const GenerationParams& params, Rng& rng) {
    NodeId cur = node_id;
    while (!tree.node(cur).terminal && tree.node(cur).depth < config.max_depth) {
        cur = expand(tree, cur, policy, 1, params, rng, config.max_depth).front();
    }
    return cur;
}

/// Fraction of m fresh direct-answer samples, plus the node's own answer,
/// that agree with the node's answer. Nodes without an answer score 0.
inline double terminal_reward(const SearchTree& tree, NodeId node_id, const PolicyModel& policy, int m,
                              const GenerationParams& params) {
    const SearchNode& node = tree.node(node_id);
    if (!node.terminal || !node.step || !node.step->extracted_answer) return 0.0;
    const std::string& answer = *node.step->extracted_answer;
    int agree = 1;
    for (int i = 0; i < m; ++i) {
        try {
            if (normalize_answer(policy.sample_answer(tree.query(), i, params)) == answer) ++agree;
        } catch (const ProviderError& e) {
            throw ExpansionError(node_id, e);
        }
    }
    return static_cast<double>(agree) / static_cast<double>(m + 1);
}

/// Q(leaf) = reward; then for each edge (p, s) from the leaf upwards
/// Q(p) <- (1 - alpha) Q(p) + alpha Q(s) using the already-updated Q(s).
/// Every node on the path gets N += 1.
inline void backpropagate(SearchTree& tree, NodeId leaf_id, double reward, double alpha) {
    SearchNode* cur = &tree.node(leaf_id);
    cur->q_value = reward;
    ++cur->visits;
    while (cur->parent) {
        SearchNode& parent = tree.node(*cur->parent);
        parent.q_value = (1.0 - alpha) * parent.q_value + alpha * cur->q_value;
        ++parent.visits;
        cur = &parent;
    }
}

// ============================================================================
// Full search
// ============================================================================

struct IterationTrace {
    int iteration = 0;
    std::vector<NodeId> selected_path;
    std::vector<Action> expanded_actions;
    NodeId simulated_leaf = 0;
    double reward = 0.0;
};

inline nlohmann::json to_json(const std::string& query_id, const IterationTrace& t) {
    nlohmann::json actions = nlohmann::json::array();
    for (Action a : t.expanded_actions) actions.push_back(std::string(short_name(a)));
    return {{"query_id", query_id},     {"iteration", t.iteration},           {"selected_path", t.selected_path},
            {"expanded", actions},      {"simulated_leaf", t.simulated_leaf}, {"reward", t.reward}};
}

using TraceSink = std::function<void(const Query&, const IterationTrace&)>;

struct SearchResult {
    SearchTree tree;
    std::vector<Trajectory> paths;
};

/// Runs the full search loop. The RNG is seeded from (config.rng_seed, query.id),
/// so the result depends only on the query, the config and the policy.
inline SearchResult run_search(const Query& query, const PolicyModel& policy, const MctsConfig& config,
                               const GenerationParams& params = {}, const TraceSink& trace = {}) {
    config.validate();
    validate(query);
    Rng rng(derive_seed(config.rng_seed, query.id));
    SearchResult result{SearchTree(query), {}};
    SearchTree& tree = result.tree;

    for (int it = 0; it < config.iterations; ++it) {
        IterationTrace record;
        record.iteration = it;
        record.selected_path = select(tree, config.exploration_weight);
        NodeId start = record.selected_path.back();

        const SearchNode& leaf = tree.node(start);
        if (!leaf.terminal && leaf.depth < config.max_depth) {
            const auto created = expand(tree, start, policy, config.branching, params, rng, config.max_depth);
            for (NodeId c : created) record.expanded_actions.push_back(tree.node(c).step->action);
            start = created[uniform_index(rng, created.size())];
        }

        const NodeId end = simulate(tree, start, policy, config, params, rng);
        record.simulated_leaf = end;
        record.reward = terminal_reward(tree, end, policy, config.vote_samples, detail::with_seed(params, rng));
        backpropagate(tree, end, record.reward, config.alpha);
        if (trace) trace(query, record);
    }

    for (const SearchNode& n : tree.nodes()) {
        if (n.terminal) result.paths.push_back(tree.trajectory(n.id));
    }
    return result;
}

/// Valid terminal trajectories found for `query` (possibly none).
inline std::vector<Trajectory> search(const Query& query, const PolicyModel& policy, const MctsConfig& config,
                                      const GenerationParams& params = {}) {
    return run_search(query, policy, config, params).paths;
}

}  // namespace thoughtcards::mcts
