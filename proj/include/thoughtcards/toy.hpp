#pragma once

/*
 * Synthetic corpus for offline runs: multi-step arithmetic word problems and
 * a matching mock-policy script.
 *
 * Every task belongs to a family. A family fixes the wording, the number of
 * declared conditions (distinct per family), and a set of required actions. The scripted policy behaves as follows for task q:
 *
 *   - A step concludes the task with the gold answer iff it completes the
 *     family's set of required actions: its own action is in the set and
 *     the rest of the set occurred earlier in the path (any order, gaps
 *     allowed). A template that ends by completing the set, e.g. a2→a5 or
 *     a5→a1→a2 for the market family, therefore always solves the task.
 *   - Chain-of-thought (a4) as the very first step is a guess. It is wrong
 *     except on the tasks with index i where i % 10 < 3, so a single
 *     unguided pass answers exactly 30% of any ten consecutive tasks.
 *   - Every other step, including a4 later in the path, produces a
 *     non-terminal working note.
 *   - Direct-answer vote samples return the gold answer.
 *
 * Required sets have 1..3 actions, so every task is solvable within depth 3.
 */

#include "thoughtcards/dataset.hpp"
#include "thoughtcards/providers/mock.hpp"
#include "thoughtcards/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace thoughtcards::toy {

struct ToyTask {
    std::string text;
    std::vector<std::string> conditions;
    long long answer = 0;
    std::string working;  // arithmetic shown in the solving step
};

struct ToyFamily {
    std::string_view category;
    std::vector<Action> required;  // completing this set solves the task
    std::function<ToyTask(SplitMix64&)> make;
};

namespace detail {

inline long long pick(SplitMix64& gen, long long lo, long long hi) {
    return lo + static_cast<long long>(uniform_index(gen, static_cast<std::size_t>(hi - lo + 1)));
}

inline std::string str(long long v) { return std::to_string(v); }

}  // namespace detail

inline const std::vector<ToyFamily>& toy_families() {
    using detail::pick;
    using detail::str;
    using A = Action;
    static const std::vector<ToyFamily> families = {
        {"tank", {A::SelfReflection},
         [](SplitMix64& g) {
             const auto v = pick(g, 2, 40);
             return ToyTask{"A water tank holds " + str(v) + " litres of water. How many millilitres of water does the tank hold?",
                            {"tank volume " + str(v) + " litres"}, v * 1000, str(v) + " * 1000"};
         }},
        {"farm", {A::VisualParsing},
         [](SplitMix64& g) {
             const auto c = pick(g, 2, 30), h = pick(g, 2, 30);
             return ToyTask{"A farm keeps " + str(c) + " cows and " + str(h) +
                                " chickens. Counting every animal on the farm, how many legs are there in total?",
                            {"cows " + str(c), "chickens " + str(h)}, 4 * c + 2 * h,
                            "4 * " + str(c) + " + 2 * " + str(h)};
         }},
        {"market", {A::SystemAnalysis, A::DivideAndConquer},
         [](SplitMix64& g) {
             const auto n = pick(g, 3, 20), p = pick(g, 2, 9), d = pick(g, 1, 5);
             return ToyTask{"A market stall sells " + str(n) + " apples at " + str(p) +
                                " coins per apple, and the buyer hands over a coupon worth " + str(d) +
                                " coins. How many coins does the buyer pay at the market stall?",
                            {"apples " + str(n), "price per apple " + str(p), "coupon " + str(d)}, n * p - d,
                            str(n) + " * " + str(p) + " - " + str(d)};
         }},
        {"train", {A::DivideAndConquer, A::OneStepThought},
         [](SplitMix64& g) {
             const auto s1 = pick(g, 40, 120), h1 = pick(g, 1, 5), s2 = pick(g, 40, 120), h2 = pick(g, 1, 5);
             return ToyTask{"A train travels at " + str(s1) + " km per hour for " + str(h1) + " hours, then at " +
                                str(s2) + " km per hour for " + str(h2) +
                                " hours. What total distance in km does the train cover?",
                            {"first speed " + str(s1), "first duration " + str(h1), "second speed " + str(s2),
                             "second duration " + str(h2)},
                            s1 * h1 + s2 * h2, str(s1) + " * " + str(h1) + " + " + str(s2) + " * " + str(h2)};
         }},
        {"garden", {A::SystemAnalysis, A::OneStepThought, A::SelfReflection},
         [](SplitMix64& g) {
             const auto r = pick(g, 2, 12), p = pick(g, 3, 15), d = pick(g, 1, 6), nr = pick(g, 1, 6),
                        np = pick(g, 2, 10);
             return ToyTask{"A gardener plants " + str(r) + " rows of tulips with " + str(p) + " tulips per row. " +
                                str(d) + " tulips wilt and are pulled out, then the gardener adds " + str(nr) +
                                " new rows with " + str(np) + " tulips each. How many tulips grow in the garden now?",
                            {"rows " + str(r), "tulips per row " + str(p), "wilted " + str(d), "new rows " + str(nr),
                             "tulips per new row " + str(np)},
                            r * p - d + nr * np,
                            str(r) + " * " + str(p) + " - " + str(d) + " + " + str(nr) + " * " + str(np)};
         }},
        {"bakery", {A::VisualParsing, A::DivideAndConquer, A::SelfReflection},
         [](SplitMix64& g) {
             const auto t = pick(g, 2, 8), c = pick(g, 6, 24), e = pick(g, 1, 5), b = pick(g, 1, 6),
                        k = pick(g, 4, 12), s = pick(g, 1, 4);
             return ToyTask{"A bakery bakes " + str(t) + " trays of muffins with " + str(c) + " muffins per tray; the bakers eat " +
                                str(e) + " muffins. A delivery brings " + str(b) + " boxes of " + str(k) +
                                " muffins, and " + str(s) +
                                " muffins are dropped on the bakery floor. How many muffins can the bakery sell?",
                            {"trays " + str(t), "muffins per tray " + str(c), "eaten " + str(e), "boxes " + str(b),
                             "muffins per box " + str(k), "dropped " + str(s)},
                            t * c - e + b * k - s,
                            str(t) + " * " + str(c) + " - " + str(e) + " + " + str(b) + " * " + str(k) + " - " + str(s)};
         }},
    };
    return families;
}

struct ToyCorpus {
    std::vector<DatasetRecord> records;
    nlohmann::json script = nlohmann::json::object();
};

/// Fraction of tasks the single unguided chain-of-thought pass gets right.
inline bool unguided_correct(std::size_t index) noexcept { return index % 10 < 3; }

inline std::string toy_id(std::size_t index) { return "toy-" + std::to_string(index); }

/// Script keys matching any path whose last step completes `required`, one
/// key per order in which the set can be completed.
inline std::vector<std::string> required_patterns(std::vector<Action> required) {
    std::sort(required.begin(), required.end());
    std::vector<std::string> keys;
    do {
        std::string key;
        for (std::size_t i = 0; i < required.size(); ++i) {
            if (i > 0) key += kTemplateArrow;
            key += "**";
            key += kTemplateArrow;
            key += short_name(required[i]);
        }
        keys.push_back(std::move(key));
    } while (std::next_permutation(required.begin(), required.end()));
    return keys;
}

/// Tasks toy-0 .. toy-(n-1) plus the script covering all of them.
inline ToyCorpus generate_toy_corpus(std::size_t n, std::uint64_t seed) {
    const auto& families = toy_families();
    ToyCorpus corpus;
    corpus.records.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = toy_id(i);
        SplitMix64 gen(derive_seed(seed, id));
        const ToyFamily& fam = families[uniform_index(gen, families.size())];
        ToyTask task = fam.make(gen);

        DatasetRecord rec;
        rec.query.id = id;
        rec.query.text = task.text;
        rec.query.gold_answer = std::to_string(task.answer);
        rec.query.conditions = task.conditions;
        rec.category = std::string(fam.category);
        corpus.records.push_back(rec);

        auto& s = corpus.script;
        const std::string prefix = id + "|";
        std::string known;
        for (const auto& c : task.conditions) known += (known.empty() ? "" : ", ") + c;

        s[prefix + "**"] = "Noting what is given: " + known + ".";
        s[prefix + "**→a1"] = "Reading the problem setup: " + known + ".";
        s[prefix + "**→a2"] = "The question asks for a single total built from the given quantities (" + known + ").";
        s[prefix + "**→a3"] = "One step further: the quantities must be combined in the order they occur.";
        s[prefix + "**→a5"] = "Splitting the task into one sub-problem per given quantity.";
        s[prefix + "**→a6"] = "Checking the previous reasoning: the units and counts are consistent.";

        const long long gold = task.answer;
        const bool easy = unguided_correct(i);
        s[prefix + "a4"] = "Guessing from the first impression.\nFINAL ANSWER: " + std::to_string(easy ? gold : gold + 1);
        s[prefix + "**→a4"] = "Working through it step by step, but the plan is not complete yet.";

        for (const auto& key : required_patterns(fam.required)) {
            s[prefix + key] = "Combining the steps: " + task.working + " = " + std::to_string(gold) +
                              ".\nFINAL ANSWER: " + std::to_string(gold);
        }
        s[prefix + std::string(kVoteKey)] = "FINAL ANSWER: " + std::to_string(gold);
    }
    return corpus;
}

}  // namespace thoughtcards::toy
