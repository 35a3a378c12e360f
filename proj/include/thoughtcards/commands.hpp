#pragma once

/*
 * Implementations behind the command-line tool. Each command returns its
 * process exit code and throws UsageError/Error for usage or I/O problems.
 *
 *   0  success
 *   1  usage or I/O error
 *   2  the run completed but produced nothing (no cards, no answers)
 */

#include "thoughtcards/cards.hpp"
#include "thoughtcards/config.hpp"
#include "thoughtcards/dataset.hpp"
#include "thoughtcards/inference.hpp"
#include "thoughtcards/matching.hpp"
#include "thoughtcards/toy.hpp"

#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace thoughtcards::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitEmpty = 2;

/// Writes lines in index order no matter which worker finishes first.
/// Each line is flushed as soon as the prefix before it is complete, so a
/// crashed run leaves a valid prefix behind.
class OrderedLineWriter {
public:
    OrderedLineWriter(const std::filesystem::path& path, std::size_t count)
        : out_(path, std::ios::binary | std::ios::trunc), pending_(count) {
        if (!out_) throw Error("cannot write '" + path.string() + "'");
    }

    void submit(std::size_t index, std::string line) {
        std::lock_guard lock(mutex_);
        pending_.at(index) = std::move(line);
        while (next_ < pending_.size() && pending_[next_]) {
            out_ << *pending_[next_] << '\n';
            out_.flush();
            pending_[next_].reset();
            ++next_;
        }
    }

private:
    std::ofstream out_;
    std::mutex mutex_;
    std::vector<std::optional<std::string>> pending_;
    std::size_t next_ = 0;
};

struct RunOptions {
    int jobs = 1;
    bool trace = false;
};

// ============================================================================
// build-cards
// ============================================================================

struct BuildSummary {
    std::size_t queries = 0;
    std::size_t solved = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
    std::size_t cards = 0;
    double wall_time_s = 0.0;
};

inline nlohmann::json to_json(const BuildSummary& s) {
    return {{"queries", s.queries}, {"solved", s.solved}, {"skipped", s.skipped},
            {"failed", s.failed},   {"cards", s.cards},   {"wall_time_s", s.wall_time_s}};
}

/// Seed records to use: the first `seed_limit` records, or at most 500 by default.
inline std::vector<Query> seed_queries(std::span<const DatasetRecord> records, std::optional<std::size_t> seed_limit) {
    std::size_t take = std::min(records.size(), kDefaultSeedLimit);
    if (seed_limit) {
        if (*seed_limit == 0) throw UsageError("--seed-limit must be positive");
        if (*seed_limit > records.size()) {
            throw UsageError("--seed-limit " + std::to_string(*seed_limit) + " exceeds the " +
                             std::to_string(records.size()) + " records in the seed file");
        }
        take = *seed_limit;
    }
    return queries_of(records.subspan(0, take));
}

inline int build_cards_cmd(const std::filesystem::path& seed_path, const RunConfig& config,
                           const std::filesystem::path& out_path, const RunOptions& options, std::ostream& log,
                           BuildSummary* summary_out = nullptr) {
    const auto started = std::chrono::steady_clock::now();
    const auto records = load_dataset(seed_path);
    if (records.empty()) throw UsageError("seed file '" + seed_path.string() + "' has no records");
    const auto seed = seed_queries(records, config.seed_limit);

    const ProviderSet providers(config);
    cards::BuildOptions build;
    build.jobs = options.jobs;
    build.params = config.generation;

    std::ofstream trace_file;
    std::mutex trace_mutex;
    if (options.trace) {
        trace_file.open(out_path.string() + ".trace.jsonl", std::ios::trunc);
        build.trace = [&](const Query& q, const mcts::IterationTrace& t) {
            std::lock_guard lock(trace_mutex);
            trace_file << mcts::to_json(q.id, t).dump() << '\n';
        };
    }

    mcts::MctsConfig mcts_config = config.mcts;
    mcts_config.rng_seed = config.run_seed;
    const auto repo = cards::build_repository(seed, providers.view(), mcts_config, config.voc, build);

    std::vector<cards::ThoughtCard> library;
    if (!repo.entries.empty()) library = cards::distill_cards(repo.entries);
    cards::save_cards(library, out_path);

    BuildSummary s;
    s.queries = repo.queries;
    s.solved = repo.solved;
    s.skipped = repo.skipped;
    s.failed = repo.failures.size();
    s.cards = library.size();
    s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    for (const auto& f : repo.failures) log << "failed " << f.query_id << ": " << f.message << '\n';
    log << to_json(s).dump() << '\n';
    if (summary_out != nullptr) *summary_out = s;
    return library.empty() ? kExitEmpty : kExitOk;
}

// ============================================================================
// infer
// ============================================================================

struct InferSummary {
    std::size_t records = 0;
    std::size_t answered = 0;
    std::size_t failed = 0;
};

inline int infer_cmd(const std::filesystem::path& dataset_path, const std::optional<std::filesystem::path>& cards_path,
                     const RunConfig& config, const std::filesystem::path& out_path, const RunOptions& options,
                     std::ostream& log, bool unguided = false, InferSummary* summary_out = nullptr) {
    const auto records = load_dataset(dataset_path);
    std::vector<cards::ThoughtCard> library;
    if (!unguided) {
        if (!cards_path) throw UsageError("infer needs --cards unless --unguided is given");
        library = cards::load_cards(*cards_path);
        if (library.empty()) throw UsageError("card library '" + cards_path->string() + "' is empty");
    }
    const ProviderSet providers(config);

    OrderedLineWriter writer(out_path, records.size());
    std::vector<char> answered(records.size(), 0);
    parallel_for(records.size(), options.jobs, [&](std::size_t i) {
        const Query& q = records[i].query;
        const auto result = unguided
                                ? inference::answer_unguided(q, providers.policy(), config.generation, config.run_seed)
                                : inference::answer_query(q, library, providers.view(), config.generation, config.run_seed);
        answered[i] = result.verified ? 1 : 0;
        writer.submit(i, inference::to_json(result).dump());
    });

    InferSummary s;
    s.records = records.size();
    for (char a : answered) s.answered += a != 0 ? 1 : 0;
    s.failed = s.records - s.answered;
    log << nlohmann::json{{"records", s.records}, {"answered", s.answered}, {"failed", s.failed}}.dump() << '\n';
    if (summary_out != nullptr) *summary_out = s;
    return s.answered == 0 ? kExitEmpty : kExitOk;
}

// ============================================================================
// eval
// ============================================================================

struct Tally {
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy() const noexcept { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct EvalReport {
    Tally overall;
    std::map<std::string, Tally> categories;
};

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [name, t] : r.categories) {
        cats[name] = {{"total", t.total}, {"correct", t.correct}, {"accuracy", t.accuracy()}};
    }
    return {{"total", r.overall.total},
            {"correct", r.overall.correct},
            {"accuracy", r.overall.accuracy()},
            {"categories", std::move(cats)}};
}

/// Exact match after normalizing both sides; unanswered records count as wrong.
inline EvalReport evaluate(const std::filesystem::path& results_path, const std::filesystem::path& dataset_path) {
    const auto records = load_dataset(dataset_path);
    std::map<std::string, const DatasetRecord*> by_id;
    for (const auto& r : records) by_id[r.query.id] = &r;

    std::ifstream in(results_path);
    if (!in) throw UsageError("cannot open results '" + results_path.string() + "'");
    EvalReport report;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (detail::trim(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw UsageError(results_path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const std::string id = rec.value("query_id", std::string());
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw UsageError("result id '" + id + "' is not in the dataset");
        const Query& q = it->second->query;
        if (!q.gold_answer) throw UsageError("dataset record '" + id + "' has no gold answer");

        const bool correct = rec.contains("answer") && rec["answer"].is_string() &&
                             normalize_answer(rec["answer"].get<std::string>()) == normalize_answer(*q.gold_answer);
        auto tally = [&](Tally& t) {
            ++t.total;
            if (correct) ++t.correct;
        };
        tally(report.overall);
        if (it->second->category) tally(report.categories[*it->second->category]);
    }
    return report;
}

inline void print_report(const EvalReport& r, std::ostream& out) {
    auto row = [&](const std::string& name, const Tally& t) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-16s %8zu %8zu %9.4f\n", name.c_str(), t.correct, t.total, t.accuracy());
        out << buf;
    };
    char header[128];
    std::snprintf(header, sizeof header, "%-16s %8s %8s %9s\n", "category", "correct", "total", "accuracy");
    out << header;
    for (const auto& [name, t] : r.categories) row(name, t);
    row("ALL", r.overall);
}

inline int eval_cmd(const std::filesystem::path& results_path, const std::filesystem::path& dataset_path,
                    const std::optional<std::filesystem::path>& report_path, std::ostream& out,
                    EvalReport* report_out = nullptr) {
    const EvalReport report = evaluate(results_path, dataset_path);
    print_report(report, out);
    if (report_path) {
        std::ofstream f(*report_path, std::ios::trunc);
        if (!f) throw UsageError("cannot write report '" + report_path->string() + "'");
        f << to_json(report).dump(2) << '\n';
    }
    if (report_out != nullptr) *report_out = report;
    return kExitOk;
}

// ============================================================================
// match
// ============================================================================

/// Prints retrieved cards per record; with `explain`, the whole ranking table.
inline int match_cmd(const std::filesystem::path& dataset_path, const std::filesystem::path& cards_path,
                     const RunConfig& config, bool explain, std::ostream& out) {
    const auto records = load_dataset(dataset_path);
    const auto library = cards::load_cards(cards_path);
    if (library.empty()) throw UsageError("card library '" + cards_path.string() + "' is empty");
    const ProviderSet providers(config);
    const Providers p = providers.view();
    for (const auto& r : records) {
        const Query& q = r.query;
        const double pc = p.complexity.estimate_complexity(q);
        const Embedding tis = joint_embedding(p.embedder, q.image, q.text);
        const auto table = matching::rank_cards(library, tis, pc);
        if (explain) {
            for (std::size_t i = 0; i < table.size(); ++i) {
                auto row = matching::to_json(table[i]);
                row["query_id"] = q.id;
                row["query_pc"] = pc;
                row["selected"] = i < matching::kRetrievedCards;
                out << row.dump() << '\n';
            }
        } else {
            nlohmann::json ids = nlohmann::json::array();
            for (std::size_t i = 0; i < table.size() && i < matching::kRetrievedCards; ++i) ids.push_back(table[i].card_id);
            out << nlohmann::json{{"query_id", q.id}, {"cards", std::move(ids)}}.dump() << '\n';
        }
    }
    return kExitOk;
}

// ============================================================================
// gen-toy
// ============================================================================

/// Writes seed.jsonl (first n - holdout tasks), heldout.jsonl (last holdout
/// tasks, when holdout > 0), mock_script.json and a config.json using them.
inline int gen_toy_cmd(std::size_t n, std::size_t holdout, std::uint64_t seed, const std::filesystem::path& out_dir,
                       std::ostream& log) {
    if (n == 0) throw UsageError("--n must be positive");
    if (holdout >= n) throw UsageError("--holdout must be smaller than --n");
    std::filesystem::create_directories(out_dir);
    const auto corpus = toy::generate_toy_corpus(n, seed);
    const std::span<const DatasetRecord> all = corpus.records;
    save_dataset(all.subspan(0, n - holdout), out_dir / "seed.jsonl");
    if (holdout > 0) save_dataset(all.subspan(n - holdout), out_dir / "heldout.jsonl");
    {
        std::ofstream f(out_dir / "mock_script.json", std::ios::binary | std::ios::trunc);
        if (!f) throw UsageError("cannot write mock script in '" + out_dir.string() + "'");
        f << corpus.script.dump(1) << '\n';
    }
    {
        std::ofstream f(out_dir / "config.json", std::ios::trunc);
        f << nlohmann::json{{"mock_script", "mock_script.json"}, {"run_seed", seed}}.dump(2) << '\n';
    }
    log << nlohmann::json{{"tasks", n}, {"seed_tasks", n - holdout}, {"heldout_tasks", holdout},
                          {"dir", out_dir.string()}}
               .dump()
        << '\n';
    return kExitOk;
}

}  // namespace thoughtcards::cli
