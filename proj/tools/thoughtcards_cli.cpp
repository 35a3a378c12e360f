// thoughtcards: command-line front end for card building and guided inference.
//
//   thoughtcards gen-toy --n 150 --holdout 50 --seed 7 --out toy/
//   thoughtcards build-cards toy/seed.jsonl --config toy/config.json --out cards.json
//   thoughtcards infer toy/heldout.jsonl --cards cards.json --config toy/config.json --out results.jsonl
//   thoughtcards eval results.jsonl toy/heldout.jsonl --out report.json
//   thoughtcards match toy/heldout.jsonl --cards cards.json --config toy/config.json --explain

#include "thoughtcards/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace tc = thoughtcards;

namespace {

struct Common {
    std::string config_path;
    std::string provider;
    std::string script;
    int jobs = 1;
    std::optional<std::uint64_t> run_seed;
    bool trace = false;
};

void add_common(CLI::App& cmd, Common& c) {
    cmd.add_option("--config", c.config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
    cmd.add_option("--provider", c.provider, "Use this provider kind for policy, embedding and complexity")
        ->check(CLI::IsMember({"mock", "http"}));
    cmd.add_option("--script", c.script, "Mock policy script (overrides the config)")->check(CLI::ExistingFile);
    cmd.add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd.add_option("--run-seed", c.run_seed, "Seed for all randomness");
}

tc::RunConfig resolve(const Common& c) {
    tc::RunConfig config = c.config_path.empty() ? tc::RunConfig{} : tc::load_config(c.config_path);
    if (!c.provider.empty()) {
        const auto kind = tc::parse_provider_kind(c.provider);
        config.policy.kind = kind;
        config.embedding.kind = kind;
        config.complexity.kind = kind;
    }
    if (!c.script.empty()) config.mock_script = c.script;
    if (c.run_seed) config.run_seed = *c.run_seed;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thought-card guided reasoning"};
    app.require_subcommand(1);

    Common common;
    std::string seed_path, dataset_path, cards_path, results_path, out_path;
    std::optional<std::size_t> seed_limit;
    bool unguided = false, explain = false;
    std::size_t toy_n = 150, toy_holdout = 50;
    std::uint64_t toy_seed = 0;

    auto* build = app.add_subcommand("build-cards", "Search seed problems and distill a card library");
    build->add_option("seed", seed_path, "Seed dataset (JSONL)")->required()->check(CLI::ExistingFile);
    build->add_option("--out", out_path, "Card library to write")->required();
    build->add_option("--seed-limit", seed_limit, "Use the first N seed records");
    build->add_flag("--trace", common.trace, "Write per-iteration search records to <out>.trace.jsonl");
    add_common(*build, common);

    auto* infer = app.add_subcommand("infer", "Answer a dataset with a card library");
    infer->add_option("dataset", dataset_path, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
    infer->add_option("--cards", cards_path, "Card library")->check(CLI::ExistingFile);
    infer->add_option("--out", out_path, "Results file (JSONL)")->required();
    infer->add_flag("--unguided", unguided, "Single chain-of-thought pass per problem, no cards");
    add_common(*infer, common);

    auto* eval = app.add_subcommand("eval", "Score a results file against gold answers");
    eval->add_option("results", results_path, "Results file (JSONL)")->required()->check(CLI::ExistingFile);
    eval->add_option("dataset", dataset_path, "Dataset with gold answers")->required()->check(CLI::ExistingFile);
    eval->add_option("--out", out_path, "JSON report to write");

    auto* match = app.add_subcommand("match", "Show which cards each problem retrieves");
    match->add_option("dataset", dataset_path, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
    match->add_option("--cards", cards_path, "Card library")->required()->check(CLI::ExistingFile);
    match->add_flag("--explain", explain, "Print the full ranking table as JSON Lines");
    add_common(*match, common);

    auto* toy = app.add_subcommand("gen-toy", "Write a synthetic corpus and its mock policy script");
    toy->add_option("--n", toy_n, "Number of tasks")->check(CLI::PositiveNumber);
    toy->add_option("--holdout", toy_holdout, "Trailing tasks written to heldout.jsonl");
    toy->add_option("--seed", toy_seed, "Generator seed");
    toy->add_option("--out", out_path, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? tc::cli::kExitOk : tc::cli::kExitUsage;
    }

    try {
        const tc::cli::RunOptions options{common.jobs, common.trace};
        if (*build) {
            auto config = resolve(common);
            if (seed_limit) config.seed_limit = seed_limit;
            return tc::cli::build_cards_cmd(seed_path, config, out_path, options, std::cerr);
        }
        if (*infer) {
            std::optional<std::filesystem::path> cards;
            if (!cards_path.empty()) cards = cards_path;
            return tc::cli::infer_cmd(dataset_path, cards, resolve(common), out_path, options, std::cerr, unguided);
        }
        if (*eval) {
            std::optional<std::filesystem::path> report;
            if (!out_path.empty()) report = out_path;
            return tc::cli::eval_cmd(results_path, dataset_path, report, std::cout);
        }
        if (*match) return tc::cli::match_cmd(dataset_path, cards_path, resolve(common), explain, std::cout);
        if (*toy) return tc::cli::gen_toy_cmd(toy_n, toy_holdout, toy_seed, out_path, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return tc::cli::kExitUsage;
    }
    return tc::cli::kExitUsage;
}
