#pragma once

#include "thoughtcards/thoughtcards.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace tc_test {

using namespace thoughtcards;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("thoughtcards-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

inline Query make_query(std::string id, std::string text = "a problem", std::vector<std::string> conditions = {}) {
    Query q;
    q.id = std::move(id);
    q.text = std::move(text);
    q.conditions = std::move(conditions);
    return q;
}

inline ScriptedPolicy scripted(const nlohmann::json& script) { return ScriptedPolicy(PolicyScript::from_json(script)); }

template <class Gen>
Embedding random_unit(Gen& gen, std::size_t dim) {
    std::normal_distribution<double> normal;
    for (;;) {
        std::vector<double> v(dim);
        for (double& x : v) x = normal(gen);
        double sq = 0.0;
        for (double x : v) sq += x * x;
        if (sq > 1e-12) return Embedding::normalize(std::move(v));
    }
}

inline cards::ThoughtCard make_card(const std::string& tmpl, double pc, Embedding tis, std::size_t support = 1) {
    cards::ThoughtCard c;
    c.action_template = ActionTemplate::parse(tmpl);
    c.card_id = c.action_template.to_string();
    c.avg_pc = pc;
    c.avg_tis = std::move(tis);
    c.support = support;
    return c;
}

/// Random distinct templates of length 1..4.
template <class Gen>
std::vector<std::string> random_templates(Gen& gen, std::size_t count) {
    std::set<std::string> seen;
    std::uniform_int_distribution<int> len(1, 4), act(0, 5);
    std::vector<std::string> out;
    while (out.size() < count) {
        ActionTemplate t;
        const int n = len(gen);
        for (int i = 0; i < n; ++i) t.actions.push_back(kAllActions[static_cast<std::size_t>(act(gen))]);
        if (seen.insert(t.to_string()).second) out.push_back(t.to_string());
    }
    return out;
}

/// Trajectory of `steps` actions whose last step states `answer`.
inline Trajectory answer_trajectory(const std::string& query_id, std::size_t steps, const std::string& answer) {
    Trajectory t;
    t.query_id = query_id;
    for (std::size_t i = 0; i + 1 < steps; ++i) t.steps.push_back(make_step(Action::SystemAnalysis, "note"));
    t.steps.push_back(make_step(Action::ChainOfThought, "FINAL ANSWER: " + answer));
    t.answer = *t.steps.back().extracted_answer;
    return t;
}

}  // namespace tc_test
