#pragma once

/*
 * Domain types shared by the search, distillation, retrieval and inference
 * layers: the six reasoning actions, queries, reasoning steps, trajectories
 * and action templates, plus answer canonicalization.
 *
 * Everything here is a plain value type. Nothing holds interior state, so
 * instances can be shared freely between worker threads.
 */

#include "thoughtcards/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace thoughtcards {

// ============================================================================
// Actions
// ============================================================================

enum class Action {
    VisualParsing,     // a1
    SystemAnalysis,    // a2
    OneStepThought,    // a3
    ChainOfThought,    // a4
    DivideAndConquer,  // a5
    SelfReflection,    // a6
};

inline constexpr std::array<Action, 6> kAllActions = {
    Action::VisualParsing,  Action::SystemAnalysis,   Action::OneStepThought,
    Action::ChainOfThought, Action::DivideAndConquer, Action::SelfReflection,
};

inline constexpr std::size_t action_index(Action a) noexcept { return static_cast<std::size_t>(a); }

/// "a1".."a6"
inline constexpr std::string_view short_name(Action a) noexcept {
    constexpr std::array<std::string_view, 6> names = {"a1", "a2", "a3", "a4", "a5", "a6"};
    return names[action_index(a)];
}

/// "VP", "SA", ...
inline constexpr std::string_view abbreviation(Action a) noexcept {
    constexpr std::array<std::string_view, 6> names = {"VP", "SA", "OST", "CoT", "DC", "SR"};
    return names[action_index(a)];
}

inline constexpr std::string_view long_name(Action a) noexcept {
    constexpr std::array<std::string_view, 6> names = {
        "Visual Parsing",   "System Analysis",    "One-Step Thought",
        "Chain-of-Thought", "Divide and Conquer", "Self-Reflection",
    };
    return names[action_index(a)];
}

/// Accepts the short name ("a4") or the abbreviation ("CoT"). Anything else is nullopt.
inline std::optional<Action> parse_action(std::string_view token) noexcept {
    for (Action a : kAllActions) {
        if (token == short_name(a) || token == abbreviation(a)) return a;
    }
    return std::nullopt;
}

// ============================================================================
// Queries
// ============================================================================

struct ImageFile {
    std::filesystem::path path;
    friend bool operator==(const ImageFile&, const ImageFile&) = default;
};

struct InlineImage {
    std::string base64;
    std::string mime_type = "image/png";
    friend bool operator==(const InlineImage&, const InlineImage&) = default;
};

/// Images are opaque to this library; they are only forwarded to providers.
using ImagePayload = std::variant<ImageFile, InlineImage>;

struct Query {
    std::string id;
    std::string text;
    std::optional<ImagePayload> image;
    std::optional<std::string> gold_answer;
    std::vector<std::string> conditions;

    friend bool operator==(const Query&, const Query&) = default;
};

inline void validate(const Query& q) {
    if (q.id.empty()) throw UsageError("query id must be non-empty");
    if (q.text.empty()) throw UsageError("query '" + q.id + "' has empty text");
}

// ============================================================================
// Answer canonicalization
// ============================================================================

namespace detail {

inline bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }
inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
inline bool is_quote(char c) noexcept { return c == '"' || c == '\'' || c == '`'; }

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// [+-]? digits [. digits?]  |  [+-]? . digits
inline bool looks_numeric(std::string_view s) noexcept {
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
    std::size_t digits = 0;
    bool dot = false;
    for (char c : s) {
        if (is_digit(c)) {
            ++digits;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            return false;
        }
    }
    return digits > 0;
}

inline std::string canonical_number(std::string_view s) {
    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    std::string_view whole = s;
    std::string_view frac;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        whole = s.substr(0, dot);
        frac = s.substr(dot + 1);
    }
    while (!whole.empty() && whole.front() == '0') whole.remove_prefix(1);
    while (!frac.empty() && frac.back() == '0') frac.remove_suffix(1);

    std::string out;
    if (negative && !(whole.empty() && frac.empty())) out += '-';
    out += whole.empty() ? std::string_view("0") : whole;
    if (!frac.empty()) {
        out += '.';
        out += frac;
    }
    return out;
}

inline std::string normalize_once(std::string_view raw) {
    std::string s;
    s.reserve(raw.size());
    for (char c : trim(raw)) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    // Peel quotes from both ends and periods from the tail. A leading period
    // survives when it starts a decimal like ".5".
    std::string_view v = s;
    for (bool changed = true; changed;) {
        changed = false;
        v = trim(v);
        if (!v.empty() && is_quote(v.front())) {
            v.remove_prefix(1);
            changed = true;
        }
        if (!v.empty() && (is_quote(v.back()) || v.back() == '.')) {
            v.remove_suffix(1);
            changed = true;
        }
        if (v.size() >= 2 && v.front() == '.' && !is_digit(v[1])) {
            v.remove_prefix(1);
            changed = true;
        } else if (v.size() == 1 && v.front() == '.') {
            v.remove_prefix(1);
            changed = true;
        }
    }

    std::string collapsed;
    collapsed.reserve(v.size());
    bool pending_space = false;
    for (char c : v) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !collapsed.empty()) collapsed += ' ';
        pending_space = false;
        collapsed += c;
    }

    if (looks_numeric(collapsed)) return canonical_number(collapsed);
    return collapsed;
}

}  // namespace detail

/// Canonical form used whenever two answers are compared. Idempotent.
inline std::string normalize_answer(std::string_view raw) {
    std::string current = detail::normalize_once(raw);
    // A single pass can expose new surrounding punctuation ("'x.'" -> "x."),
    // so iterate to the fixed point. Each pass is non-growing except for
    // ".5" -> "0.5", which is itself a fixed point.
    for (int i = 0; i < 32; ++i) {
        std::string next = detail::normalize_once(current);
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

// ============================================================================
// Steps, trajectories, templates
// ============================================================================

/// A step is terminal iff one of its lines starts with this marker.
inline constexpr std::string_view kAnswerMarker = "FINAL ANSWER:";

/// Normalized text after the first marker line, or nullopt if there is none
/// or it normalizes to the empty string.
inline std::optional<std::string> extract_answer(std::string_view content) {
    std::size_t pos = 0;
    while (pos <= content.size()) {
        std::size_t eol = content.find('\n', pos);
        std::string_view line = content.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        if (line.starts_with(kAnswerMarker)) {
            std::string answer = normalize_answer(line.substr(kAnswerMarker.size()));
            if (answer.empty()) return std::nullopt;
            return answer;
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return std::nullopt;
}

struct ReasoningStep {
    Action action = Action::ChainOfThought;
    std::string content;
    std::optional<std::string> extracted_answer;

    friend bool operator==(const ReasoningStep&, const ReasoningStep&) = default;
};

/// Builds a step and detects the terminal marker.
inline ReasoningStep make_step(Action action, std::string content) {
    if (content.empty()) throw UsageError("reasoning step content must be non-empty");
    ReasoningStep step{action, std::move(content), std::nullopt};
    step.extracted_answer = extract_answer(step.content);
    return step;
}

struct Trajectory {
    std::string query_id;
    std::vector<ReasoningStep> steps;
    std::string answer;
    double reward = 0.0;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline bool is_valid(const Trajectory& t) noexcept {
    if (t.steps.empty()) return false;
    if (!(t.reward >= 0.0 && t.reward <= 1.0)) return false;
    const auto& last = t.steps.back().extracted_answer;
    return last.has_value() && *last == t.answer;
}

inline constexpr std::string_view kTemplateArrow = "→";

struct ActionTemplate {
    std::vector<Action> actions;

    /// "a1→a2→a4"
    std::string to_string() const {
        std::string out;
        for (std::size_t i = 0; i < actions.size(); ++i) {
            if (i != 0) out += kTemplateArrow;
            out += short_name(actions[i]);
        }
        return out;
    }

    static ActionTemplate parse(std::string_view text) {
        ActionTemplate t;
        while (true) {
            std::size_t arrow = text.find(kTemplateArrow);
            std::string_view token = text.substr(0, arrow);
            auto action = parse_action(token);
            if (!action) throw ParseError("invalid action '" + std::string(token) + "' in template");
            t.actions.push_back(*action);
            if (arrow == std::string_view::npos) break;
            text.remove_prefix(arrow + kTemplateArrow.size());
        }
        return t;
    }

    std::size_t size() const noexcept { return actions.size(); }

    friend auto operator<=>(const ActionTemplate&, const ActionTemplate&) = default;
};

inline ActionTemplate template_of(const Trajectory& t) {
    ActionTemplate out;
    out.actions.reserve(t.steps.size());
    for (const auto& s : t.steps) out.actions.push_back(s.action);
    return out;
}

/// Reasoning cost: the number of actions taken.
inline std::size_t cost(const Trajectory& t) noexcept { return t.steps.size(); }

}  // namespace thoughtcards
