#pragma once

// Prompt text sent to chat-completion backends. One fixed instruction per
// action; the policy appends the question, any image, and the steps so far.

#include "thoughtcards/core.hpp"

#include <span>
#include <string>
#include <string_view>

namespace thoughtcards::prompts {

inline constexpr std::string_view kSystem =
    "You are a careful problem solver. You work in explicit steps and follow the instruction given for "
    "each step exactly. When, and only when, you are certain of the final result, write it on its own "
    "line as 'FINAL ANSWER: <answer>'.";

inline constexpr std::string_view action_instruction(Action a) noexcept {
    switch (a) {
        case Action::VisualParsing:
            return "Describe the image and the problem setup: list every quantity, label, shape and relation "
                   "you can read off. Do not solve anything yet.";
        case Action::SystemAnalysis:
            return "Analyse the problem as a whole: state what is known, what is asked, and which relations "
                   "or formulas connect them. Do not compute the answer yet.";
        case Action::OneStepThought:
            return "Take exactly one small reasoning step that moves the solution forward, building on the "
                   "previous steps.";
        case Action::ChainOfThought:
            return "Reason step by step from the current state to the solution, then state the result.";
        case Action::DivideAndConquer:
            return "Split the problem into smaller sub-problems, solve each one, and combine their results.";
        case Action::SelfReflection:
            return "Review the previous steps critically. Point out any mistake or unjustified assumption and "
                   "correct it; confirm the parts that are right.";
    }
    return "";
}

inline constexpr std::string_view kForceAnswer =
    "Using everything above, finish the solution now and give the final result on its own line as "
    "'FINAL ANSWER: <answer>'.";

inline constexpr std::string_view kDirectAnswer =
    "Answer the question directly. Reply with only the final answer, no explanation.";

inline constexpr std::string_view kComplexity =
    "List the known conditions given in this problem (text and image), one per line. Then, on the last "
    "line, write only the number of conditions you listed as a bare integer.";

inline constexpr std::string_view kOutcomeScore =
    "You grade solutions. Read the problem and the proposed solution below and reply with a single number "
    "between 0 and 1: the probability that the final answer is correct. Reply with the number only.";

inline std::string render_history(std::span<const ReasoningStep> history) {
    std::string out;
    for (std::size_t i = 0; i < history.size(); ++i) {
        out += "Step " + std::to_string(i + 1) + " (" + std::string(long_name(history[i].action)) + "):\n";
        out += history[i].content;
        out += "\n\n";
    }
    return out;
}

inline std::string step_prompt(const Query& q, std::span<const ReasoningStep> history, std::string_view instruction) {
    std::string out = "Problem:\n" + q.text + "\n\n";
    if (!history.empty()) out += "Previous steps:\n" + render_history(history);
    out += "Instruction: ";
    out += instruction;
    return out;
}

}  // namespace thoughtcards::prompts
