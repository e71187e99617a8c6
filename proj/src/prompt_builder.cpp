#include "edcim/prompt_builder.hpp"

#include <set>
#include <stdexcept>

namespace edcim {

PromptSettings PromptSettings::table_setting(int setting) {
    switch (setting) {
        case 1: return {true, true, true, true};
        case 2: return {false, true, true, true};
        case 3: return {true, false, true, true};
        case 4: return {true, true, false, true};
        case 5: return {true, false, false, true};
        case 6: return {true, true, true, false};
        case 7: return {true, false, false, false};
        default:
            throw std::invalid_argument("prompt setting must be in 1..7, got " +
                                        std::to_string(setting));
    }
}

int PromptSettings::closest_setting() const {
    for (int i = 1; i <= 7; ++i) {
        PromptSettings s = table_setting(i);
        if (s.few_shots == few_shots && s.solvability == solvability &&
            s.violations == violations && s.suggestions == suggestions) {
            return i;
        }
    }
    return 0;  // combination outside the table
}

PromptBundle PromptBuilder::build_generation_prompt(const std::string& problem_id,
                                                    const std::string& problem_text,
                                                    const PromptSettings& settings) const {
    std::string user;
    if (settings.few_shots) {
        for (const auto& ex : catalog_.generation_examples()) {
            user += "Question: " + ex.question + "\nEquations:\n";
            for (size_t i = 0; i < ex.equations.size(); ++i) {
                if (i > 0) user.push_back('\n');
                user += ex.equations[i];
            }
            user += "\n\n";
        }
    }
    user += "Question: " + problem_text + "\nEquations:";

    PromptBundle bundle;
    bundle.system_instruction = catalog_.system_instruction();
    bundle.user_message = std::move(user);
    bundle.problem_id = problem_id;
    bundle.phase = PromptBundle::Phase::Generate;
    return bundle;
}

Feedback PromptBuilder::render_feedback(std::span<const Condition> fired,
                                        bool unsolvable) const {
    Feedback fb;
    std::set<std::pair<FeatureKey, Direction>> seen;
    for (const auto& c : fired) {
        if (!seen.insert({c.key, c.dir}).second) continue;
        if (!fb.violations.empty()) fb.violations.push_back('\n');
        fb.violations += c.violation;
        if (!fb.suggestions.empty()) fb.suggestions.push_back('\n');
        fb.suggestions += c.suggestion;
    }
    if (unsolvable) fb.solvability = catalog_.solvability_sentence();
    return fb;
}

PromptBundle PromptBuilder::build_correction_prompt(const std::string& problem_id,
                                                    const std::string& problem_text,
                                                    const std::string& initial_equations,
                                                    std::span<const Condition> fired,
                                                    bool unsolvable,
                                                    const PromptSettings& settings) const {
    Feedback fb = render_feedback(fired, unsolvable);

    std::string user;
    if (settings.few_shots) {
        user += catalog_.correction_example();
        user += "\n\n";
    }
    user += "Question: " + problem_text + "\nEquations:\n" + initial_equations + "\n\n";
    user += "The equations have been extracted incorrectly for the following reasons:\n";
    if (settings.solvability && !fb.solvability.empty()) {
        user += fb.solvability;
        user.push_back('\n');
    }
    if (settings.violations && !fb.violations.empty()) {
        user += fb.violations;
        user.push_back('\n');
    }
    user += "Please extract the equations again for the given question.\n";
    if (settings.suggestions && !fb.suggestions.empty()) {
        user += fb.suggestions;
        user.push_back('\n');
    }
    user += "\nCorrected Equations:";

    PromptBundle bundle;
    bundle.system_instruction = catalog_.system_instruction();
    bundle.user_message = std::move(user);
    bundle.problem_id = problem_id;
    bundle.phase = PromptBundle::Phase::Correct;
    return bundle;
}

}  // namespace edcim
