#pragma once

#include "edcim/templates.hpp"

#include <span>
#include <string>

namespace edcim {

struct PromptBundle {
    enum class Phase { Generate, Correct };

    std::string system_instruction;
    std::string user_message;
    std::string problem_id;
    Phase phase = Phase::Generate;
};

// Correction-prompt component toggles; the seven ablation settings are
// fixed combinations of these.
struct PromptSettings {
    bool few_shots = true;
    bool solvability = true;
    bool violations = true;
    bool suggestions = true;

    static PromptSettings table_setting(int setting);  // 1..7, throws otherwise
    int closest_setting() const;
};

struct Feedback {
    std::string violations;   // newline-joined, deduplicated per meta-rule+direction
    std::string suggestions;
    std::string solvability;  // the solvability sentence or empty
};

class PromptBuilder {
public:
    explicit PromptBuilder(const TemplateCatalog& catalog) : catalog_(catalog) {}

    // Few-shot examples + "Question: {problem}\nEquations:". Byte-stable.
    PromptBundle build_generation_prompt(const std::string& problem_id,
                                         const std::string& problem_text,
                                         const PromptSettings& settings = {}) const;

    Feedback render_feedback(std::span<const Condition> fired, bool unsolvable) const;

    // One-shot example + question + initial equations + reasons + re-ask,
    // ending with "Corrected Equations:". The initial block is the rendered
    // system, or the raw response verbatim when it never parsed.
    PromptBundle build_correction_prompt(const std::string& problem_id,
                                         const std::string& problem_text,
                                         const std::string& initial_equations,
                                         std::span<const Condition> fired, bool unsolvable,
                                         const PromptSettings& settings = {}) const;

private:
    const TemplateCatalog& catalog_;
};

}  // namespace edcim
