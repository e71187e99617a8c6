#pragma once

#include "edcim/datasets.hpp"
#include "edcim/features.hpp"
#include "edcim/llm_client.hpp"
#include "edcim/metrics.hpp"
#include "edcim/prompt_builder.hpp"
#include "edcim/rule_learner.hpp"
#include "edcim/solver.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edcim {

enum class DetectorType { All, Oracle, Solvability, Edr, EdrSolvability };

std::string_view detector_name(DetectorType detector);
std::optional<DetectorType> detector_from_name(std::string_view name);

struct GroundTruth {
    std::string problem_id;
    std::vector<double> values;
    const EquationSystem* reference = nullptr;
};

GroundTruth ground_truth_of(const Problem& problem);

// Correctness by value matching: Unique needs the ground-truth values to
// appear among the assignment values within tol; Underdetermined searches
// injective placements of the values over the system variables (consistent
// with the solver-determined ones) and accepts if check_solution passes.
bool judge(const SolveOutcome& outcome, const EquationSystem* system, const GroundTruth& gt,
           double tol);

enum class Outcome4 { F2T, T2F, T2T, F2F };

std::string_view outcome_name(Outcome4 outcome);
Outcome4 classify_outcome(bool correct_before, bool correct_after);

struct RunOptions {
    DetectorType detector = DetectorType::EdrSolvability;
    PromptSettings prompt;
    int generations = 10;
    double judge_tol = 1e-4;
    int correction_rounds = 1;
    int workers = 4;
    EqdOptions eqd;
};

struct SampleResult {
    std::string id;
    bool failed = false;
    std::string fail_reason;

    ResponseSet responses;
    FeatureVector features;

    bool flagged = false;
    std::vector<Condition> fired;
    bool unsolvable_feedback = false;

    std::optional<EquationSystem> x1, x2;  // absent when the text never parsed
    std::string x1_raw, x2_raw;
    SolveOutcome solve1, solve2;
    bool correct1 = false, correct2 = false;
    Outcome4 outcome = Outcome4::F2F;

    int generator_calls = 0;
    int corrector_calls = 0;
    std::optional<std::string> correction_prompt;
    std::optional<std::string> correction_response;

    std::optional<EqDReport> eqd1, eqd2;  // against the reference system
    std::optional<double> delta_eqd;
    std::string delta_skip_reason;

    nlohmann::json to_json() const;
};

struct AggregateReport {
    int samples = 0;  // judged (non-failed)
    int failed = 0;
    double accuracy_before = 0.0;
    double accuracy_after = 0.0;
    double reprompt_rate = 0.0;
    int flagged = 0;
    int tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    std::map<std::string, int> outcomes;
    double sc_accuracy = 0.0;
    double sc_solvable_accuracy = 0.0;
    nlohmann::json generator_ledger;
    nlohmann::json corrector_ledger;
    std::vector<std::string> failures;

    nlohmann::json to_json() const;
};

// Majority vote over canonical classes, optionally restricted to solvable
// systems; nullopt when no candidate remains.
std::optional<EquationSystem> sc_vote(const ResponseSet& rs, bool solvable_only);

class Pipeline {
public:
    Pipeline(const TemplateCatalog& catalog, LlmClient& generator, LlmClient& corrector,
             const RuleSet* rules, RunOptions options);

    SampleResult run_sample(const Problem& problem) const;
    std::vector<SampleResult> run_dataset(std::span<const Problem> problems) const;
    AggregateReport aggregate(std::span<const SampleResult> results,
                              std::span<const Problem> problems) const;

    const RunOptions& options() const { return options_; }

private:
    const TemplateCatalog& catalog_;
    PromptBuilder builder_;
    LlmClient& generator_;
    LlmClient& corrector_;
    const RuleSet* rules_;
    RunOptions options_;
};

}  // namespace edcim
