#pragma once

#include "edcim/config.hpp"
#include "edcim/pipeline.hpp"
#include "edcim/templates.hpp"

#include <span>
#include <vector>

namespace edcim {

// Generation-phase training data for the rule learner.
struct TrainingBuild {
    std::vector<TrainingSample> samples;
    nlohmann::json feature_rows = nlohmann::json::array();
};

TrainingBuild build_training_samples(const ExperimentConfig& cfg, const TemplateCatalog& catalog,
                                     LlmClient& generator, std::span<const Problem> train);

RuleSet learn_rule_set(const ExperimentConfig& cfg, const TemplateCatalog& catalog,
                       std::span<const TrainingSample> samples);

bool detector_needs_rules(DetectorType detector);

struct RunOutput {
    std::vector<SampleResult> results;
    AggregateReport report;
    RuleSet rules;
    bool rules_used = false;
};

// learn (or load) the detector, then run the pipeline over the test split.
RunOutput execute_run(const ExperimentConfig& cfg, const TemplateCatalog& catalog,
                      LlmClient& generator, LlmClient& corrector,
                      std::span<const Problem> train, std::span<const Problem> test);

std::string results_to_jsonl(std::span<const SampleResult> results);

}  // namespace edcim
