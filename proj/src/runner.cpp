#include "edcim/runner.hpp"

#include "edcim/solver.hpp"

namespace edcim {

TrainingBuild build_training_samples(const ExperimentConfig& cfg, const TemplateCatalog& catalog,
                                     LlmClient& generator, std::span<const Problem> train) {
    PromptBuilder builder(catalog);
    PromptSettings settings = PromptSettings::table_setting(cfg.prompt_setting);
    TrainingBuild build;
    for (const Problem& problem : train) {
        PromptBundle bundle =
            builder.build_generation_prompt(problem.id, problem.question, settings);
        std::vector<std::string> texts = generator.complete(bundle, cfg.generations);
        ResponseSet responses = ResponseSet::from_texts(problem.id, std::move(texts));
        TrainingSample sample;
        sample.features = extract_features(responses);
        SolveOutcome outcome;
        const EquationSystem* x1 = responses.primary();
        if (x1) outcome = solve(*x1);
        sample.is_error = !judge(outcome, x1, ground_truth_of(problem), cfg.judge_tol);
        build.feature_rows.push_back(sample.features.to_json());
        build.samples.push_back(std::move(sample));
    }
    return build;
}

RuleSet learn_rule_set(const ExperimentConfig& cfg, const TemplateCatalog& catalog,
                       std::span<const TrainingSample> samples) {
    std::vector<FeatureVector> features;
    features.reserve(samples.size());
    for (const auto& s : samples) features.push_back(s.features);
    GridSpec grid = GridSpec::from_training(features, cfg.enabled_features());
    std::vector<Condition> candidates = ground_metarules(grid, catalog.meta_rules());
    return det_rule_learn(samples, candidates, cfg.epsilon, cfg.neg_definition);
}

bool detector_needs_rules(DetectorType detector) {
    return detector == DetectorType::Edr || detector == DetectorType::EdrSolvability;
}

RunOutput execute_run(const ExperimentConfig& cfg, const TemplateCatalog& catalog,
                      LlmClient& generator, LlmClient& corrector,
                      std::span<const Problem> train, std::span<const Problem> test) {
    RunOutput out;
    if (detector_needs_rules(cfg.detector)) {
        if (!cfg.rules_path.empty()) {
            out.rules = RuleSet::load(cfg.rules_path);
        } else {
            TrainingBuild build = build_training_samples(cfg, catalog, generator, train);
            out.rules = learn_rule_set(cfg, catalog, build.samples);
        }
        out.rules_used = true;
    }
    Pipeline pipeline(catalog, generator, corrector, out.rules_used ? &out.rules : nullptr,
                      cfg.run_options());
    out.results = pipeline.run_dataset(test);
    out.report = pipeline.aggregate(out.results, test);
    return out;
}

std::string results_to_jsonl(std::span<const SampleResult> results) {
    std::string text;
    for (const auto& r : results) {
        text += r.to_json().dump();
        text.push_back('\n');
    }
    return text;
}

}  // namespace edcim
