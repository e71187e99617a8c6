#include "edcim/config.hpp"

#include <fstream>

namespace edcim {

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.generator.temperature = 0.7;
    cfg.corrector.temperature = 0.0;
    return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["dataset"] = {{"path", dataset_path},
                    {"format", std::string(dataset_format_name(dataset_format))}};
    j["split"] = {{"ratio", split_ratio}, {"seed", split_seed}};
    j["epsilon"] = epsilon;
    j["detector"] = std::string(detector_name(detector));
    j["prompt_setting"] = prompt_setting;
    j["rule_groups"] = {{"symbols", group_symbols},
                        {"complexity", group_complexity},
                        {"diversity", group_diversity}};
    j["neg_definition"] = std::string(neg_definition_name(neg_definition));
    j["generations"] = generations;
    j["judge_tol"] = judge_tol;
    j["correction_rounds"] = correction_rounds;
    j["workers"] = workers;
    j["eqd_mode"] = std::string(eqd_mode_name(eqd_mode));
    j["eqd_solution_tol"] = eqd_solution_tol;
    j["data_dir"] = data_dir;
    j["rules_path"] = rules_path;
    j["out_dir"] = out_dir;
    j["generator"] = generator.to_json();
    j["corrector"] = corrector.to_json();
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg = default_config();
    if (j.contains("dataset")) {
        cfg.dataset_path = j["dataset"].value("path", "");
        auto format = dataset_format_from_name(j["dataset"].value("format", "generic"));
        if (!format) throw std::invalid_argument("unknown dataset format");
        cfg.dataset_format = *format;
    }
    if (j.contains("split")) {
        cfg.split_ratio = j["split"].value("ratio", 0.1);
        cfg.split_seed = j["split"].value("seed", uint64_t{17});
    }
    cfg.epsilon = j.value("epsilon", 0.1);
    if (j.contains("detector")) {
        auto det = detector_from_name(j["detector"].get<std::string>());
        if (!det) throw std::invalid_argument("unknown detector: " +
                                              j["detector"].get<std::string>());
        cfg.detector = *det;
    }
    cfg.prompt_setting = j.value("prompt_setting", 1);
    if (j.contains("rule_groups")) {
        cfg.group_symbols = j["rule_groups"].value("symbols", true);
        cfg.group_complexity = j["rule_groups"].value("complexity", true);
        cfg.group_diversity = j["rule_groups"].value("diversity", true);
    }
    cfg.neg_definition = j.value("neg_definition", "false_positives") == "paper_literal"
                             ? NegDefinition::PaperLiteral
                             : NegDefinition::FalsePositives;
    cfg.generations = j.value("generations", 10);
    cfg.judge_tol = j.value("judge_tol", 1e-4);
    cfg.correction_rounds = j.value("correction_rounds", 1);
    cfg.workers = j.value("workers", 4);
    if (j.contains("eqd_mode")) {
        auto mode = eqd_mode_from_name(j["eqd_mode"].get<std::string>());
        if (!mode) throw std::invalid_argument("unknown eqd mode");
        cfg.eqd_mode = *mode;
    }
    cfg.eqd_solution_tol = j.value("eqd_solution_tol", 1e-9);
    cfg.data_dir = j.value("data_dir", "data");
    cfg.rules_path = j.value("rules_path", "");
    cfg.out_dir = j.value("out_dir", "out");
    if (j.contains("generator")) cfg.generator = ProviderConfig::from_json(j["generator"]);
    if (j.contains("corrector")) cfg.corrector = ProviderConfig::from_json(j["corrector"]);
    if (!j.contains("generator") || !j["generator"].contains("temperature")) {
        cfg.generator.temperature = 0.7;
    }
    if (!j.contains("corrector") || !j["corrector"].contains("temperature")) {
        cfg.corrector.temperature = 0.0;
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config: " + path.string());
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

void ExperimentConfig::validate() const {
    if (epsilon <= 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must be in (0,1]");
    if (split_ratio <= 0.0 || split_ratio >= 1.0) {
        throw std::invalid_argument("split ratio must be in (0,1)");
    }
    if (generations < 1) throw std::invalid_argument("generations must be >= 1");
    PromptSettings::table_setting(prompt_setting);  // throws when out of range
}

RunOptions ExperimentConfig::run_options() const {
    RunOptions opts;
    opts.detector = detector;
    opts.prompt = PromptSettings::table_setting(prompt_setting);
    opts.generations = generations;
    opts.judge_tol = judge_tol;
    opts.correction_rounds = correction_rounds;
    opts.workers = workers;
    opts.eqd.mode = eqd_mode;
    opts.eqd.solution_tol = eqd_solution_tol;
    return opts;
}

std::set<FeatureKey> ExperimentConfig::enabled_features() const {
    std::set<FeatureKey> enabled;
    for (FeatureKey key : kAllFeatures) {
        RuleGroup group = feature_group(key);
        if ((group == RuleGroup::Symbols && group_symbols) ||
            (group == RuleGroup::Complexity && group_complexity) ||
            (group == RuleGroup::Diversity && group_diversity)) {
            enabled.insert(key);
        }
    }
    return enabled;
}

}  // namespace edcim
