#pragma once

#include "edcim/datasets.hpp"
#include "edcim/llm_client.hpp"
#include "edcim/pipeline.hpp"

#include <array>
#include <filesystem>
#include <set>
#include <string>

namespace edcim {

// Epsilon grid for the sweep: dense at low values plus full re-prompt.
inline constexpr std::array<double, 11> kEpsilonSweepGrid = {
    0.01, 0.02, 0.05, 0.08, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 1.0};

struct ExperimentConfig {
    std::string dataset_path;
    DatasetFormat dataset_format = DatasetFormat::Generic;
    double split_ratio = 0.1;  // 1:9 train:test
    uint64_t split_seed = 17;

    double epsilon = 0.1;
    DetectorType detector = DetectorType::EdrSolvability;
    int prompt_setting = 1;
    bool group_symbols = true;
    bool group_complexity = true;
    bool group_diversity = true;
    NegDefinition neg_definition = NegDefinition::FalsePositives;

    int generations = 10;
    double judge_tol = 1e-4;
    int correction_rounds = 1;
    int workers = 4;
    EqdMode eqd_mode = EqdMode::Normalized;
    double eqd_solution_tol = 1e-9;

    std::string data_dir = "data";
    std::string rules_path;  // optional pre-learned rule set
    std::string out_dir = "out";

    ProviderConfig generator;  // temperature defaults to 0.7
    ProviderConfig corrector;  // temperature defaults to 0.0

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);
    void validate() const;

    RunOptions run_options() const;
    std::set<FeatureKey> enabled_features() const;
};

ExperimentConfig default_config();

}  // namespace edcim
