#pragma once

#include "edcim/conditions.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace edcim {

struct TrainingSample {
    FeatureVector features;
    bool is_error = false;  // initial answer judged incorrect against ground truth
};

// NEG counting mode. FalsePositives (default) counts samples where some
// condition fires on a correct answer; PaperLiteral uses N - POS.
enum class NegDefinition { FalsePositives, PaperLiteral };

std::string_view neg_definition_name(NegDefinition def);

struct PosNeg {
    int pos = 0;
    int neg = 0;
};

PosNeg pos_neg(std::span<const Condition> conditions, std::span<const TrainingSample> data,
               NegDefinition def = NegDefinition::FalsePositives);

struct RuleSet {
    std::vector<Condition> conditions;  // selection order
    double epsilon = 0.1;
    NegDefinition neg_definition = NegDefinition::FalsePositives;
    int train_pos = 0;
    int train_neg = 0;
    int train_size = 0;
    int train_flagged = 0;

    nlohmann::json to_json() const;
    static RuleSet from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static RuleSet load(const std::filesystem::path& path);
};

// Greedy constrained selection: grow C' by the candidate maximizing POS
// while NEG stays within epsilon * N, until no candidate is addable. Ties
// break on lower NEG, then candidate order.
RuleSet det_rule_learn(std::span<const TrainingSample> data,
                       std::span<const Condition> candidates, double epsilon,
                       NegDefinition def = NegDefinition::FalsePositives);

struct Detection {
    bool flagged = false;
    std::vector<Condition> fired;  // in C' order
};

Detection detect(const RuleSet& rules, const FeatureVector& fv);

}  // namespace edcim
