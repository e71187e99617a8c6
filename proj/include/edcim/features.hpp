#pragma once

#include "edcim/parse.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace edcim {

// Feature keys, grouped the way the rule-group ablation toggles them:
// symbol counts / structural complexity / response diversity.
enum class FeatureKey {
    EquationCount,
    VariableCount,
    ConstantCount,
    AddSubCount,
    MulDivCount,
    AvgDepth,
    TotalNodes,
    LeafNodes,
    ShannonEntropy,
    GiniImpurity,
    JaccardCoreDistance,
    MajoritySupport,
};

inline constexpr int kFeatureCount = 12;
inline constexpr std::array<FeatureKey, kFeatureCount> kAllFeatures = {
    FeatureKey::EquationCount,   FeatureKey::VariableCount,
    FeatureKey::ConstantCount,   FeatureKey::AddSubCount,
    FeatureKey::MulDivCount,     FeatureKey::AvgDepth,
    FeatureKey::TotalNodes,      FeatureKey::LeafNodes,
    FeatureKey::ShannonEntropy,  FeatureKey::GiniImpurity,
    FeatureKey::JaccardCoreDistance, FeatureKey::MajoritySupport,
};

std::string_view feature_name(FeatureKey key);
std::optional<FeatureKey> feature_from_name(std::string_view name);
bool feature_is_integer(FeatureKey key);

enum class RuleGroup { Symbols, Complexity, Diversity };
RuleGroup feature_group(FeatureKey key);
std::string_view rule_group_name(RuleGroup group);

struct FeatureVector {
    std::string problem_id;
    std::array<double, kFeatureCount> values{};

    double get(FeatureKey key) const { return values[static_cast<size_t>(key)]; }
    void set(FeatureKey key, double v) { values[static_cast<size_t>(key)] = v; }

    nlohmann::json to_json() const;  // flat record: problem_id + one column per feature
    static FeatureVector from_json(const nlohmann::json& j);
};

// The N sampled generations for one problem with their parse outcomes.
struct ResponseSet {
    std::string problem_id;
    std::vector<std::string> raw_texts;
    std::vector<ParseResult> parsed;

    static ResponseSet from_texts(std::string problem_id, std::vector<std::string> texts);

    int size() const { return static_cast<int>(raw_texts.size()); }
    std::optional<int> primary_index() const;      // first successfully parsed
    const EquationSystem* primary() const;
};

// Complexity features come from the primary response; diversity features
// from the canonical-string class distribution over all N responses (parse
// failures pool into one shared class).
FeatureVector extract_features(const ResponseSet& rs);

}  // namespace edcim
