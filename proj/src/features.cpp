#include "edcim/features.hpp"

#include "edcim/canonical.hpp"
#include "edcim/solver.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace edcim {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "equation_count", "variable_count", "constant_count", "addsub_count",
    "muldiv_count",   "avg_depth",      "total_nodes",    "leaf_nodes",
    "shannon_entropy", "gini_impurity", "jaccard_core_distance", "majority_support",
};

// Class key for responses that failed to parse; parser output is ASCII so
// this can never collide with a canonical rendering.
const std::string kUnparsableClass = "\xE2\x8A\xA5";

// Solution values compare rounded to 9 decimals.
std::string value_key(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

}  // namespace

std::string_view feature_name(FeatureKey key) {
    return kFeatureNames[static_cast<size_t>(key)];
}

std::optional<FeatureKey> feature_from_name(std::string_view name) {
    for (int i = 0; i < kFeatureCount; ++i) {
        if (kFeatureNames[i] == name) return static_cast<FeatureKey>(i);
    }
    return std::nullopt;
}

bool feature_is_integer(FeatureKey key) {
    switch (key) {
        case FeatureKey::EquationCount:
        case FeatureKey::VariableCount:
        case FeatureKey::ConstantCount:
        case FeatureKey::AddSubCount:
        case FeatureKey::MulDivCount:
        case FeatureKey::TotalNodes:
        case FeatureKey::LeafNodes:
            return true;
        default:
            return false;
    }
}

RuleGroup feature_group(FeatureKey key) {
    switch (key) {
        case FeatureKey::EquationCount:
        case FeatureKey::VariableCount:
        case FeatureKey::ConstantCount:
        case FeatureKey::AddSubCount:
        case FeatureKey::MulDivCount:
            return RuleGroup::Symbols;
        case FeatureKey::AvgDepth:
        case FeatureKey::TotalNodes:
        case FeatureKey::LeafNodes:
            return RuleGroup::Complexity;
        default:
            return RuleGroup::Diversity;
    }
}

std::string_view rule_group_name(RuleGroup group) {
    switch (group) {
        case RuleGroup::Symbols: return "symbols";
        case RuleGroup::Complexity: return "complexity";
        case RuleGroup::Diversity: return "diversity";
    }
    return "";
}

nlohmann::json FeatureVector::to_json() const {
    nlohmann::json j;
    j["problem_id"] = problem_id;
    for (FeatureKey key : kAllFeatures) {
        j[std::string(feature_name(key))] = get(key);
    }
    return j;
}

FeatureVector FeatureVector::from_json(const nlohmann::json& j) {
    FeatureVector fv;
    fv.problem_id = j.value("problem_id", "");
    for (FeatureKey key : kAllFeatures) {
        fv.set(key, j.at(std::string(feature_name(key))).get<double>());
    }
    return fv;
}

ResponseSet ResponseSet::from_texts(std::string problem_id, std::vector<std::string> texts) {
    ResponseSet rs;
    rs.problem_id = std::move(problem_id);
    rs.raw_texts = std::move(texts);
    rs.parsed.reserve(rs.raw_texts.size());
    for (const auto& text : rs.raw_texts) rs.parsed.push_back(parse_system(text));
    return rs;
}

std::optional<int> ResponseSet::primary_index() const {
    for (size_t i = 0; i < parsed.size(); ++i) {
        if (parse_ok(parsed[i])) return static_cast<int>(i);
    }
    return std::nullopt;
}

const EquationSystem* ResponseSet::primary() const {
    auto idx = primary_index();
    if (!idx) return nullptr;
    return &parsed_system(parsed[*idx]);
}

FeatureVector extract_features(const ResponseSet& rs) {
    FeatureVector fv;
    fv.problem_id = rs.problem_id;
    const int n = rs.size();
    if (n == 0) return fv;

    if (const EquationSystem* primary = rs.primary()) {
        TreeStats st = tree_stats(*primary);
        fv.set(FeatureKey::EquationCount, st.equation_count);
        fv.set(FeatureKey::VariableCount, st.variable_count);
        fv.set(FeatureKey::ConstantCount, st.constant_count);
        fv.set(FeatureKey::AddSubCount, st.addsub_count);
        fv.set(FeatureKey::MulDivCount, st.muldiv_count);
        fv.set(FeatureKey::AvgDepth, st.avg_depth);
        fv.set(FeatureKey::TotalNodes, st.total_nodes);
        fv.set(FeatureKey::LeafNodes, st.leaf_nodes);
    }

    // Class distribution over canonical strings; all parse failures share one class.
    std::map<std::string, int> classes;
    for (int i = 0; i < n; ++i) {
        if (parse_ok(rs.parsed[i])) {
            classes[render_canonical(parsed_system(rs.parsed[i]))] += 1;
        } else {
            classes[kUnparsableClass] += 1;
        }
    }
    double entropy = 0.0, gini_sum = 0.0, majority = 0.0;
    for (const auto& [key, count] : classes) {
        double p = static_cast<double>(count) / n;
        entropy -= p * std::log2(p);
        gini_sum += p * p;
        majority = std::max(majority, p);
    }
    if (classes.size() == 1) entropy = 0.0;  // avoid -0 from rounding
    fv.set(FeatureKey::ShannonEntropy, entropy);
    fv.set(FeatureKey::GiniImpurity, 1.0 - gini_sum);
    fv.set(FeatureKey::MajoritySupport, majority);

    // Jaccard distance to the per-variable core solution set.
    std::vector<std::optional<std::map<std::string, std::string>>> solved(n);
    std::set<std::string> universe;
    for (int i = 0; i < n; ++i) {
        if (!parse_ok(rs.parsed[i])) continue;
        SolveOutcome outcome = solve(parsed_system(rs.parsed[i]));
        if (!outcome.unique()) continue;
        std::map<std::string, std::string> vals;
        for (const auto& [name, value] : outcome.assignment) {
            vals[name] = value_key(to_double(value));
            universe.insert(name);
        }
        solved[i] = std::move(vals);
    }
    // core[v]: the single value every solved response agrees on, if any.
    std::map<std::string, std::optional<std::string>> core;
    bool first = true;
    for (const auto& vals : solved) {
        if (!vals) continue;
        if (first) {
            for (const auto& v : universe) {
                auto it = vals->find(v);
                core[v] = (it == vals->end()) ? std::nullopt
                                              : std::optional<std::string>(it->second);
            }
            first = false;
            continue;
        }
        for (const auto& v : universe) {
            auto& slot = core[v];
            if (!slot) continue;
            auto it = vals->find(v);
            if (it == vals->end() || it->second != *slot) slot = std::nullopt;
        }
    }

    double distance_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!solved[i]) {
            distance_sum += 1.0;
            continue;
        }
        if (universe.empty()) continue;  // trivially at the core
        double per_var = 0.0;
        for (const auto& v : universe) {
            const auto& core_val = core[v];
            auto it = solved[i]->find(v);
            bool has_val = it != solved[i]->end();
            if (!core_val && !has_val) continue;                       // both empty
            if (core_val && has_val && *core_val == it->second) continue;  // equal singletons
            per_var += 1.0;
        }
        distance_sum += per_var / static_cast<double>(universe.size());
    }
    fv.set(FeatureKey::JaccardCoreDistance, distance_sum / n);
    return fv;
}

}  // namespace edcim
