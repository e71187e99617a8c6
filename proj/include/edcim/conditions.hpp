#pragma once

#include "edcim/features.hpp"

#include <json.hpp>

#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace edcim {

enum class Direction { Low, High };

std::string_view direction_name(Direction dir);

// A meta-rule is a feature/direction family with its natural-language
// templates; a Condition is one grounded interval of it.
struct MetaRule {
    FeatureKey key;
    Direction dir;
    std::string violation;
    std::string suggestion;
};

struct Condition {
    FeatureKey key;
    Direction dir = Direction::High;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    std::string violation;
    std::string suggestion;

    bool evaluate(const FeatureVector& fv) const {
        double v = fv.get(key);
        return v >= lo && v <= hi;
    }

    std::string describe() const;  // e.g. "equation_count in [4, inf)"
    nlohmann::json to_json() const;
    static Condition from_json(const nlohmann::json& j);
};

inline bool evaluate(const Condition& c, const FeatureVector& fv) { return c.evaluate(fv); }

// Per-feature breakpoints derived from a training sample: unit steps across
// the observed range for integer features, 0..100% deciles for real ones.
// A feature constant on the training set contributes no breakpoints.
struct GridSpec {
    std::map<FeatureKey, std::vector<double>> breakpoints;

    static GridSpec from_training(std::span<const FeatureVector> training,
                                  const std::set<FeatureKey>& enabled);
};

// The candidate pool C: one-sided conditions [t, inf) for High meta-rules
// and (-inf, t] for Low ones, one per breakpoint, in meta-rule order.
std::vector<Condition> ground_metarules(const GridSpec& grid,
                                        std::span<const MetaRule> meta_rules);

}  // namespace edcim
