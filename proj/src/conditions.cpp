#include "edcim/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace edcim {

std::string_view direction_name(Direction dir) {
    return dir == Direction::Low ? "low" : "high";
}

namespace {

std::string bound_text(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

std::string Condition::describe() const {
    std::string s(feature_name(key));
    s += " in [";
    s += bound_text(lo);
    s += ", ";
    s += bound_text(hi);
    s += "]";
    return s;
}

nlohmann::json Condition::to_json() const {
    nlohmann::json j;
    j["feature"] = std::string(feature_name(key));
    j["direction"] = std::string(direction_name(dir));
    j["lo"] = std::isinf(lo) ? nlohmann::json() : nlohmann::json(lo);
    j["hi"] = std::isinf(hi) ? nlohmann::json() : nlohmann::json(hi);
    j["violation"] = violation;
    j["suggestion"] = suggestion;
    return j;
}

Condition Condition::from_json(const nlohmann::json& j) {
    Condition c;
    auto key = feature_from_name(j.at("feature").get<std::string>());
    if (!key) throw std::runtime_error("unknown feature: " + j.at("feature").get<std::string>());
    c.key = *key;
    c.dir = j.at("direction").get<std::string>() == "low" ? Direction::Low : Direction::High;
    c.lo = j.at("lo").is_null() ? -std::numeric_limits<double>::infinity()
                                : j.at("lo").get<double>();
    c.hi = j.at("hi").is_null() ? std::numeric_limits<double>::infinity()
                                : j.at("hi").get<double>();
    c.violation = j.value("violation", "");
    c.suggestion = j.value("suggestion", "");
    return c;
}

GridSpec GridSpec::from_training(std::span<const FeatureVector> training,
                                 const std::set<FeatureKey>& enabled) {
    GridSpec grid;
    if (training.empty()) return grid;
    for (FeatureKey key : kAllFeatures) {
        if (!enabled.count(key)) continue;
        std::vector<double> values;
        values.reserve(training.size());
        for (const auto& fv : training) values.push_back(fv.get(key));
        std::sort(values.begin(), values.end());
        double lo = values.front(), hi = values.back();
        if (lo == hi) continue;  // degenerate range: no conditions

        std::vector<double> points;
        if (feature_is_integer(key)) {
            for (double t = std::ceil(lo); t <= std::floor(hi); t += 1.0) points.push_back(t);
        } else {
            // type-7 quantiles at 0%, 10%, ..., 100%
            const size_t n = values.size();
            for (int p = 0; p <= 10; ++p) {
                double pos = (p / 10.0) * static_cast<double>(n - 1);
                size_t base = static_cast<size_t>(pos);
                double frac = pos - static_cast<double>(base);
                double q = values[base];
                if (base + 1 < n) q += frac * (values[base + 1] - values[base]);
                points.push_back(q);
            }
            points.erase(std::unique(points.begin(), points.end()), points.end());
        }
        if (!points.empty()) grid.breakpoints[key] = std::move(points);
    }
    return grid;
}

std::vector<Condition> ground_metarules(const GridSpec& grid,
                                        std::span<const MetaRule> meta_rules) {
    std::vector<Condition> pool;
    for (const auto& rule : meta_rules) {
        auto it = grid.breakpoints.find(rule.key);
        if (it == grid.breakpoints.end()) continue;
        for (double t : it->second) {
            Condition c;
            c.key = rule.key;
            c.dir = rule.dir;
            if (rule.dir == Direction::High) {
                c.lo = t;
            } else {
                c.hi = t;
            }
            c.violation = rule.violation;
            c.suggestion = rule.suggestion;
            pool.push_back(std::move(c));
        }
    }
    return pool;
}

}  // namespace edcim
