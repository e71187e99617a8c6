#include "edcim/metrics.hpp"

#include "edcim/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace edcim {

std::string_view eqd_mode_name(EqdMode mode) {
    return mode == EqdMode::Normalized ? "normalized" : "paper_literal";
}

std::optional<EqdMode> eqd_mode_from_name(std::string_view name) {
    if (name == "normalized") return EqdMode::Normalized;
    if (name == "paper_literal") return EqdMode::PaperLiteral;
    return std::nullopt;
}

std::string_view structural_formula(EqdMode mode) {
    return mode == EqdMode::Normalized ? "|N1-N2|/max(N1,N2)" : "1 - |N1-N2|/max(N1,N2)";
}

namespace {

double ratio(long a, long b) {
    long mx = std::max(a, b);
    if (mx == 0) return 0.0;
    return static_cast<double>(std::labs(a - b)) / static_cast<double>(mx);
}

}  // namespace

double structural_component(long n1, long n2, EqdMode mode) {
    double r = ratio(n1, n2);
    return mode == EqdMode::PaperLiteral ? 1.0 - r : r;
}

double complexity_component(long o1, long o2) { return ratio(o1, o2); }

double solution_component(const SolveOutcome& sx, const SolveOutcome& sy, double tol) {
    if (!sx.unique() || !sy.unique()) return 1.0;
    std::vector<double> a, b;
    a.reserve(sx.assignment.size());
    b.reserve(sy.assignment.size());
    for (const auto& [name, value] : sx.assignment) a.push_back(to_double(value));
    for (const auto& [name, value] : sy.assignment) b.push_back(to_double(value));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.size() == b.size()) {
        bool match = true;
        for (size_t i = 0; i < a.size(); ++i) {
            if (std::abs(a[i] - b[i]) > tol) {
                match = false;
                break;
            }
        }
        if (match) return 0.0;
    }
    size_t k = std::max(a.size(), b.size());
    if (k == 0) return 0.0;
    a.resize(k, 0.0);
    b.resize(k, 0.0);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double l1 = 0.0;
    for (size_t i = 0; i < k; ++i) l1 += std::abs(a[i] - b[i]);
    return std::min(1.0, l1 / static_cast<double>(k));
}

EqDReport eqd(const EquationSystem& x, const SolveOutcome& solve_x, const EquationSystem& y,
              const SolveOutcome& solve_y, const EqdOptions& options) {
    TreeStats sx = tree_stats(x);
    TreeStats sy = tree_stats(y);
    EqDReport report;
    report.mode = options.mode;
    // Identical systems have identical solution sets whatever the solve tag.
    report.solution_dist = canonical_equal(x, y)
                               ? 0.0
                               : solution_component(solve_x, solve_y, options.solution_tol);
    report.structural_dist = structural_component(sx.total_nodes, sy.total_nodes, options.mode);
    report.complexity_dist = complexity_component(sx.operator_count(), sy.operator_count());
    report.eqd = (report.solution_dist + report.structural_dist + report.complexity_dist) / 3.0;
    return report;
}

nlohmann::json EqDReport::to_json() const {
    return {{"solution_dist", solution_dist},
            {"structural_dist", structural_dist},
            {"complexity_dist", complexity_dist},
            {"eqd", eqd},
            {"mode", std::string(eqd_mode_name(mode))},
            {"structural_formula", std::string(structural_formula(mode))}};
}

namespace {

CategorySummary summarize(std::vector<double> deltas) {
    CategorySummary s;
    s.count = static_cast<int>(deltas.size());
    if (deltas.empty()) return s;
    std::sort(deltas.begin(), deltas.end());
    size_t mid = deltas.size() / 2;
    s.median = deltas.size() % 2 == 1 ? deltas[mid] : (deltas[mid - 1] + deltas[mid]) / 2.0;
    int improved = 0, unchanged = 0, degraded = 0;
    for (double d : deltas) {
        if (d < 0.0) ++improved;
        else if (d > 0.0) ++degraded;
        else ++unchanged;
    }
    double n = static_cast<double>(deltas.size());
    s.frac_improved = improved / n;
    s.frac_unchanged = unchanged / n;
    s.frac_degraded = degraded / n;
    return s;
}

}  // namespace

ImprovementReport improvement_report(std::span<const ImprovementInput> inputs) {
    std::map<std::string, std::vector<double>> buckets;
    for (const char* name : {"F2T", "T2F", "T2T", "F2F", "all_detected"}) buckets[name];
    for (const auto& input : inputs) {
        if (!input.delta_eqd) continue;
        auto it = buckets.find(input.outcome);
        if (it != buckets.end()) it->second.push_back(*input.delta_eqd);
        if (input.flagged) buckets["all_detected"].push_back(*input.delta_eqd);
    }
    ImprovementReport report;
    for (auto& [name, deltas] : buckets) report.categories[name] = summarize(std::move(deltas));
    return report;
}

nlohmann::json ImprovementReport::to_json() const {
    nlohmann::json j;
    for (const auto& [name, s] : categories) {
        nlohmann::json entry;
        entry["count"] = s.count;
        if (s.count > 0) {
            entry["median"] = s.median;
            entry["frac_improved"] = s.frac_improved;
            entry["frac_unchanged"] = s.frac_unchanged;
            entry["frac_degraded"] = s.frac_degraded;
        }
        j[name] = std::move(entry);
    }
    return j;
}

}  // namespace edcim
