#pragma once

#include "edcim/solver.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>

namespace edcim {

// Normalized mode treats the structural term as a distance |N1-N2|/max;
// PaperLiteral keeps the printed similarity form 1 - |N1-N2|/max.
enum class EqdMode { Normalized, PaperLiteral };

std::string_view eqd_mode_name(EqdMode mode);
std::optional<EqdMode> eqd_mode_from_name(std::string_view name);

struct EqdOptions {
    EqdMode mode = EqdMode::Normalized;
    double solution_tol = 1e-9;
};

struct EqDReport {
    double solution_dist = 0.0;
    double structural_dist = 0.0;
    double complexity_dist = 0.0;
    double eqd = 0.0;  // mean of the three components
    EqdMode mode = EqdMode::Normalized;

    nlohmann::json to_json() const;
};

// Printed form of the structural term, included in reports.
std::string_view structural_formula(EqdMode mode);

double structural_component(long n1, long n2, EqdMode mode);
double complexity_component(long o1, long o2);
double solution_component(const SolveOutcome& sx, const SolveOutcome& sy, double tol);

EqDReport eqd(const EquationSystem& x, const SolveOutcome& solve_x, const EquationSystem& y,
              const SolveOutcome& solve_y, const EqdOptions& options = {});

// Per-category distribution of the correction's effect on EqD.
struct ImprovementInput {
    std::string outcome;  // "F2T" / "T2F" / "T2T" / "F2F"
    bool flagged = false;
    std::optional<double> delta_eqd;
};

struct CategorySummary {
    int count = 0;
    double median = 0.0;
    double frac_improved = 0.0;   // delta < 0
    double frac_unchanged = 0.0;  // delta == 0
    double frac_degraded = 0.0;   // delta > 0
};

struct ImprovementReport {
    std::map<std::string, CategorySummary> categories;  // the four outcomes + "all_detected"

    nlohmann::json to_json() const;
};

ImprovementReport improvement_report(std::span<const ImprovementInput> inputs);

}  // namespace edcim
