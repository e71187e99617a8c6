#pragma once

#include "edcim/expr.hpp"

#include <map>
#include <set>
#include <string>

namespace edcim {

struct SolveOutcome {
    enum class Tag { Unique, Underdetermined, Inconsistent, IllFormed };

    Tag tag = Tag::IllFormed;
    // Unique: every variable. Underdetermined: the variables whose value is
    // forced by the constraints (may be empty).
    std::map<std::string, Rational> assignment;
    int rank = 0;
    std::set<std::string> free_variables;
    std::string reason;  // IllFormed

    bool unique() const { return tag == Tag::Unique; }
    bool solvable() const { return tag == Tag::Unique || tag == Tag::Underdetermined; }
};

const char* solve_tag_name(SolveOutcome::Tag tag);

// Affine systems go through exact fraction Gaussian elimination. Non-affine
// equations are first reduced by substituting variables the affine part
// determines; anything still non-affine falls back to damped Newton with
// fixed-seed restarts (residual < 1e-9 counts as solved).
SolveOutcome solve(const EquationSystem& system);

// True iff every equation whose variables are all covered by the assignment
// evaluates to |lhs - rhs| <= tol. Division by zero during evaluation fails
// the check.
bool check_solution(const EquationSystem& system,
                    const std::map<std::string, Rational>& assignment, double tol);

bool is_solvable(const EquationSystem& system);

// Resource caps: beyond these the outcome is IllFormed instead of a stall.
inline constexpr int kMaxSolveVariables = 32;
inline constexpr int kMaxSolveEquations = 64;

}  // namespace edcim
