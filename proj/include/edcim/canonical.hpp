#pragma once

#include "edcim/expr.hpp"

#include <string>

namespace edcim {

// Canonical form: constant subtrees folded, commutative (+ / *) chains
// flattened and re-associated left with operands sorted by their rendered
// text, equations sorted lexicographically by their rendered text.
ExprPtr canonicalize(const ExprPtr& expr);
Equation canonicalize(const Equation& eq);
EquationSystem canonicalize(const EquationSystem& system);

// Minimal-parenthesis rendering with single spaces around binary operators.
// Re-parsing the output of a canonicalized tree reproduces it structurally.
std::string render(const Expr& expr);
std::string render(const Equation& eq);

// Canonicalize + render, newline-joined. This string is the stable wire
// form used as diversity class key and replay/report identity.
std::string render_canonical(const EquationSystem& system);

bool canonical_equal(const EquationSystem& a, const EquationSystem& b);

}  // namespace edcim
