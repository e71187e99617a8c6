#pragma once

#include "edcim/rational.hpp"

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace edcim {

enum class ExprKind { Constant, Variable, Add, Sub, Mul, Div, Neg };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable arithmetic expression tree. Nodes are shared freely across
// threads once built.
class Expr {
public:
    static ExprPtr constant(Rational value);
    static ExprPtr variable(std::string name);
    static ExprPtr add(ExprPtr lhs, ExprPtr rhs);
    static ExprPtr sub(ExprPtr lhs, ExprPtr rhs);
    static ExprPtr mul(ExprPtr lhs, ExprPtr rhs);
    static ExprPtr div(ExprPtr lhs, ExprPtr rhs);
    static ExprPtr neg(ExprPtr child);
    static ExprPtr binary(ExprKind kind, ExprPtr lhs, ExprPtr rhs);

    ExprKind kind() const { return kind_; }
    bool is_constant() const { return kind_ == ExprKind::Constant; }
    bool is_variable() const { return kind_ == ExprKind::Variable; }
    bool is_leaf() const { return is_constant() || is_variable(); }

    const Rational& value() const { return value_; }
    const std::string& name() const { return name_; }
    const ExprPtr& left() const { return left_; }    // also the Neg child
    const ExprPtr& right() const { return right_; }

    void collect_variables(std::set<std::string>& out) const;
    int node_count() const;
    int depth() const;  // leaf = 1

private:
    Expr(ExprKind kind, Rational value, std::string name, ExprPtr left, ExprPtr right)
        : kind_(kind),
          value_(std::move(value)),
          name_(std::move(name)),
          left_(std::move(left)),
          right_(std::move(right)) {}

    ExprKind kind_;
    Rational value_;
    std::string name_;
    ExprPtr left_, right_;
};

bool structurally_equal(const Expr& a, const Expr& b);
inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    return structurally_equal(*a, *b);
}

struct Equation {
    ExprPtr lhs;
    ExprPtr rhs;

    // An identity ("x = x") or a variable-free statement ("5 = 5") carries
    // no constraint and is flagged degenerate.
    bool degenerate() const;
    std::set<std::string> variables() const;
};

struct EquationSystem {
    std::vector<Equation> equations;        // source order preserved
    std::set<std::string> variables;        // union over all equations

    static EquationSystem from_equations(std::vector<Equation> eqs);
    bool empty() const { return equations.empty(); }
};

struct TreeStats {
    int equation_count = 0;
    int variable_count = 0;   // distinct names
    int constant_count = 0;   // constant leaf occurrences
    int addsub_count = 0;     // Add + Sub + Neg nodes
    int muldiv_count = 0;     // Mul + Div nodes
    double avg_depth = 0.0;   // mean over equations, '=' root at depth 1
    int total_nodes = 0;      // all AST nodes including the '=' roots
    int leaf_nodes = 0;       // constant + variable occurrences

    int operator_count() const { return addsub_count + muldiv_count; }
};

TreeStats tree_stats(const EquationSystem& system);

}  // namespace edcim
