#include "edcim/expr.hpp"

#include <algorithm>
#include <utility>

namespace edcim {

ExprPtr Expr::constant(Rational value) {
    return ExprPtr(new Expr(ExprKind::Constant, std::move(value), {}, nullptr, nullptr));
}

ExprPtr Expr::variable(std::string name) {
    return ExprPtr(new Expr(ExprKind::Variable, Rational(0), std::move(name), nullptr, nullptr));
}

ExprPtr Expr::add(ExprPtr lhs, ExprPtr rhs) {
    return binary(ExprKind::Add, std::move(lhs), std::move(rhs));
}

ExprPtr Expr::sub(ExprPtr lhs, ExprPtr rhs) {
    return binary(ExprKind::Sub, std::move(lhs), std::move(rhs));
}

ExprPtr Expr::mul(ExprPtr lhs, ExprPtr rhs) {
    return binary(ExprKind::Mul, std::move(lhs), std::move(rhs));
}

ExprPtr Expr::div(ExprPtr lhs, ExprPtr rhs) {
    return binary(ExprKind::Div, std::move(lhs), std::move(rhs));
}

ExprPtr Expr::neg(ExprPtr child) {
    return ExprPtr(new Expr(ExprKind::Neg, Rational(0), {}, std::move(child), nullptr));
}

ExprPtr Expr::binary(ExprKind kind, ExprPtr lhs, ExprPtr rhs) {
    return ExprPtr(new Expr(kind, Rational(0), {}, std::move(lhs), std::move(rhs)));
}

void Expr::collect_variables(std::set<std::string>& out) const {
    switch (kind_) {
        case ExprKind::Constant:
            return;
        case ExprKind::Variable:
            out.insert(name_);
            return;
        case ExprKind::Neg:
            left_->collect_variables(out);
            return;
        default:
            left_->collect_variables(out);
            right_->collect_variables(out);
            return;
    }
}

int Expr::node_count() const {
    switch (kind_) {
        case ExprKind::Constant:
        case ExprKind::Variable:
            return 1;
        case ExprKind::Neg:
            return 1 + left_->node_count();
        default:
            return 1 + left_->node_count() + right_->node_count();
    }
}

int Expr::depth() const {
    switch (kind_) {
        case ExprKind::Constant:
        case ExprKind::Variable:
            return 1;
        case ExprKind::Neg:
            return 1 + left_->depth();
        default:
            return 1 + std::max(left_->depth(), right_->depth());
    }
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case ExprKind::Constant:
            return a.value() == b.value();
        case ExprKind::Variable:
            return a.name() == b.name();
        case ExprKind::Neg:
            return structurally_equal(*a.left(), *b.left());
        default:
            return structurally_equal(*a.left(), *b.left()) &&
                   structurally_equal(*a.right(), *b.right());
    }
}

bool Equation::degenerate() const {
    if (structurally_equal(*lhs, *rhs)) return true;
    std::set<std::string> vars;
    lhs->collect_variables(vars);
    rhs->collect_variables(vars);
    return vars.empty();
}

std::set<std::string> Equation::variables() const {
    std::set<std::string> vars;
    lhs->collect_variables(vars);
    rhs->collect_variables(vars);
    return vars;
}

EquationSystem EquationSystem::from_equations(std::vector<Equation> eqs) {
    EquationSystem system;
    system.equations = std::move(eqs);
    for (const auto& eq : system.equations) {
        eq.lhs->collect_variables(system.variables);
        eq.rhs->collect_variables(system.variables);
    }
    return system;
}

namespace {

struct NodeCounts {
    int constants = 0;
    int addsub = 0;
    int muldiv = 0;
    int leaves = 0;
    int total = 0;
};

void count_nodes(const Expr& e, NodeCounts& c) {
    ++c.total;
    switch (e.kind()) {
        case ExprKind::Constant:
            ++c.constants;
            ++c.leaves;
            return;
        case ExprKind::Variable:
            ++c.leaves;
            return;
        case ExprKind::Neg:
            ++c.addsub;
            count_nodes(*e.left(), c);
            return;
        case ExprKind::Add:
        case ExprKind::Sub:
            ++c.addsub;
            break;
        case ExprKind::Mul:
        case ExprKind::Div:
            ++c.muldiv;
            break;
    }
    count_nodes(*e.left(), c);
    count_nodes(*e.right(), c);
}

}  // namespace

TreeStats tree_stats(const EquationSystem& system) {
    TreeStats stats;
    stats.equation_count = static_cast<int>(system.equations.size());
    stats.variable_count = static_cast<int>(system.variables.size());
    if (system.empty()) return stats;

    NodeCounts counts;
    long depth_sum = 0;
    for (const auto& eq : system.equations) {
        count_nodes(*eq.lhs, counts);
        count_nodes(*eq.rhs, counts);
        ++counts.total;  // the '=' root
        depth_sum += 1 + std::max(eq.lhs->depth(), eq.rhs->depth());
    }
    stats.constant_count = counts.constants;
    stats.addsub_count = counts.addsub;
    stats.muldiv_count = counts.muldiv;
    stats.leaf_nodes = counts.leaves;
    stats.total_nodes = counts.total;
    stats.avg_depth = static_cast<double>(depth_sum) / stats.equation_count;
    return stats;
}

}  // namespace edcim
