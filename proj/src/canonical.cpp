#include "edcim/canonical.hpp"

#include <algorithm>
#include <vector>

namespace edcim {

namespace {

// Rendering precedence. A fractional constant prints as "n/d" and therefore
// binds like a division when parenthesization is decided.
int precedence(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Add:
        case ExprKind::Sub:
            return 1;
        case ExprKind::Mul:
        case ExprKind::Div:
            return 2;
        case ExprKind::Neg:
            return 3;
        case ExprKind::Constant:
            return denominator(e.value()) == 1 ? 4 : 2;
        case ExprKind::Variable:
            return 4;
    }
    return 4;
}

void render_into(const Expr& e, std::string& out);

void render_child(const Expr& child, int parent_prec, bool right_side, std::string& out) {
    int child_prec = precedence(child);
    bool parens = right_side ? child_prec <= parent_prec : child_prec < parent_prec;
    if (parens) out.push_back('(');
    render_into(child, out);
    if (parens) out.push_back(')');
}

void render_into(const Expr& e, std::string& out) {
    switch (e.kind()) {
        case ExprKind::Constant:
            out += to_string(e.value());
            return;
        case ExprKind::Variable:
            out += e.name();
            return;
        case ExprKind::Neg:
            out.push_back('-');
            render_child(*e.left(), precedence(e), false, out);
            return;
        default:
            break;
    }
    const char* op = "";
    switch (e.kind()) {
        case ExprKind::Add: op = " + "; break;
        case ExprKind::Sub: op = " - "; break;
        case ExprKind::Mul: op = " * "; break;
        case ExprKind::Div: op = " / "; break;
        default: break;
    }
    int prec = precedence(e);
    render_child(*e.left(), prec, false, out);
    out += op;
    render_child(*e.right(), prec, true, out);
}

ExprPtr fold(ExprKind kind, ExprPtr l, ExprPtr r) {
    if (l->is_constant() && (kind == ExprKind::Neg || r->is_constant())) {
        switch (kind) {
            case ExprKind::Add: return Expr::constant(l->value() + r->value());
            case ExprKind::Sub: return Expr::constant(l->value() - r->value());
            case ExprKind::Mul: return Expr::constant(l->value() * r->value());
            case ExprKind::Div:
                if (r->value() != 0) return Expr::constant(l->value() / r->value());
                break;
            case ExprKind::Neg: return Expr::constant(-l->value());
            default: break;
        }
    }
    if (kind == ExprKind::Neg) return Expr::neg(std::move(l));
    return Expr::binary(kind, std::move(l), std::move(r));
}

void flatten(const ExprPtr& e, ExprKind kind, std::vector<ExprPtr>& out) {
    if (e->kind() == kind) {
        flatten(e->left(), kind, out);
        flatten(e->right(), kind, out);
    } else {
        out.push_back(e);
    }
}

}  // namespace

ExprPtr canonicalize(const ExprPtr& expr) {
    switch (expr->kind()) {
        case ExprKind::Constant:
        case ExprKind::Variable:
            return expr;
        case ExprKind::Neg:
            return fold(ExprKind::Neg, canonicalize(expr->left()), nullptr);
        case ExprKind::Sub:
        case ExprKind::Div:
            return fold(expr->kind(), canonicalize(expr->left()), canonicalize(expr->right()));
        case ExprKind::Add:
        case ExprKind::Mul: {
            std::vector<ExprPtr> operands;
            flatten(expr, expr->kind(), operands);
            for (auto& op : operands) op = canonicalize(op);
            std::vector<std::pair<std::string, ExprPtr>> keyed;
            keyed.reserve(operands.size());
            for (auto& op : operands) keyed.emplace_back(render(*op), op);
            std::stable_sort(keyed.begin(), keyed.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            ExprPtr node = keyed.front().second;
            for (size_t i = 1; i < keyed.size(); ++i) {
                node = fold(expr->kind(), std::move(node), keyed[i].second);
            }
            return node;
        }
    }
    return expr;
}

Equation canonicalize(const Equation& eq) {
    return Equation{canonicalize(eq.lhs), canonicalize(eq.rhs)};
}

EquationSystem canonicalize(const EquationSystem& system) {
    std::vector<std::pair<std::string, Equation>> keyed;
    keyed.reserve(system.equations.size());
    for (const auto& eq : system.equations) {
        Equation canon = canonicalize(eq);
        keyed.emplace_back(render(canon), std::move(canon));
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Equation> sorted;
    sorted.reserve(keyed.size());
    for (auto& [key, eq] : keyed) sorted.push_back(std::move(eq));
    return EquationSystem::from_equations(std::move(sorted));
}

std::string render(const Expr& expr) {
    std::string out;
    render_into(expr, out);
    return out;
}

std::string render(const Equation& eq) {
    std::string out;
    render_into(*eq.lhs, out);
    out += " = ";
    render_into(*eq.rhs, out);
    return out;
}

std::string render_canonical(const EquationSystem& system) {
    EquationSystem canon = canonicalize(system);
    std::string out;
    for (size_t i = 0; i < canon.equations.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += render(canon.equations[i]);
    }
    return out;
}

bool canonical_equal(const EquationSystem& a, const EquationSystem& b) {
    return render_canonical(a) == render_canonical(b);
}

}  // namespace edcim
