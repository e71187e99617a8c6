#include "edcim/solver.hpp"

#include "edcim/canonical.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace edcim {

const char* solve_tag_name(SolveOutcome::Tag tag) {
    switch (tag) {
        case SolveOutcome::Tag::Unique: return "unique";
        case SolveOutcome::Tag::Underdetermined: return "underdetermined";
        case SolveOutcome::Tag::Inconsistent: return "inconsistent";
        case SolveOutcome::Tag::IllFormed: return "ill_formed";
    }
    return "ill_formed";
}

namespace {

using Assignment = std::map<std::string, Rational>;

struct LinearForm {
    std::map<std::string, Rational> coeffs;
    Rational constant;
};

enum class LinStatus { Affine, NonAffine, ZeroDivision };

LinStatus linearize(const Expr& e, const Assignment& subst, LinearForm& out) {
    switch (e.kind()) {
        case ExprKind::Constant:
            out.constant = e.value();
            return LinStatus::Affine;
        case ExprKind::Variable: {
            auto it = subst.find(e.name());
            if (it != subst.end()) {
                out.constant = it->second;
            } else {
                out.coeffs[e.name()] = 1;
            }
            return LinStatus::Affine;
        }
        case ExprKind::Neg: {
            LinStatus st = linearize(*e.left(), subst, out);
            if (st != LinStatus::Affine) return st;
            for (auto& [name, c] : out.coeffs) c = -c;
            out.constant = -out.constant;
            return LinStatus::Affine;
        }
        case ExprKind::Add:
        case ExprKind::Sub: {
            LinearForm lhs, rhs;
            LinStatus st = linearize(*e.left(), subst, lhs);
            if (st != LinStatus::Affine) return st;
            st = linearize(*e.right(), subst, rhs);
            if (st != LinStatus::Affine) return st;
            bool add = e.kind() == ExprKind::Add;
            out = std::move(lhs);
            for (auto& [name, c] : rhs.coeffs) {
                auto& slot = out.coeffs[name];
                slot += add ? c : -c;
                if (slot == 0) out.coeffs.erase(name);
            }
            out.constant += add ? rhs.constant : -rhs.constant;
            return LinStatus::Affine;
        }
        case ExprKind::Mul: {
            LinearForm lhs, rhs;
            LinStatus st = linearize(*e.left(), subst, lhs);
            if (st != LinStatus::Affine) return st;
            st = linearize(*e.right(), subst, rhs);
            if (st != LinStatus::Affine) return st;
            if (!lhs.coeffs.empty() && !rhs.coeffs.empty()) return LinStatus::NonAffine;
            const LinearForm& scalar = lhs.coeffs.empty() ? lhs : rhs;
            const LinearForm& linear = lhs.coeffs.empty() ? rhs : lhs;
            out.constant = linear.constant * scalar.constant;
            for (const auto& [name, c] : linear.coeffs) {
                if (scalar.constant != 0) out.coeffs[name] = c * scalar.constant;
            }
            return LinStatus::Affine;
        }
        case ExprKind::Div: {
            LinearForm den;
            LinStatus st = linearize(*e.right(), subst, den);
            if (st == LinStatus::ZeroDivision) return st;
            if (st == LinStatus::NonAffine || !den.coeffs.empty()) return LinStatus::NonAffine;
            if (den.constant == 0) return LinStatus::ZeroDivision;
            LinearForm num;
            st = linearize(*e.left(), subst, num);
            if (st != LinStatus::Affine) return st;
            out.constant = num.constant / den.constant;
            for (const auto& [name, c] : num.coeffs) out.coeffs[name] = c / den.constant;
            return LinStatus::Affine;
        }
    }
    return LinStatus::NonAffine;
}

// Reduced row echelon form over exact rationals.
struct Elimination {
    int rank = 0;
    bool consistent = true;
    std::set<std::string> free_variables;
    Assignment determined;  // pivot rows without free-column contributions
};

Elimination eliminate(std::vector<LinearForm> rows, const std::vector<std::string>& vars) {
    const int n = static_cast<int>(vars.size());
    const int m = static_cast<int>(rows.size());
    // Dense augmented matrix [A | b] with b = -constant (form == 0).
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(n + 1));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            auto it = rows[i].coeffs.find(vars[j]);
            if (it != rows[i].coeffs.end()) a[i][j] = it->second;
        }
        a[i][n] = -rows[i].constant;
    }

    std::vector<int> pivot_col;
    int r = 0;
    for (int c = 0; c < n && r < m; ++c) {
        int pivot = -1;
        for (int i = r; i < m; ++i) {
            if (a[i][c] != 0) {
                pivot = i;
                break;
            }
        }
        if (pivot < 0) continue;
        std::swap(a[r], a[pivot]);
        Rational inv = a[r][c];
        for (int j = c; j <= n; ++j) a[r][j] /= inv;
        for (int i = 0; i < m; ++i) {
            if (i == r || a[i][c] == 0) continue;
            Rational f = a[i][c];
            for (int j = c; j <= n; ++j) a[i][j] -= f * a[r][j];
        }
        pivot_col.push_back(c);
        ++r;
    }

    Elimination out;
    out.rank = r;
    for (int i = r; i < m; ++i) {
        if (a[i][n] != 0) {
            out.consistent = false;
            return out;
        }
    }
    std::vector<bool> is_pivot(n, false);
    for (int c : pivot_col) is_pivot[c] = true;
    for (int c = 0; c < n; ++c) {
        if (!is_pivot[c]) out.free_variables.insert(vars[c]);
    }
    for (int i = 0; i < r; ++i) {
        bool clean = true;
        for (int c = 0; c < n && clean; ++c) {
            if (!is_pivot[c] && a[i][c] != 0) clean = false;
        }
        if (clean) out.determined[vars[pivot_col[i]]] = a[i][n];
    }
    return out;
}

std::optional<double> eval_double(const Expr& e, const std::map<std::string, double>& values) {
    switch (e.kind()) {
        case ExprKind::Constant:
            return to_double(e.value());
        case ExprKind::Variable: {
            auto it = values.find(e.name());
            if (it == values.end()) return std::nullopt;
            return it->second;
        }
        case ExprKind::Neg: {
            auto v = eval_double(*e.left(), values);
            if (!v) return std::nullopt;
            return -*v;
        }
        default: {
            auto l = eval_double(*e.left(), values);
            auto r = eval_double(*e.right(), values);
            if (!l || !r) return std::nullopt;
            switch (e.kind()) {
                case ExprKind::Add: return *l + *r;
                case ExprKind::Sub: return *l - *r;
                case ExprKind::Mul: return *l * *r;
                case ExprKind::Div:
                    if (*r == 0.0) return std::nullopt;
                    return *l / *r;
                default: return std::nullopt;
            }
        }
    }
}

// Forward-mode value + gradient for the Newton fallback.
struct Dual {
    double value = 0.0;
    Eigen::VectorXd grad;
};

Dual eval_dual(const Expr& e, const std::map<std::string, int>& index,
               const Eigen::VectorXd& x, const Assignment& fixed) {
    const auto n = x.size();
    switch (e.kind()) {
        case ExprKind::Constant:
            return {to_double(e.value()), Eigen::VectorXd::Zero(n)};
        case ExprKind::Variable: {
            auto it = index.find(e.name());
            if (it == index.end()) {
                auto fit = fixed.find(e.name());
                double v = fit == fixed.end() ? 0.0 : to_double(fit->second);
                return {v, Eigen::VectorXd::Zero(n)};
            }
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
            g[it->second] = 1.0;
            return {x[it->second], std::move(g)};
        }
        case ExprKind::Neg: {
            Dual c = eval_dual(*e.left(), index, x, fixed);
            return {-c.value, -c.grad};
        }
        default: {
            Dual l = eval_dual(*e.left(), index, x, fixed);
            Dual r = eval_dual(*e.right(), index, x, fixed);
            switch (e.kind()) {
                case ExprKind::Add: return {l.value + r.value, l.grad + r.grad};
                case ExprKind::Sub: return {l.value - r.value, l.grad - r.grad};
                case ExprKind::Mul:
                    return {l.value * r.value, l.value * r.grad + r.value * l.grad};
                case ExprKind::Div: {
                    double v = l.value / r.value;
                    Eigen::VectorXd g = (l.grad - v * r.grad) / r.value;
                    return {v, std::move(g)};
                }
                default: return {0.0, Eigen::VectorXd::Zero(n)};
            }
        }
    }
}

constexpr double kNewtonTol = 1e-9;
constexpr int kNewtonRestarts = 8;
constexpr int kNewtonIterations = 60;
constexpr unsigned kNewtonSeed = 0x5eedu;

SolveOutcome newton_fallback(const EquationSystem& system,
                             const std::vector<std::string>& vars, const Assignment& fixed) {
    const int n = static_cast<int>(vars.size());
    const int m = static_cast<int>(system.equations.size());
    std::map<std::string, int> index;
    for (int i = 0; i < n; ++i) index[vars[i]] = i;

    auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& f,
                        Eigen::MatrixXd* jac) -> bool {
        f.resize(m);
        if (jac) jac->resize(m, n);
        for (int i = 0; i < m; ++i) {
            Dual l = eval_dual(*system.equations[i].lhs, index, x, fixed);
            Dual r = eval_dual(*system.equations[i].rhs, index, x, fixed);
            f[i] = l.value - r.value;
            if (!std::isfinite(f[i])) return false;
            if (jac) {
                Eigen::VectorXd row = l.grad - r.grad;
                if (!row.allFinite()) return false;
                jac->row(i) = row;
            }
        }
        return true;
    };

    std::mt19937 rng(kNewtonSeed);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    for (int attempt = 0; attempt <= kNewtonRestarts; ++attempt) {
        Eigen::VectorXd x(n);
        if (attempt == 0) {
            x.setOnes();
        } else {
            for (int i = 0; i < n; ++i) x[i] = dist(rng);
        }
        Eigen::VectorXd f;
        Eigen::MatrixXd jac;
        for (int iter = 0; iter < kNewtonIterations; ++iter) {
            if (!residual(x, f, &jac)) break;
            if (f.lpNorm<Eigen::Infinity>() < kNewtonTol) {
                SolveOutcome out;
                out.tag = SolveOutcome::Tag::Unique;
                out.assignment = fixed;
                for (int i = 0; i < n; ++i) {
                    out.assignment[vars[i]] = rational_from_double(x[i]);
                }
                out.rank = static_cast<int>(out.assignment.size());
                return out;
            }
            Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-f);
            if (!step.allFinite()) break;
            double base = f.norm();
            double lambda = 1.0;
            bool accepted = false;
            while (lambda > 1.0 / 1024.0) {
                Eigen::VectorXd candidate = x + lambda * step;
                Eigen::VectorXd fc;
                if (residual(candidate, fc, nullptr) && fc.norm() < base) {
                    x = candidate;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!accepted) break;
        }
        if (residual(x, f, nullptr) && f.lpNorm<Eigen::Infinity>() < kNewtonTol) {
            SolveOutcome out;
            out.tag = SolveOutcome::Tag::Unique;
            out.assignment = fixed;
            for (int i = 0; i < n; ++i) out.assignment[vars[i]] = rational_from_double(x[i]);
            out.rank = static_cast<int>(out.assignment.size());
            return out;
        }
    }
    SolveOutcome out;
    out.tag = SolveOutcome::Tag::Inconsistent;
    return out;
}

}  // namespace

SolveOutcome solve(const EquationSystem& input) {
    SolveOutcome out;
    if (static_cast<int>(input.variables.size()) > kMaxSolveVariables) {
        out.reason = "too many variables";
        return out;
    }
    if (static_cast<int>(input.equations.size()) > kMaxSolveEquations) {
        out.reason = "too many equations";
        return out;
    }

    // Canonical ordering first so canonically equal systems take identical
    // paths (matters for the Newton fallback).
    EquationSystem system = canonicalize(input);

    Assignment substitution;
    while (true) {
        std::vector<std::string> remaining;
        for (const auto& v : system.variables) {
            if (!substitution.count(v)) remaining.push_back(v);
        }

        std::vector<LinearForm> affine;
        int nonaffine = 0;
        for (const auto& eq : system.equations) {
            LinearForm lhs, rhs;
            LinStatus st = linearize(*eq.lhs, substitution, lhs);
            if (st == LinStatus::Affine) st = linearize(*eq.rhs, substitution, rhs);
            if (st == LinStatus::ZeroDivision) {
                out.reason = "division by zero";
                return out;
            }
            if (st == LinStatus::NonAffine) {
                ++nonaffine;
                continue;
            }
            LinearForm diff = std::move(lhs);
            for (auto& [name, c] : rhs.coeffs) {
                auto& slot = diff.coeffs[name];
                slot -= c;
                if (slot == 0) diff.coeffs.erase(name);
            }
            diff.constant -= rhs.constant;
            affine.push_back(std::move(diff));
        }

        Elimination elim = eliminate(std::move(affine), remaining);
        if (!elim.consistent) {
            out.tag = SolveOutcome::Tag::Inconsistent;
            return out;
        }

        if (nonaffine == 0) {
            int determined_before = static_cast<int>(substitution.size());
            if (elim.rank == static_cast<int>(remaining.size())) {
                out.tag = SolveOutcome::Tag::Unique;
                out.assignment = substitution;
                for (auto& [name, value] : elim.determined) out.assignment[name] = value;
                out.rank = determined_before + elim.rank;
                return out;
            }
            out.tag = SolveOutcome::Tag::Underdetermined;
            out.assignment = substitution;
            for (auto& [name, value] : elim.determined) out.assignment[name] = value;
            out.rank = determined_before + elim.rank;
            out.free_variables = std::move(elim.free_variables);
            return out;
        }

        bool progress = false;
        for (auto& [name, value] : elim.determined) {
            if (substitution.emplace(name, value).second) progress = true;
        }
        if (!progress) {
            std::vector<std::string> remaining_now;
            for (const auto& v : system.variables) {
                if (!substitution.count(v)) remaining_now.push_back(v);
            }
            return newton_fallback(system, remaining_now, substitution);
        }
    }
}

bool check_solution(const EquationSystem& system,
                    const std::map<std::string, Rational>& assignment, double tol) {
    std::map<std::string, double> values;
    for (const auto& [name, value] : assignment) values[name] = to_double(value);
    for (const auto& eq : system.equations) {
        std::set<std::string> vars = eq.variables();
        bool covered = true;
        for (const auto& v : vars) {
            if (!assignment.count(v)) {
                covered = false;
                break;
            }
        }
        if (!covered) continue;
        if (tol == 0.0) {
            // Exact path for exact assignments.
            LinearForm lhs, rhs;
            LinStatus st = linearize(*eq.lhs, assignment, lhs);
            if (st == LinStatus::Affine) st = linearize(*eq.rhs, assignment, rhs);
            if (st != LinStatus::Affine) return false;
            if (!lhs.coeffs.empty() || !rhs.coeffs.empty()) return false;
            if (lhs.constant != rhs.constant) return false;
            continue;
        }
        auto l = eval_double(*eq.lhs, values);
        auto r = eval_double(*eq.rhs, values);
        if (!l || !r) return false;
        if (std::abs(*l - *r) > tol) return false;
    }
    return true;
}

bool is_solvable(const EquationSystem& system) { return solve(system).solvable(); }

}  // namespace edcim
