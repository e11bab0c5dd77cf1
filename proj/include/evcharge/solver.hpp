#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace evc {

// Deterministic convex-QP engine. Three problem shapes cover everything the
// simulator needs:
//   boxed_coupled - diagonal Hessian, box bounds, one <= coupling row with
//                   nonnegative coefficients; solved exactly by bisection on
//                   the coupling multiplier.
//   simplex       - diagonal-plus-rank-one PSD Hessian over the probability
//                   simplex; projected gradient with exact Euclidean
//                   projection, fixed step 1/L.
//   general       - diagonal PSD Hessian (ridge added to zeros), box bounds,
//                   sparse <= / = rows; primal-dual first-order iteration.

enum class QpVariant { boxed_coupled, simplex, general };
enum class QpStatus { optimal, max_iter, infeasible };

struct LinearConstraint {
    enum class Rel { le, eq };
    std::vector<std::pair<int, double>> terms; // (variable index, coefficient)
    Rel rel = Rel::le;
    double rhs = 0.0;
};

struct QpProblem {
    QpVariant variant = QpVariant::general;
    std::vector<double> hessian_diag; // H = diag(hessian_diag) + rank1*rank1^T
    std::vector<double> linear;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> rank1; // empty when absent
    std::vector<LinearConstraint> constraints;

    std::size_t size() const { return linear.size(); }
    void check() const; // throws std::invalid_argument on malformed input
    double objective(const std::vector<double>& x) const;
    std::string debug_dump() const; // JSON for failure triage
};

struct QpSolution {
    std::vector<double> x;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    QpStatus status = QpStatus::optimal;
};

QpSolution solve_boxed_coupled(const QpProblem& p);
QpSolution solve_simplex(const QpProblem& p);
QpSolution solve_general(const QpProblem& p);

// Exact Euclidean projection onto {w >= 0, sum w = 1}; exposed for tests.
std::vector<double> project_simplex(const std::vector<double>& v);

} // namespace evc
