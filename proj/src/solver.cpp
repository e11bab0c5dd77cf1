#include "evcharge/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace evc {

namespace {

constexpr double kSpecializedTol = 1e-8; // boxed_coupled / simplex
constexpr double kGeneralTol = 1e-6;     // general primal-dual
constexpr double kRidge = 1e-6;          // added to zero curvature in general
constexpr int kSimplexMaxIter = 10000;
constexpr int kGeneralMaxIter = 400000;

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Multiplicity of the coupling row for boxed_coupled problems: zero rows is
// allowed (plain box QP), more than one is a usage error.
const LinearConstraint* single_coupling(const QpProblem& p) {
    if (p.constraints.empty()) return nullptr;
    if (p.constraints.size() > 1)
        throw std::invalid_argument("boxed_coupled expects at most one coupling row");
    const auto& c = p.constraints.front();
    if (c.rel != LinearConstraint::Rel::le)
        throw std::invalid_argument("boxed_coupled coupling row must be <=");
    for (const auto& [idx, coef] : c.terms)
        if (coef < 0.0) throw std::invalid_argument("boxed_coupled coupling coefficients must be >= 0");
    return &c;
}

} // namespace

void QpProblem::check() const {
    const std::size_t n = size();
    if (hessian_diag.size() != n || lower.size() != n || upper.size() != n)
        throw std::invalid_argument("qp: dimension mismatch");
    if (!rank1.empty() && rank1.size() != n)
        throw std::invalid_argument("qp: rank1 dimension mismatch");
    for (std::size_t j = 0; j < n; ++j) {
        if (hessian_diag[j] < 0.0) throw std::invalid_argument("qp: negative hessian diagonal");
        if (lower[j] > upper[j]) throw std::invalid_argument("qp: lower bound above upper bound");
    }
    for (const auto& c : constraints)
        for (const auto& [idx, coef] : c.terms) {
            (void)coef;
            if (idx < 0 || static_cast<std::size_t>(idx) >= n)
                throw std::invalid_argument("qp: constraint index out of range");
        }
    if (variant == QpVariant::boxed_coupled) {
        for (double h : hessian_diag)
            if (!(h > 0.0)) throw std::invalid_argument("boxed_coupled needs a positive diagonal");
    }
    if (variant == QpVariant::simplex) {
        if (n == 0) throw std::invalid_argument("simplex problem is empty");
        for (double lo : lower)
            if (lo != 0.0) throw std::invalid_argument("simplex variant requires lower bounds of 0");
        if (constraints.size() != 1 || constraints[0].rel != LinearConstraint::Rel::eq ||
            constraints[0].rhs != 1.0)
            throw std::invalid_argument("simplex variant requires one sum-to-one equality");
    }
}

double QpProblem::objective(const std::vector<double>& x) const {
    double obj = 0.0;
    double rdot = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        obj += 0.5 * hessian_diag[j] * x[j] * x[j] + linear[j] * x[j];
        if (!rank1.empty()) rdot += rank1[j] * x[j];
    }
    return obj + 0.5 * rdot * rdot;
}

std::string QpProblem::debug_dump() const {
    nlohmann::json j;
    j["variant"] = variant == QpVariant::boxed_coupled ? "boxed_coupled"
                   : variant == QpVariant::simplex     ? "simplex"
                                                       : "general";
    j["hessian_diag"] = hessian_diag;
    j["linear"] = linear;
    j["lower"] = lower;
    j["upper"] = upper;
    if (!rank1.empty()) j["rank1"] = rank1;
    auto& rows = j["constraints"] = nlohmann::json::array();
    for (const auto& c : constraints) {
        nlohmann::json row;
        row["rel"] = c.rel == LinearConstraint::Rel::le ? "<=" : "=";
        row["rhs"] = c.rhs;
        for (const auto& [idx, coef] : c.terms) row["terms"].push_back({idx, coef});
        rows.push_back(row);
    }
    return j.dump();
}

// ---------------------------------------------------------------------------
// boxed_coupled: exact minimizer by bisection on the coupling multiplier.
// Each coordinate solves clip((-c_j - mu*a_j)/h_j, lo_j, hi_j); the coupling
// activation g(mu) = sum a_j x_j(mu) - rhs is continuous and non-increasing,
// so the complementary-slackness multiplier is the unique root (or zero).
// ---------------------------------------------------------------------------

QpSolution solve_boxed_coupled(const QpProblem& p) {
    p.check();
    if (p.variant != QpVariant::boxed_coupled)
        throw std::invalid_argument("solve_boxed_coupled: wrong variant");
    const std::size_t n = p.size();
    const LinearConstraint* coupling = single_coupling(p);

    std::vector<double> a(n, 0.0);
    double rhs = 0.0;
    if (coupling) {
        rhs = coupling->rhs;
        for (const auto& [idx, coef] : coupling->terms) a[idx] += coef;
    }

    auto x_of_mu = [&](double mu, std::vector<double>& x) {
        for (std::size_t j = 0; j < n; ++j)
            x[j] = clip((-p.linear[j] - mu * a[j]) / p.hessian_diag[j], p.lower[j], p.upper[j]);
    };
    auto activation = [&](const std::vector<double>& x) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += a[j] * x[j];
        return s;
    };

    QpSolution sol;
    sol.x.assign(n, 0.0);

    if (coupling) {
        // The tightest the coupling can get is with every coordinate at its
        // lower bound; beyond that the box and the row are inconsistent.
        double min_activation = 0.0;
        for (std::size_t j = 0; j < n; ++j) min_activation += a[j] * p.lower[j];
        if (min_activation > rhs + 1e-12 * (1.0 + std::abs(rhs))) {
            sol.status = QpStatus::infeasible;
            x_of_mu(0.0, sol.x);
            sol.objective = p.objective(sol.x);
            sol.kkt_residual = min_activation - rhs;
            return sol;
        }
    }

    double mu = 0.0;
    x_of_mu(0.0, sol.x);
    int iters = 1;

    if (coupling && activation(sol.x) > rhs + 1e-15 * (1.0 + std::abs(rhs))) {
        double lo = 0.0, hi = 1.0;
        std::vector<double> x(n);
        x_of_mu(hi, x);
        while (activation(x) > rhs) {
            lo = hi;
            hi *= 2.0;
            x_of_mu(hi, x);
            if (++iters > 2100) break; // activation -> min_activation <= rhs, so this terminates
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            x_of_mu(mid, x);
            if (activation(x) > rhs)
                lo = mid;
            else
                hi = mid;
            ++iters;
        }
        mu = hi;
        x_of_mu(mu, sol.x);

        // Polish: with the active set fixed, the multiplier that meets the
        // coupling with equality has a closed form over the free coordinates.
        double free_weight = 0.0, fixed_activation = 0.0, free_target = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const bool at_lo = sol.x[j] <= p.lower[j] + 1e-12 * (1.0 + std::abs(p.lower[j]));
            const bool at_hi = sol.x[j] >= p.upper[j] - 1e-12 * (1.0 + std::abs(p.upper[j]));
            if (at_lo || at_hi) {
                fixed_activation += a[j] * sol.x[j];
            } else {
                free_weight += a[j] * a[j] / p.hessian_diag[j];
                free_target += a[j] * (-p.linear[j]) / p.hessian_diag[j];
            }
        }
        if (free_weight > 0.0) {
            const double polished = (free_target + fixed_activation - rhs) / free_weight;
            if (polished >= 0.0) {
                mu = polished;
                x_of_mu(mu, sol.x);
            }
        }
    }

    sol.iterations = iters;
    sol.objective = p.objective(sol.x);

    // KKT residual: stationarity with box sign conditions, primal
    // feasibility, and complementary slackness.
    double resid = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double s = p.hessian_diag[j] * sol.x[j] + p.linear[j] + mu * a[j];
        const bool at_lo = sol.x[j] <= p.lower[j] + 1e-12 * (1.0 + std::abs(p.lower[j]));
        const bool at_hi = sol.x[j] >= p.upper[j] - 1e-12 * (1.0 + std::abs(p.upper[j]));
        double v;
        if (at_lo && at_hi)
            v = 0.0;
        else if (at_lo)
            v = std::max(0.0, -s);
        else if (at_hi)
            v = std::max(0.0, s);
        else
            v = std::abs(s);
        resid = std::max(resid, v);
    }
    if (coupling) {
        const double slack = rhs - activation(sol.x);
        resid = std::max(resid, std::max(0.0, -slack));
        resid = std::max(resid, std::abs(mu * slack) / (1.0 + std::abs(rhs)));
    }
    sol.kkt_residual = resid;
    sol.status = resid <= kSpecializedTol ? QpStatus::optimal : QpStatus::max_iter;
    return sol;
}

// ---------------------------------------------------------------------------
// simplex: projected gradient with the exact sort-based Euclidean projection.
// ---------------------------------------------------------------------------

std::vector<double> project_simplex(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        cum += u[j];
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = std::max(0.0, v[j] - theta);
    return w;
}

QpSolution solve_simplex(const QpProblem& p) {
    p.check();
    if (p.variant != QpVariant::simplex)
        throw std::invalid_argument("solve_simplex: wrong variant");
    const std::size_t n = p.size();

    double lip = 0.0;
    for (double h : p.hessian_diag) lip = std::max(lip, h);
    if (!p.rank1.empty()) {
        double rr = 0.0;
        for (double r : p.rank1) rr += r * r;
        lip += rr;
    }
    lip += 1.0;

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<double> grad(n), next(n);

    auto gradient = [&](const std::vector<double>& x) {
        double rdot = 0.0;
        if (!p.rank1.empty())
            for (std::size_t j = 0; j < n; ++j) rdot += p.rank1[j] * x[j];
        for (std::size_t j = 0; j < n; ++j) {
            grad[j] = p.hessian_diag[j] * x[j] + p.linear[j];
            if (!p.rank1.empty()) grad[j] += p.rank1[j] * rdot;
        }
    };

    QpSolution sol;
    double pg_norm = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < kSimplexMaxIter; ++it) {
        gradient(w);
        for (std::size_t j = 0; j < n; ++j) next[j] = w[j] - grad[j] / lip;
        next = project_simplex(next);
        double disp2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = next[j] - w[j];
            disp2 += d * d;
        }
        w = next;
        pg_norm = lip * std::sqrt(disp2);
        if (pg_norm <= kSpecializedTol) {
            ++it;
            break;
        }
    }

    sol.x = w;
    sol.iterations = it;
    sol.objective = p.objective(w);
    sol.kkt_residual = pg_norm;
    sol.status = pg_norm <= kSpecializedTol ? QpStatus::optimal : QpStatus::max_iter;
    return sol;
}

// ---------------------------------------------------------------------------
// general: primal-dual first-order iteration (proximal on the box + quadratic,
// multiplier ascent on the rows). A ridge keeps the primal step contractive
// on LP-shaped inputs.
// ---------------------------------------------------------------------------

QpSolution solve_general(const QpProblem& p) {
    p.check();
    if (p.variant != QpVariant::general)
        throw std::invalid_argument("solve_general: wrong variant");
    if (!p.rank1.empty())
        throw std::invalid_argument("solve_general: rank1 term not supported");
    const std::size_t n = p.size();
    const std::size_t m = p.constraints.size();

    std::vector<double> h(n);
    for (std::size_t j = 0; j < n; ++j) h[j] = p.hessian_diag[j] > 0.0 ? p.hessian_diag[j] : kRidge;

    // No rows: the box QP separates.
    if (m == 0) {
        QpSolution sol;
        sol.x.resize(n);
        for (std::size_t j = 0; j < n; ++j)
            sol.x[j] = clip(-p.linear[j] / h[j], p.lower[j], p.upper[j]);
        sol.objective = p.objective(sol.x);
        sol.iterations = 1;
        sol.kkt_residual = 0.0;
        return sol;
    }

    auto apply_A = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (const auto& [idx, coef] : p.constraints[i].terms) s += coef * x[idx];
            out[i] = s;
        }
    };
    auto apply_At = [&](const std::vector<double>& y, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (const auto& [idx, coef] : p.constraints[i].terms) out[idx] += coef * y[i];
    };

    // Operator norm of A by power iteration; deterministic start.
    double norm_a = 0.0;
    {
        std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
        std::vector<double> av(m), atv(n);
        for (int it = 0; it < 100; ++it) {
            apply_A(v, av);
            apply_At(av, atv);
            double nrm = 0.0;
            for (double t : atv) nrm += t * t;
            nrm = std::sqrt(nrm);
            if (nrm <= 1e-300) break;
            for (std::size_t j = 0; j < n; ++j) v[j] = atv[j] / nrm;
            norm_a = std::sqrt(nrm);
        }
        if (norm_a <= 1e-12) norm_a = 1.0;
    }
    const double tau = 0.9 / norm_a;
    const double sigma = 0.9 / norm_a;

    std::vector<double> x(n), y(m, 0.0), xbar(n), ax(m), aty(n), prev(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = clip(0.0, p.lower[j], p.upper[j]);
    xbar = x;

    double scale_b = 1.0;
    for (const auto& c : p.constraints) scale_b = std::max(scale_b, std::abs(c.rhs));

    auto primal_residual = [&](const std::vector<double>& xx) {
        apply_A(xx, ax);
        double r = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double gap = ax[i] - p.constraints[i].rhs;
            r = std::max(r, p.constraints[i].rel == LinearConstraint::Rel::le ? std::max(0.0, gap)
                                                                              : std::abs(gap));
        }
        return r;
    };

    QpSolution sol;
    int it = 0;
    double rp = std::numeric_limits<double>::infinity();
    double step_inf = std::numeric_limits<double>::infinity();
    for (; it < kGeneralMaxIter; ++it) {
        prev = x;
        apply_At(y, aty);
        for (std::size_t j = 0; j < n; ++j)
            x[j] = clip((x[j] - tau * (p.linear[j] + aty[j])) / (1.0 + tau * h[j]),
                        p.lower[j], p.upper[j]);
        for (std::size_t j = 0; j < n; ++j) xbar[j] = 2.0 * x[j] - prev[j];
        apply_A(xbar, ax);
        for (std::size_t i = 0; i < m; ++i) {
            double yi = y[i] + sigma * (ax[i] - p.constraints[i].rhs);
            if (p.constraints[i].rel == LinearConstraint::Rel::le) yi = std::max(0.0, yi);
            y[i] = yi;
        }
        if ((it + 1) % 100 == 0) {
            step_inf = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                step_inf = std::max(step_inf, std::abs(x[j] - prev[j]));
            rp = primal_residual(x);
            if (rp <= kGeneralTol * scale_b && step_inf <= 1e-10 * (1.0 + norm_a)) {
                ++it;
                break;
            }
        }
    }

    rp = primal_residual(x);
    // Stationarity and complementarity at the returned iterate.
    apply_At(y, aty);
    double stat = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double s = h[j] * x[j] + p.linear[j] + aty[j];
        const bool at_lo = x[j] <= p.lower[j] + 1e-10 * (1.0 + std::abs(p.lower[j]));
        const bool at_hi = x[j] >= p.upper[j] - 1e-10 * (1.0 + std::abs(p.upper[j]));
        double v;
        if (at_lo && at_hi)
            v = 0.0;
        else if (at_lo)
            v = std::max(0.0, -s);
        else if (at_hi)
            v = std::max(0.0, s);
        else
            v = std::abs(s);
        stat = std::max(stat, v);
    }
    apply_A(x, ax);
    double comp = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (p.constraints[i].rel == LinearConstraint::Rel::le)
            comp = std::max(comp, std::abs(y[i] * (p.constraints[i].rhs - ax[i])) / scale_b);

    sol.x = x;
    sol.iterations = it;
    sol.objective = p.objective(x);
    sol.kkt_residual = std::max({rp / scale_b, stat, comp});
    if (rp > kGeneralTol * scale_b)
        sol.status = QpStatus::infeasible;
    else if (sol.kkt_residual <= 1e-4)
        sol.status = QpStatus::optimal;
    else
        sol.status = QpStatus::max_iter;
    return sol;
}

} // namespace evc
