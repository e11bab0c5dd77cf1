#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "evcharge/rng.hpp"
#include "evcharge/solver.hpp"

#include "solver_oracles.hpp"

using namespace evc;

using test_oracle::make_simplex_problem;

// ---------------------------------------------------------------------------
// boxed_coupled
// ---------------------------------------------------------------------------

TEST_CASE("boxed_coupled: unconstrained minimum inside the box") {
    QpProblem p;
    p.variant = QpVariant::boxed_coupled;
    p.hessian_diag = {2.0};
    p.linear = {-4.0};
    p.lower = {0.0};
    p.upper = {10.0};
    const QpSolution s = solve_boxed_coupled(p);
    CHECK(s.status == QpStatus::optimal);
    CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(s.kkt_residual <= 1e-8);
}

TEST_CASE("boxed_coupled: symmetric split on a binding coupling") {
    QpProblem p;
    p.variant = QpVariant::boxed_coupled;
    p.hessian_diag = {2.0, 2.0};
    p.linear = {-4.0, -4.0};
    p.lower = {0.0, 0.0};
    p.upper = {10.0, 10.0};
    LinearConstraint c;
    c.rel = LinearConstraint::Rel::le;
    c.rhs = 2.0;
    c.terms = {{0, 1.0}, {1, 1.0}};
    p.constraints.push_back(c);
    const QpSolution s = solve_boxed_coupled(p);
    CHECK(s.status == QpStatus::optimal);
    CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.x[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("boxed_coupled: box below the coupling is infeasible") {
    QpProblem p;
    p.variant = QpVariant::boxed_coupled;
    p.hessian_diag = {1.0, 1.0};
    p.linear = {0.0, 0.0};
    p.lower = {2.0, 2.0};
    p.upper = {5.0, 5.0};
    LinearConstraint c;
    c.rel = LinearConstraint::Rel::le;
    c.rhs = 3.0;
    c.terms = {{0, 1.0}, {1, 1.0}};
    p.constraints.push_back(c);
    CHECK(solve_boxed_coupled(p).status == QpStatus::infeasible);
}

TEST_CASE("boxed_coupled matches the grid oracle on random instances") {
    Rng rng(101);
    for (int inst = 0; inst < 40; ++inst) {
        const std::size_t n = 5;
        QpProblem p;
        p.variant = QpVariant::boxed_coupled;
        LinearConstraint c;
        c.rel = LinearConstraint::Rel::le;
        double unc_activation = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double h = rng.uniform(0.5, 3.0);
            const double lin = rng.uniform(-3.0, 3.0);
            const double lo = rng.uniform(-2.0, 0.5);
            const double hi = lo + rng.uniform(0.5, 3.0);
            const double a = rng.uniform(0.5, 2.0);
            p.hessian_diag.push_back(h);
            p.linear.push_back(lin);
            p.lower.push_back(lo);
            p.upper.push_back(hi);
            c.terms.push_back({static_cast<int>(j), a});
            unc_activation += a * std::clamp(-lin / h, lo, hi);
        }
        double lo_activation = 0.0;
        for (std::size_t j = 0; j < n; ++j) lo_activation += c.terms[j].second * p.lower[j];
        c.rhs = lo_activation + rng.uniform(0.1, 1.2) *
                                    std::max(0.1, unc_activation - lo_activation);
        p.constraints.push_back(c);

        const QpSolution s = solve_boxed_coupled(p);
        REQUIRE(s.status == QpStatus::optimal);
        const std::vector<double> ox = test_oracle::boxed_coupled(p);
        for (std::size_t j = 0; j < n; ++j)
            CHECK(std::abs(s.x[j] - ox[j]) <= 1e-3);
        CHECK(s.objective <= p.objective(ox) + 1e-6 * (1.0 + std::abs(p.objective(ox))));
    }
}

// ---------------------------------------------------------------------------
// simplex
// ---------------------------------------------------------------------------

TEST_CASE("simplex: pure linear objective selects the cheapest vertex") {
    const QpProblem p = make_simplex_problem({}, {3.0, 1.0, 2.0});
    const QpSolution s = solve_simplex(p);
    CHECK(s.x[0] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(s.x[1] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.x[2] == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("simplex: attainable quadratic minimum lands on the matching vertex") {
    // (w.g)^2 with g = d - f and f = d_1, i.e. g = {0, 1, 2}.
    const double s2 = std::sqrt(2.0);
    const QpProblem p = make_simplex_problem({0.0, s2, 2.0 * s2}, {0.0, 0.0, 0.0});
    const QpSolution s = solve_simplex(p);
    CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("simplex solutions stay on the simplex") {
    Rng rng(102);
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t k = 2 + rng.uniform_int(4);
        std::vector<double> r1(k), lin(k);
        for (std::size_t j = 0; j < k; ++j) {
            r1[j] = rng.uniform(0.0, 6.0);
            lin[j] = rng.uniform(0.0, 30.0) + rng.uniform(0.0, 200.0) * std::exp(-r1[j]);
        }
        const QpSolution s = solve_simplex(make_simplex_problem(r1, lin));
        double sum = 0.0;
        for (double w : s.x) {
            CHECK(w >= -1e-12);
            sum += w;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("simplex matches the grid oracle on rank-1 + exponential instances") {
    Rng rng(103);
    for (int inst = 0; inst < 30; ++inst) {
        const std::size_t k = 3 + rng.uniform_int(2); // 3 or 4
        const double f_gap = rng.uniform(0.0, 3.0);
        const double b = rng.uniform(0.0, 20.0);
        const double weight = rng.uniform(0.0, 120.0);
        std::vector<double> r1(k), lin(k);
        for (std::size_t j = 0; j < k; ++j) {
            const double gap = f_gap + static_cast<double>(j);
            r1[j] = std::sqrt(2.0) * gap;
            lin[j] = 2.0 * b * gap + weight * std::exp(-gap);
        }
        const QpProblem p = make_simplex_problem(r1, lin);
        const QpSolution s = solve_simplex(p);
        const double oracle = test_oracle::simplex_objective(p, 100); // 0.01 grid
        CHECK(s.objective <= oracle + 1e-6 * (1.0 + std::abs(oracle)));
    }
}

// ---------------------------------------------------------------------------
// general
// ---------------------------------------------------------------------------

TEST_CASE("general: single variable pinned by an equality") {
    QpProblem p;
    p.variant = QpVariant::general;
    p.hessian_diag = {0.0};
    p.linear = {1.0};
    p.lower = {0.0};
    p.upper = {10.0};
    LinearConstraint c;
    c.rel = LinearConstraint::Rel::eq;
    c.rhs = 3.0;
    c.terms = {{0, 1.0}};
    p.constraints.push_back(c);
    const QpSolution s = solve_general(p);
    CHECK(s.status != QpStatus::infeasible);
    CHECK(s.x[0] == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("general: two-slot cheapest-price charging puts energy in the cheap slot") {
    // One EV, demand 2 kWh battery-side at eps 1, rate cap 1.5 per slot,
    // prices 1 and 5: the greedy exchange argument fills slot 0 to its cap.
    QpProblem p;
    p.variant = QpVariant::general;
    p.hessian_diag = {0.0, 0.0};
    p.linear = {1.0, 5.0};
    p.lower = {0.0, 0.0};
    p.upper = {1.5, 1.5};
    LinearConstraint c;
    c.rel = LinearConstraint::Rel::eq;
    c.rhs = 2.0;
    c.terms = {{0, 1.0}, {1, 1.0}};
    p.constraints.push_back(c);
    const QpSolution s = solve_general(p);
    CHECK(s.status != QpStatus::infeasible);
    CHECK(s.x[0] == doctest::Approx(1.5).epsilon(1e-4));
    CHECK(s.x[1] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("general: equality beyond the box reports infeasible") {
    QpProblem p;
    p.variant = QpVariant::general;
    p.hessian_diag = {0.0};
    p.linear = {0.0};
    p.lower = {0.0};
    p.upper = {1.0};
    LinearConstraint c;
    c.rel = LinearConstraint::Rel::eq;
    c.rhs = 3.0;
    c.terms = {{0, 1.0}};
    p.constraints.push_back(c);
    CHECK(solve_general(p).status == QpStatus::infeasible);
}

// ---------------------------------------------------------------------------
// cross-cutting
// ---------------------------------------------------------------------------

TEST_CASE("identical problems solve to identical bytes") {
    Rng rng(104);
    QpProblem p;
    p.variant = QpVariant::boxed_coupled;
    LinearConstraint c;
    c.rel = LinearConstraint::Rel::le;
    c.rhs = 2.5;
    for (int j = 0; j < 5; ++j) {
        p.hessian_diag.push_back(rng.uniform(0.5, 2.0));
        p.linear.push_back(rng.uniform(-2.0, 2.0));
        p.lower.push_back(0.0);
        p.upper.push_back(rng.uniform(1.0, 3.0));
        c.terms.push_back({j, 1.0});
    }
    p.constraints.push_back(c);
    const QpSolution a = solve_boxed_coupled(p);
    const QpSolution b = solve_boxed_coupled(p);
    REQUIRE(a.x.size() == b.x.size());
    CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
    CHECK(a.objective == b.objective);

    const QpProblem sp = make_simplex_problem({0.3, 1.0, 2.2}, {0.4, 0.1, 7.0});
    const QpSolution sa = solve_simplex(sp);
    const QpSolution sb = solve_simplex(sp);
    CHECK(std::memcmp(sa.x.data(), sb.x.data(), sa.x.size() * sizeof(double)) == 0);
}

TEST_CASE("kkt residuals are reported small at optimal") {
    QpProblem p;
    p.variant = QpVariant::boxed_coupled;
    p.hessian_diag = {1.0, 2.0, 3.0};
    p.linear = {-1.0, -2.0, -3.0};
    p.lower = {0.0, 0.0, 0.0};
    p.upper = {5.0, 5.0, 5.0};
    LinearConstraint c;
    c.rel = LinearConstraint::Rel::le;
    c.rhs = 1.2;
    c.terms = {{0, 1.0}, {1, 1.0}, {2, 1.0}};
    p.constraints.push_back(c);
    const QpSolution s = solve_boxed_coupled(p);
    CHECK(s.status == QpStatus::optimal);
    CHECK(s.kkt_residual <= 1e-8);
}
