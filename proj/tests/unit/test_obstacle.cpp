#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "qvi/errors.hpp"
#include "qvi/obstacle.hpp"

using namespace qvi;

namespace {

DiscreteOperator laplace_1d(int m, double c = 0.0) {
    const std::string cs = std::to_string(c);
    return assemble_operator(Problem::standard(1, {"1"}, {"0"}, cs, c, "0"), testutil::unit_grid({m}));
}

// Tridiagonal solve of (-u'' + c u) = f on nodes lo..hi with given end values.
std::vector<double> thomas(int m, double c, const std::vector<double>& f, int lo, int hi, double left,
                           double right) {
    const double h = 1.0 / (m - 1);
    const double off = -1.0 / (h * h), diag = 2.0 / (h * h) + c;
    const int n = hi - lo + 1;
    std::vector<double> cp(n), dp(n), x(n);
    for (int i = 0; i < n; ++i) {
        double rhs = f[lo + i];
        if (i == 0) rhs -= off * left;
        if (i == n - 1) rhs -= off * right;
        const double denom = diag - (i ? off * cp[i - 1] : 0.0);
        cp[i] = off / denom;
        dp[i] = (rhs - (i ? off * dp[i - 1] : 0.0)) / denom;
    }
    for (int i = n - 1; i >= 0; --i) x[i] = dp[i] - (i + 1 < n ? cp[i] * x[i + 1] : 0.0);
    return x;
}

// Enumerates contiguous active sets [l, r] of interior nodes for a 1D
// obstacle problem with constant source and obstacle; returns the unique
// admissible solution.
std::vector<double> enumerate_1d(int m, double f, double psi) {
    const double h = 1.0 / (m - 1);
    const std::vector<double> fv(m, f);
    std::vector<double> best;
    int found = 0;
    auto admissible = [&](const std::vector<double>& u, int l, int r) {
        for (int k = 1; k < m - 1; ++k) {
            const double lu = (2 * u[k] - u[k - 1] - u[k + 1]) / (h * h);
            const bool act = k >= l && k <= r;
            if (u[k] > psi + 1e-12) return false;
            if (lu - f > 1e-9) return false;
            if (!act && std::abs(lu - f) > 1e-9) return false;
        }
        return true;
    };
    for (int l = 1; l <= m - 1; ++l) {
        for (int r = l - 1; r <= m - 2; ++r) {
            std::vector<double> u(m, 0.0);
            if (r < l) {  // empty active set
                if (l != 1) continue;
                const auto in = thomas(m, 0.0, fv, 1, m - 2, 0.0, 0.0);
                for (int k = 1; k < m - 1; ++k) u[k] = in[k - 1];
            } else {
                for (int k = l; k <= r; ++k) u[k] = psi;
                if (l > 1) {
                    const auto a = thomas(m, 0.0, fv, 1, l - 1, 0.0, psi);
                    for (int k = 1; k < l; ++k) u[k] = a[k - 1];
                }
                if (r < m - 2) {
                    const auto b = thomas(m, 0.0, fv, r + 1, m - 2, psi, 0.0);
                    for (int k = r + 1; k < m - 1; ++k) u[k] = b[k - r - 1];
                }
            }
            if (admissible(u, r < l ? m : l, r)) {
                best = u;
                ++found;
            }
        }
    }
    REQUIRE(found >= 1);
    return best;
}

SolverSettings tight(InnerMethod m = InnerMethod::Psor) {
    SolverSettings s;
    s.tol_inner = 1e-13;
    s.tol_res = 1e-11;
    s.inner_method = m;
    return s;
}

GridField shift(const GridField& u, double d) {
    std::vector<double> v(u.values().begin(), u.values().end());
    for (double& x : v) x += d;
    return GridField(u.grid(), v);
}

}  // namespace

TEST_SUITE("obstacle") {

TEST_CASE("linear solve reproduces x(1 - x)") {
    const DiscreteOperator op = laplace_1d(33);
    const Grid& g = op.grid();
    const GridField f = GridField::constant(g, 2.0);
    const GridField exact = testutil::sample(g, [](const Point& p) { return p[0] * (1 - p[0]); });
    CHECK(sup_dist(solve_linear(op, f, tight()), exact) < 1e-9);
    CHECK(sup_dist(solve_linear_direct(op, f), exact) < 1e-12);
}

TEST_CASE("linear solve matches a tridiagonal oracle with reaction") {
    const int m = 41;
    const DiscreteOperator op = laplace_1d(m, 3.0);
    const Grid& g = op.grid();
    const GridField f = testutil::sample(g, [](const Point& p) { return std::sin(5 * p[0]) + 1; });
    const auto ref = thomas(m, 3.0, std::vector<double>(f.values().begin(), f.values().end()), 1, m - 2, 0, 0);
    const GridField u = solve_linear_direct(op, f);
    for (int k = 1; k < m - 1; ++k) CHECK(u[k] == doctest::Approx(ref[k - 1]).epsilon(1e-12));
}

TEST_CASE("maximum principle") {
    std::mt19937_64 rng(41);
    const DiscreteOperator op = assemble_operator(
        Problem::standard(2, {"1", "0.2", "0.2", "1"}, {"x1", "-1"}, "1", 1.0, "0"), testutil::unit_grid({13, 13}));
    for (int t = 0; t < 5; ++t) {
        const GridField f = testutil::random_field(op.grid(), rng, 0.0, 5.0);
        const GridField u = solve_linear_direct(op, f);
        for (std::size_t k = 0; k < u.size(); ++k) CHECK(u[k] >= 0.0);
        // 1 / c bounds the solution when c >= 1 and f <= 5
        CHECK(sup_norm(u) <= 5.0);
    }
}

TEST_CASE("1D obstacle problem agrees with active-set enumeration") {
    const int m = 17;
    const DiscreteOperator op = laplace_1d(m);
    const Grid& g = op.grid();
    const auto ref = enumerate_1d(m, 8.0, 0.1);
    const GridField f = GridField::constant(g, 8.0);
    const GridField psi = GridField::constant(g, 0.1);
    for (InnerMethod method : {InnerMethod::Psor, InnerMethod::Policy}) {
        const VISolution s = solve_obstacle_with(op, f, psi, tight(method));
        CHECK(s.converged);
        for (int k = 0; k < m; ++k) CHECK(s.u[k] == doctest::Approx(ref[k]).epsilon(1e-9));
        int active = 0;
        for (auto a : s.active) active += a;
        // unconstrained peak is 1, so a symmetric middle band is active
        CHECK(active > 0);
        CHECK(active < m - 2);
        CHECK(s.active[m / 2]);
    }
}

TEST_CASE("zero obstacle makes every interior node active") {
    const DiscreteOperator op = laplace_1d(17);
    const GridField f = GridField::constant(op.grid(), 8.0);
    const VISolution s = solve_obstacle(op, f, GridField::constant(op.grid(), 0.0), tight());
    CHECK(sup_norm(s.u) == 0.0);
    CHECK(complementarity_residual(op, f, GridField::constant(op.grid(), 0.0), s.u) == 0.0);
    for (std::size_t k : op.interior_nodes()) CHECK(s.active[k]);
}

TEST_CASE("slack obstacle reduces to the linear solve") {
    const DiscreteOperator op = laplace_1d(17);
    const GridField f = GridField::constant(op.grid(), 8.0);
    const GridField psi = GridField::constant(op.grid(), 5.0);
    const GridField lin = solve_linear_direct(op, f);
    for (InnerMethod method : {InnerMethod::Psor, InnerMethod::Policy}) {
        const VISolution s = solve_obstacle_with(op, f, psi, tight(method));
        CHECK(sup_dist(s.u, lin) < 1e-9);
        for (auto a : s.active) CHECK(a == 0);
    }
}

TEST_CASE("huge obstacle equals the linear solve") {
    const DiscreteOperator op = assemble_operator(
        Problem::standard(2, {"1", "0.1", "0.1", "1"}, {"0.5", "0"}, "1", 1.0, "0"), testutil::unit_grid({17, 17}));
    const GridField f = testutil::sample(op.grid(), [](const Point& p) { return 20 * p[0] - 5; });
    const GridField psi = GridField::constant(op.grid(), 1e9);
    const GridField lin = solve_linear(op, f, tight());
    CHECK(sup_dist(policy_iteration_solve(op, f, psi, tight()).u, lin) < 1e-9);
    CHECK(sup_dist(solve_obstacle(op, f, psi, tight()).u, lin) < 1e-9);
    CHECK(sup_norm(solve_linear(op, GridField::constant(op.grid(), 0.0), tight())) == 0.0);
}

TEST_CASE("PSOR, policy iteration and both policy starts agree in 2D") {
    std::mt19937_64 rng(42);
    const DiscreteOperator op = assemble_operator(
        Problem::standard(2, {"1", "0.1", "0.1", "1"}, {"0.5", "0"}, "1", 1.0, "0"), testutil::unit_grid({17, 17}));
    const Grid& g = op.grid();
    for (int t = 0; t < 4; ++t) {
        const GridField f = testutil::random_field(g, rng, 0.0, 40.0);
        const GridField psi = testutil::random_field(g, rng, 0.05, 0.5);
        const VISolution a = solve_obstacle(op, f, psi, tight());
        const VISolution b = policy_iteration_solve(op, f, psi, tight(), PolicyStart::Empty);
        const VISolution c = policy_iteration_solve(op, f, psi, tight(), PolicyStart::Full);
        CHECK(sup_dist(a.u, b.u) < 1e-9);
        CHECK(sup_dist(b.u, c.u) < 1e-12);
        CHECK(complementarity_residual(op, f, psi, b.u) < 1e-9);
    }
}

TEST_CASE("relaxation factor changes the path, not the solution") {
    const DiscreteOperator op = laplace_1d(33);
    const GridField f = GridField::constant(op.grid(), 8.0);
    const GridField psi = GridField::constant(op.grid(), 0.2);
    SolverSettings s = tight();
    s.omega_relax = 1.0;
    const VISolution gs = solve_obstacle(op, f, psi, s);
    s.omega_relax = 1.8;
    const VISolution over = solve_obstacle(op, f, psi, s);
    CHECK(sup_dist(gs.u, over.u) < 1e-9);
    CHECK(over.iterations < gs.iterations);
    s.omega_relax = 2.0;
    CHECK_THROWS_AS(solve_obstacle(op, f, psi, s), ValidationError);
}

TEST_CASE("comparison principle in the data") {
    std::mt19937_64 rng(43);
    const DiscreteOperator op = laplace_1d(33, 1.0);
    const Grid& g = op.grid();
    for (int t = 0; t < 5; ++t) {
        const GridField f1 = testutil::random_field(g, rng, 0.0, 10.0);
        const GridField f2 = shift(f1, 2.0);
        const GridField p1 = testutil::random_field(g, rng, 0.1, 0.5);
        const GridField p2 = shift(p1, 0.1);
        const GridField u1 = solve_obstacle(op, f1, p1, tight()).u;
        const GridField u2 = solve_obstacle(op, f2, p2, tight()).u;
        for (std::size_t k = 0; k < g.size(); ++k) CHECK(u1[k] <= u2[k] + 1e-10);
    }
}

TEST_CASE("sweep cap raises non-convergence with history") {
    const DiscreteOperator op = laplace_1d(65);
    const GridField f = GridField::constant(op.grid(), 8.0);
    SolverSettings s = tight();
    s.max_sweeps = 5;
    try {
        solve_obstacle(op, f, GridField::constant(op.grid(), 0.2), s);
        FAIL("expected non-convergence");
    } catch (const NonConvergence& e) {
        CHECK(e.history().size() == 5);
    }
    CHECK_THROWS_AS(solve_linear(op, f, s), NonConvergence);
}

TEST_CASE("residual detects a perturbed solution") {
    const DiscreteOperator op = laplace_1d(33);
    const GridField f = GridField::constant(op.grid(), 8.0);
    const GridField psi = GridField::constant(op.grid(), 0.2);
    const VISolution s = policy_iteration_solve(op, f, psi, tight());
    CHECK(s.residual < 1e-10);
    REQUIRE_FALSE(s.active[1]);
    std::vector<double> v(s.u.values().begin(), s.u.values().end());
    const double delta = 1e-4;
    v[1] += delta;
    CHECK(complementarity_residual(op, f, psi, GridField(op.grid(), v)) >= delta * op.center(1) - 1e-9);
}

TEST_CASE("negative obstacle on the boundary is infeasible") {
    const DiscreteOperator op = laplace_1d(9);
    const GridField f = GridField::constant(op.grid(), 1.0);
    const GridField psi = testutil::sample(op.grid(), [](const Point& p) { return p[0] - 0.5; });
    CHECK_THROWS_AS(solve_obstacle(op, f, psi, tight()), ValidationError);
}

TEST_CASE("warm start does not change the result") {
    const DiscreteOperator op = laplace_1d(33);
    const GridField f = GridField::constant(op.grid(), 8.0);
    const GridField psi = GridField::constant(op.grid(), 0.2);
    for (InnerMethod method : {InnerMethod::Psor, InnerMethod::Policy}) {
        const VISolution cold = solve_obstacle_with(op, f, psi, tight(method));
        const GridField warm_guess = GridField::constant(op.grid(), 0.0);
        const VISolution warm = solve_obstacle_with(op, f, psi, tight(method), &warm_guess);
        CHECK(sup_dist(cold.u, warm.u) < 1e-9);
    }
}

}
