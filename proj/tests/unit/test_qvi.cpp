#include <doctest.h>

#include "helpers.hpp"
#include "qvi/errors.hpp"
#include "qvi/qvi_scheme.hpp"

using namespace qvi;

namespace {

Problem bench_1d(const std::string& f = "20") { return Problem::standard(1, {"1"}, {"0"}, "1", 1.0, f); }

}  // namespace

TEST_SUITE("qvi") {

TEST_CASE("convergence model") {
    const Grid g = testutil::unit_grid({5});
    const ConvergenceModel a = convergence_model(GridField(g, {0, 1, 4, 2, 0}));
    CHECK(a.u0_norm == 4.0);
    CHECK(a.mu == 0.25);
    CHECK(a.theta(1) == 1.0);
    CHECK(a.theta(3) == doctest::Approx(0.5625));
    CHECK(convergence_model(GridField(g, {0, 0.5, 0.2, 0, 0})).mu == 0.99);
    CHECK(convergence_model(GridField::constant(g, 0.0)).mu == 0.99);
    CHECK(a.thetas(3).size() == 3);
}

TEST_CASE("zero data gives the zero solution") {
    const QVISolution s = solve_qvi(bench_1d("0"), testutil::unit_grid({33}), SolverSettings{});
    CHECK(s.converged);
    CHECK(sup_norm(s.u) == 0.0);
    for (auto c : s.contact) CHECK(c == 0);
}

TEST_CASE("small data never touches the obstacle") {
    SolverSettings cfg;
    const PreparedProblem pp = prepare(bench_1d("0.5"), testutil::unit_grid({33}));
    const QVISolution s = solve_qvi(pp, cfg);
    CHECK(s.converged);
    CHECK(s.trace.steps.size() == 1);
    CHECK(sup_dist(s.u, s.trace.iterates[0]) < 1e-9);
    for (auto c : s.contact) CHECK(c == 0);
    // chain of length one passes vacuously
    const ChainReport r = verify_chain(s.trace, s.model, s.guarantees_valid, 1e-7);
    CHECK(r.passed);
    CHECK(r.checked_steps == 0);
}

TEST_CASE("1D benchmark matches an independent policy-iteration oracle") {
    // Frozen from a dense policy iteration on the 127 interior unknowns of
    // -u'' + u <= 20, u <= 1 (M u is 1 once u >= 0).
    const Grid g = testutil::unit_grid({129});
    const QVISolution s = solve_qvi(bench_1d(), g, SolverSettings{});
    CHECK(s.converged);
    CHECK(s.guarantees_valid);
    CHECK(s.fixed_point_residual <= 1e-8);
    CHECK(s.u[8] == doctest::Approx(0.3515040594638097).epsilon(1e-8));
    CHECK(s.u[16] == doctest::Approx(0.6262315846834866).epsilon(1e-8));
    CHECK(s.u[32] == doctest::Approx(0.9493552158900103).epsilon(1e-8));
    CHECK(s.u[40] == doctest::Approx(0.9990139280636856).epsilon(1e-8));
    CHECK(s.u[64] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.model.u0_norm == doctest::Approx(2.2636118985636893).epsilon(1e-8));
    std::size_t contact = 0;
    for (auto c : s.contact) contact += c;
    CHECK(contact == 47);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(s.intervention.mu[k] == 1.0);
}

TEST_CASE("independent fixed point agrees with the scheme") {
    const Grid g = testutil::unit_grid({65});
    SolverSettings cfg;
    const PreparedProblem pp = prepare(bench_1d(), g);
    CHECK(sup_dist(solve_qvi(pp, cfg).u, independent_fixed_point(pp, cfg)) < 1e-7);

    // sign-changing data exercises a non-trivial intervention
    const PreparedProblem mixed = prepare(bench_1d("30*sin(6.283185307179586*x1)"), g);
    cfg.inner_method = InnerMethod::Policy;
    const QVISolution s = solve_qvi(mixed, cfg);
    CHECK_FALSE(s.guarantees_valid);
    CHECK(sup_dist(s.u, independent_fixed_point(mixed, cfg)) < 1e-7);
}

TEST_CASE("monotone chain holds and tampering is caught") {
    const QVISolution s = solve_qvi(bench_1d("30*(1 + x1)"), testutil::unit_grid({65}), SolverSettings{});
    REQUIRE(s.trace.iterates.size() >= 3);
    const ChainReport ok = verify_chain(s.trace, s.model, true, 1e-7);
    CHECK(ok.passed);
    CHECK(ok.checked_iterates == static_cast<int>(s.trace.iterates.size()));
    for (const auto& st : s.trace.steps) {
        CHECK(st.monotone_ok);
        CHECK(st.bound_ok);
    }

    IterationTrace raised = s.trace;
    raised.iterates[2] = raised.iterates[0];
    const ChainReport bad = verify_chain(raised, s.model, true, 1e-7);
    CHECK_FALSE(bad.passed);
    CHECK(bad.witness.has_value());

    IterationTrace inflated = s.trace;
    inflated.steps[1].diff = 10.0 * s.model.u0_norm;
    CHECK_FALSE(verify_chain(inflated, s.model, true, 1e-7).passed);
}

TEST_CASE("chain verification refuses without the guarantees") {
    const QVISolution s = solve_qvi(bench_1d("20*x1 - 5"), testutil::unit_grid({33}), SolverSettings{});
    CHECK_FALSE(s.guarantees_valid);
    CHECK_THROWS_AS(verify_chain(s.trace, s.model, s.guarantees_valid, 1e-7), ValidationError);
}

TEST_CASE("independent solver on zero data and across levels") {
    SolverSettings cfg;
    CHECK(sup_norm(independent_fixed_point(bench_1d("0"), testutil::unit_grid({33}), cfg)) == 0.0);
    for (int m : {33, 65, 129}) {
        const PreparedProblem pp = prepare(bench_1d(), testutil::unit_grid({m}));
        CHECK(sup_dist(solve_qvi(pp, cfg).u, independent_fixed_point(pp, cfg)) < 1e-7);
    }
}

TEST_CASE("solutions on nested grids are close") {
    SolverSettings cfg;
    const QVISolution coarse = solve_qvi(bench_1d(), testutil::unit_grid({65}), cfg);
    const QVISolution fine = solve_qvi(bench_1d(), testutil::unit_grid({129}), cfg);
    double d = 0.0;
    for (std::size_t k = 0; k < 65; ++k) d = std::max(d, std::abs(coarse.u[k] - fine.u[2 * k]));
    CHECK(d < 1e-3);
}

TEST_CASE("outer cap raises with a partial solution") {
    SolverSettings cfg;
    cfg.max_outer = 1;
    try {
        solve_qvi(bench_1d("30*sin(6.283185307179586*x1)"), testutil::unit_grid({33}), cfg);
        FAIL("expected non-convergence");
    } catch (const QviNonConvergence& e) {
        CHECK(e.partial().trace.steps.size() == 1);
        CHECK_FALSE(e.partial().converged);
        CHECK(e.history().size() == 1);
    }
}

TEST_CASE("persisted iterates are capped") {
    SolverSettings cfg;
    cfg.persist_iterates = 2;
    const QVISolution s = solve_qvi(bench_1d("30*sin(6.283185307179586*x1)"), testutil::unit_grid({33}), cfg);
    CHECK(s.trace.iterates.size() <= 2);
}

TEST_CASE("hard validation failures stop preparation") {
    CHECK_THROWS_AS(prepare(Problem::standard(1, {"1"}, {"0"}, "0", 0.1, "1"), testutil::unit_grid({33})),
                    ValidationError);
}

}
