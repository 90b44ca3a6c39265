#include "qvi/qvi_scheme.hpp"

#include <algorithm>
#include <cmath>

#include "qvi/errors.hpp"

namespace qvi {

double ConvergenceModel::theta(int n) const { return std::pow(1.0 - mu, std::max(n - 1, 0)); }

std::vector<double> ConvergenceModel::thetas(int count) const {
    std::vector<double> out;
    double t = 1.0;
    for (int n = 1; n <= count; ++n) {
        out.push_back(t);
        t *= 1.0 - mu;
    }
    return out;
}

ConvergenceModel convergence_model(const GridField& u0) {
    ConvergenceModel m;
    m.u0_norm = sup_norm(u0);
    m.mu = m.u0_norm > 0.0 ? std::min(0.99, 1.0 / m.u0_norm) : 0.99;
    return m;
}

QviNonConvergence::QviNonConvergence(const std::string& what, std::shared_ptr<const QVISolution> partial)
    : NonConvergence(what, [&] {
          std::vector<double> h;
          for (const auto& s : partial->trace.steps) h.push_back(s.diff);
          return h;
      }()),
      partial_(std::move(partial)) {}

PreparedProblem prepare(const Problem& p, const Grid& g) {
    SampledProblem s = sample(p, g);
    ValidationReport report = validate_assumptions(p, s);
    if (!report.hard_ok()) throw ValidationError("assumption check failed: " + report.first_hard_failure());
    DiscreteOperator op = assemble_operator(s, p.c0);
    GridField f = s.source_field();
    GridField phi = s.phi_field();
    return PreparedProblem{p, std::move(s), std::move(report), std::move(op), std::move(f), std::move(phi)};
}

double fixed_point_residual(const PreparedProblem& pp, const GridField& u) {
    const InterventionResult m = apply_intervention(u, pp.phi);
    return complementarity_residual(pp.op, pp.source, m.mu, u);
}

double contact_tolerance(const GridField& u) { return 1e-6 * std::max(1.0, sup_norm(u)); }

std::vector<std::uint8_t> contact_mask(const GridField& u, const GridField& mu) {
    require_same_grid(u, mu);
    const double eps = contact_tolerance(u);
    std::vector<std::uint8_t> mask(u.size(), 0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!u.grid().on_boundary(k) && std::abs(mu[k] - u[k]) <= eps) mask[k] = 1;
    }
    return mask;
}

double default_chain_slack(const SolverSettings& cfg) { return 10.0 * (cfg.tol_inner + cfg.tol_res); }

namespace {

// Inner solves run ten times tighter on the residual so that the outer
// fixed-point residual can meet tol_res after the final obstacle update.
SolverSettings inner_settings(const SolverSettings& cfg) {
    SolverSettings inner = cfg;
    inner.tol_res = 0.1 * cfg.tol_res;
    return inner;
}

GridField initial_solve(const PreparedProblem& pp, const SolverSettings& inner) {
    if (inner.inner_method == InnerMethod::Policy) return solve_linear_direct(pp.op, pp.source).renamed("u0");
    return solve_linear(pp.op, pp.source, inner).renamed("u0");
}

void finish(QVISolution& sol, const PreparedProblem& pp, const GridField& u) {
    sol.u = u.renamed("u");
    sol.intervention = apply_intervention(sol.u, pp.phi);
    sol.eps_contact = contact_tolerance(sol.u);
    sol.contact = contact_mask(sol.u, sol.intervention.mu);
    sol.fixed_point_residual = complementarity_residual(pp.op, pp.source, sol.intervention.mu, sol.u);
}

}  // namespace

QVISolution solve_qvi(const PreparedProblem& pp, const SolverSettings& cfg) {
    const SolverSettings inner = inner_settings(cfg);
    const Grid& g = pp.op.grid();
    GridField prev = initial_solve(pp, inner);

    QVISolution sol{prev, apply_intervention(prev, pp.phi), {}, 0.0, 0.0, {}, convergence_model(prev),
                    pp.validation, pp.validation.guarantees_valid(), false};
    sol.trace.u0_norm = sol.model.u0_norm;
    sol.trace.slack = default_chain_slack(cfg);
    if (cfg.persist_iterates > 0) sol.trace.iterates.push_back(prev);

    const double slack = sol.trace.slack;
    for (int n = 0; n < cfg.max_outer; ++n) {
        const InterventionResult m = apply_intervention(prev, pp.phi);
        VISolution step = solve_obstacle_with(pp.op, pp.source, m.mu, inner, &prev);
        GridField next = step.u.renamed("u" + std::to_string(n + 1));

        IterationStep rec;
        rec.diff = sup_dist(prev, next);
        rec.norm_next = sup_norm(next);
        rec.inner_iterations = step.iterations;
        rec.inner_residual = step.residual;
        double max_drop = 0.0;  // sup of u_n - u_{n+1}
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (next[k] > prev[k] + slack || next[k] < -slack) rec.monotone_ok = false;
            max_drop = std::max(max_drop, prev[k] - next[k]);
        }
        rec.bound_ok = max_drop <= sol.model.theta(n) * sup_norm(prev) + slack;
        sol.trace.steps.push_back(rec);
        if (static_cast<int>(sol.trace.iterates.size()) < cfg.persist_iterates) {
            sol.trace.iterates.push_back(next);
        }
        prev = std::move(next);
        if (rec.diff < cfg.tol_outer && fixed_point_residual(pp, prev) <= cfg.tol_res) {
            finish(sol, pp, prev);
            sol.converged = true;
            return sol;
        }
    }
    finish(sol, pp, prev);
    throw QviNonConvergence("outer iteration did not reach tol_outer in " + std::to_string(cfg.max_outer) +
                                " steps",
                            std::make_shared<const QVISolution>(std::move(sol)));
}

QVISolution solve_qvi(const Problem& p, const Grid& g, const SolverSettings& cfg) {
    return solve_qvi(prepare(p, g), cfg);
}

GridField independent_fixed_point(const PreparedProblem& pp, const SolverSettings& cfg) {
    const Grid& g = pp.op.grid();
    if (g.size() > kPolicyMaxNodes) {
        throw SizeGuardError("independent fixed point refuses " + std::to_string(g.size()) + " nodes");
    }
    const SolverSettings inner = inner_settings(cfg);
    GridField u = GridField::constant(g, 0.0, "u");
    // Damping halves the step, so allow twice the outer budget.
    const int cap = 2 * cfg.max_outer;
    std::vector<double> history;
    for (int n = 0; n < cap; ++n) {
        const InterventionResult m = apply_intervention(u, pp.phi);
        GridField next = solve_obstacle_with(pp.op, pp.source, m.mu, inner, &u).u;
        const double d = sup_dist(u, next);
        history.push_back(d);
        if (d < cfg.tol_outer && fixed_point_residual(pp, next) <= cfg.tol_res) return next.renamed("u");
        std::vector<double> damped(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) damped[k] = 0.5 * (u[k] + next[k]);
        u = GridField(g, std::move(damped), "u");
    }
    throw NonConvergence("damped fixed-point iteration did not converge in " + std::to_string(cap) + " steps",
                         history);
}

GridField independent_fixed_point(const Problem& p, const Grid& g, const SolverSettings& cfg) {
    return independent_fixed_point(prepare(p, g), cfg);
}

ChainReport verify_chain(const IterationTrace& trace, const ConvergenceModel& model, bool guarantees_valid,
                         double slack) {
    if (!guarantees_valid) {
        throw ValidationError("monotone chain is only guaranteed when f >= 0 and the standing assumptions hold");
    }
    ChainReport r;
    const auto& it = trace.iterates;
    r.checked_iterates = static_cast<int>(it.size());
    for (std::size_t n = 0; n < it.size() && r.passed; ++n) {
        for (std::size_t k = 0; k < it[n].size(); ++k) {
            if (it[n][k] < -slack) {
                r.passed = false;
                r.failure = "u_" + std::to_string(n) + " is negative";
                r.failing_n = static_cast<int>(n);
                r.witness = k;
                break;
            }
            if (n + 1 < it.size() && it[n + 1][k] > it[n][k] + slack) {
                r.passed = false;
                r.failure = "u_" + std::to_string(n + 1) + " exceeds u_" + std::to_string(n);
                r.failing_n = static_cast<int>(n);
                r.witness = k;
                break;
            }
        }
    }
    // steps[m] holds sup_dist(u_m, u_{m+1}); the envelope applies from m = 1.
    for (std::size_t m = 1; m < trace.steps.size() && r.passed; ++m) {
        ++r.checked_steps;
        const double bound = std::pow(1.0 - model.mu, static_cast<double>(m - 1)) * model.u0_norm + slack;
        if (trace.steps[m].diff > bound) {
            r.passed = false;
            r.failure = "sup_dist(u_" + std::to_string(m) + ", u_" + std::to_string(m + 1) + ") = " +
                        std::to_string(trace.steps[m].diff) + " exceeds envelope " + std::to_string(bound);
            r.failing_n = static_cast<int>(m - 1);
        }
    }
    return r;
}

}  // namespace qvi
