#include "qvi/obstacle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "qvi/errors.hpp"

namespace qvi {

double active_tolerance(const GridField& psi) { return 1e-6 * std::max(1.0, sup_norm(psi)); }

std::vector<std::uint8_t> active_mask(const GridField& u, const GridField& psi) {
    require_same_grid(u, psi);
    const double eps = active_tolerance(psi);
    std::vector<std::uint8_t> mask(u.size(), 0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!u.grid().on_boundary(k) && psi[k] - u[k] <= eps) mask[k] = 1;
    }
    return mask;
}

namespace {

void check_shapes(const DiscreteOperator& op, const GridField& f, const GridField* psi) {
    if (f.grid() != op.grid()) throw ShapeError("source lives on a different grid than the operator");
    if (psi && psi->grid() != op.grid()) throw ShapeError("obstacle lives on a different grid than the operator");
}

void check_boundary_obstacle(const GridField& psi) {
    const Grid& g = psi.grid();
    for (std::size_t k = 0; k < psi.size(); ++k) {
        if (g.on_boundary(k) && psi[k] < 0.0) {
            throw ValidationError("infeasible boundary: obstacle is negative where u = 0 is imposed",
                                  node_label(g, k));
        }
    }
}

void require_certificate(const DiscreteOperator& op) {
    if (!op.certificate().granted) {
        throw ValidationError("operator lacks an M-matrix certificate: " + op.certificate().detail);
    }
}

struct SorOutcome {
    std::vector<double> u;
    long sweeps = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> history;
};

SorOutcome run_sor(const DiscreteOperator& op, const GridField& f, const GridField* psi,
                   const SolverSettings& cfg, const GridField* initial) {
    if (!(cfg.omega_relax > 0.0 && cfg.omega_relax < 2.0)) {
        throw ValidationError("omega_relax must lie in (0, 2)");
    }
    const Grid& g = op.grid();
    SorOutcome out;
    out.u.assign(g.size(), 0.0);
    if (initial) {
        if (initial->grid() != g) throw ShapeError("initial guess lives on a different grid");
        for (std::size_t k : op.interior_nodes()) out.u[k] = (*initial)[k];
    }
    if (psi) {
        for (std::size_t k : op.interior_nodes()) out.u[k] = std::min(out.u[k], (*psi)[k]);
    }
    const long cap = cfg.sweep_cap(g.size());
    const long stride = std::max(1L, cap / 512);
    const double omega = cfg.omega_relax;
    auto fv = f.values();
    for (long sweep = 1; sweep <= cap; ++sweep) {
        double max_update = 0.0;
        for (std::size_t k : op.interior_nodes()) {
            double sigma = 0.0;
            for (const auto& e : op.neighbors(k)) sigma += e.coeff * out.u[e.node];
            const double gs = (fv[k] - sigma) / op.center(k);
            double v = out.u[k] + omega * (gs - out.u[k]);
            if (psi) v = std::min(v, (*psi)[k]);
            max_update = std::max(max_update, std::abs(v - out.u[k]));
            out.u[k] = v;
        }
        if (sweep % stride == 0) out.history.push_back(max_update);
        out.sweeps = sweep;
        if (max_update < cfg.tol_inner) {
            const GridField cur(g, out.u);
            out.residual = psi ? complementarity_residual(op, f, *psi, cur) : linear_residual(op, f, cur);
            if (out.residual < cfg.tol_res) {
                out.converged = true;
                return out;
            }
        }
    }
    return out;
}

}  // namespace

double complementarity_residual(const DiscreteOperator& op, const GridField& f, const GridField& psi,
                                const GridField& u) {
    check_shapes(op, f, &psi);
    if (u.grid() != op.grid()) throw ShapeError("iterate lives on a different grid than the operator");
    double r = 0.0;
    for (std::size_t k : op.interior_nodes()) {
        const double m = std::max(op.apply_at(u.values(), k) - f[k], u[k] - psi[k]);
        r = std::max(r, std::abs(m));
    }
    return r;
}

double linear_residual(const DiscreteOperator& op, const GridField& f, const GridField& u) {
    check_shapes(op, f, nullptr);
    double r = 0.0;
    for (std::size_t k : op.interior_nodes()) r = std::max(r, std::abs(op.apply_at(u.values(), k) - f[k]));
    return r;
}

GridField solve_linear(const DiscreteOperator& op, const GridField& f, const SolverSettings& cfg,
                       const GridField* initial) {
    check_shapes(op, f, nullptr);
    require_certificate(op);
    SorOutcome out = run_sor(op, f, nullptr, cfg, initial);
    if (!out.converged) {
        throw NonConvergence("SOR did not converge in " + std::to_string(out.sweeps) + " sweeps", out.history);
    }
    return GridField(op.grid(), std::move(out.u), "u");
}

VISolution solve_obstacle(const DiscreteOperator& op, const GridField& f, const GridField& psi,
                          const SolverSettings& cfg, const GridField* initial) {
    check_shapes(op, f, &psi);
    require_certificate(op);
    check_boundary_obstacle(psi);
    SorOutcome out = run_sor(op, f, &psi, cfg, initial);
    if (!out.converged) {
        throw NonConvergence("projected SOR did not converge in " + std::to_string(out.sweeps) + " sweeps",
                             out.history);
    }
    GridField u(op.grid(), std::move(out.u), "u");
    auto mask = active_mask(u, psi);
    return {std::move(u), std::move(mask), out.sweeps, out.residual, true};
}

GridField solve_linear_direct(const DiscreteOperator& op, const GridField& f) {
    check_shapes(op, f, nullptr);
    const Grid& g = op.grid();
    const GridField no_obstacle = GridField::constant(g, std::numeric_limits<double>::max(), "psi");
    SolverSettings cfg;
    cfg.max_policy_iterations = 1;
    // One policy step from the empty active set is exactly the linear solve.
    VISolution sol = policy_iteration_solve(op, f, no_obstacle, cfg, PolicyStart::Empty);
    return sol.u;
}

VISolution policy_iteration_solve(const DiscreteOperator& op, const GridField& f, const GridField& psi,
                                  const SolverSettings& cfg, PolicyStart start,
                                  const std::vector<std::uint8_t>* initial_active) {
    check_shapes(op, f, &psi);
    const Grid& g = op.grid();
    if (g.size() > kPolicyMaxNodes) {
        throw SizeGuardError("policy iteration refuses " + std::to_string(g.size()) + " nodes (limit " +
                             std::to_string(kPolicyMaxNodes) + ")");
    }
    require_certificate(op);
    check_boundary_obstacle(psi);

    const auto& interior = op.interior_nodes();
    const std::size_t m = interior.size();
    std::vector<long> row_of(g.size(), -1);
    for (std::size_t r = 0; r < m; ++r) row_of[interior[r]] = static_cast<long>(r);

    std::vector<std::uint8_t> active(g.size(), 0);
    if (initial_active) {
        if (initial_active->size() != g.size()) throw ShapeError("initial active set has the wrong length");
        for (std::size_t k : interior) active[k] = (*initial_active)[k];
    } else if (start == PolicyStart::Full) {
        for (std::size_t k : interior) active[k] = 1;
    }

    const long cap = cfg.max_policy_iterations > 0 ? cfg.max_policy_iterations : static_cast<long>(m) + 1;
    std::vector<double> u(g.size(), 0.0);
    std::vector<double> history;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    std::vector<Eigen::Triplet<double>> trip;

    for (long it = 1; it <= cap; ++it) {
        trip.clear();
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
        for (std::size_t r = 0; r < m; ++r) {
            const std::size_t k = interior[r];
            const int ri = static_cast<int>(r);
            if (active[k]) {
                trip.emplace_back(ri, ri, 1.0);
                rhs(ri) = psi[k];
                continue;
            }
            trip.emplace_back(ri, ri, op.center(k));
            rhs(ri) = f[k];
            for (const auto& e : op.neighbors(k)) {
                if (row_of[e.node] >= 0) trip.emplace_back(ri, static_cast<int>(row_of[e.node]), e.coeff);
            }
        }
        Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        lu.analyzePattern(A);
        lu.factorize(A);
        if (lu.info() != Eigen::Success) throw Error("policy iteration: sparse factorization failed");
        const Eigen::VectorXd x = lu.solve(rhs);
        for (std::size_t r = 0; r < m; ++r) u[interior[r]] = x(static_cast<Eigen::Index>(r));

        // Pick, per node, the branch of max(L u - f, u - psi) that is larger;
        // ties keep the current choice.
        bool changed = false;
        for (std::size_t k : interior) {
            const double lin = op.apply_at(u, k) - f[k];
            const double obs = u[k] - psi[k];
            std::uint8_t want = active[k];
            if (obs > lin) want = 1;
            else if (lin > obs) want = 0;
            if (want != active[k]) {
                active[k] = want;
                changed = true;
            }
        }
        GridField cur(g, u, "u");
        const double res = complementarity_residual(op, f, psi, cur);
        history.push_back(res);
        if (!changed) {
            auto mask = active_mask(cur, psi);
            return {std::move(cur), std::move(mask), it, res, true};
        }
    }
    throw NonConvergence("policy iteration did not settle in " + std::to_string(cap) + " updates", history);
}

VISolution solve_obstacle_with(const DiscreteOperator& op, const GridField& f, const GridField& psi,
                               const SolverSettings& cfg, const GridField* warm) {
    if (cfg.inner_method == InnerMethod::Psor) return solve_obstacle(op, f, psi, cfg, warm);
    if (!warm) return policy_iteration_solve(op, f, psi, cfg);
    std::vector<std::uint8_t> guess(op.grid().size(), 0);
    const double eps = active_tolerance(psi);
    for (std::size_t k : op.interior_nodes()) guess[k] = (*warm)[k] >= psi[k] - eps ? 1 : 0;
    return policy_iteration_solve(op, f, psi, cfg, PolicyStart::Empty, &guess);
}

const char* to_string(InnerMethod m) { return m == InnerMethod::Psor ? "psor" : "policy"; }

InnerMethod inner_method_from_string(const std::string& s) {
    if (s == "psor") return InnerMethod::Psor;
    if (s == "policy") return InnerMethod::Policy;
    throw ValidationError("inner_method must be 'psor' or 'policy', got '" + s + "'");
}

}  // namespace qvi
