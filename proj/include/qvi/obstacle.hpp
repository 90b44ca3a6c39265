#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qvi/discrete_operator.hpp"
#include "qvi/grid.hpp"
#include "qvi/settings.hpp"

namespace qvi {

// Solution of max(L_h u - f, u - psi) = 0 in the interior, u = 0 on the boundary.
struct VISolution {
    GridField u;
    std::vector<std::uint8_t> active;  // psi - u <= eps_active
    long iterations = 0;               // sweeps (PSOR) or policy updates (Howard)
    double residual = 0.0;
    bool converged = false;
};

// 1e-6 * max(1, sup |psi|).
double active_tolerance(const GridField& psi);
std::vector<std::uint8_t> active_mask(const GridField& u, const GridField& psi);

// sup over interior nodes of |max(L_h u - f, u - psi)|.
double complementarity_residual(const DiscreteOperator& op, const GridField& f, const GridField& psi,
                                const GridField& u);
// sup over interior nodes of |L_h u - f|.
double linear_residual(const DiscreteOperator& op, const GridField& f, const GridField& u);

// SOR for L_h u = f. Stops once a sweep moves no node by tol_inner and the
// residual is below tol_res; throws NonConvergence at the sweep cap.
GridField solve_linear(const DiscreteOperator& op, const GridField& f, const SolverSettings& cfg,
                       const GridField* initial = nullptr);

// Sparse LU solve of L_h u = f (same node-count guard as policy iteration).
GridField solve_linear_direct(const DiscreteOperator& op, const GridField& f);

// Projected SOR: Gauss-Seidel update relaxed by omega, then u <- min(u, psi).
VISolution solve_obstacle(const DiscreteOperator& op, const GridField& f, const GridField& psi,
                          const SolverSettings& cfg, const GridField* initial = nullptr);

enum class PolicyStart { Empty, Full };

// Howard iteration on the active set with a sparse direct solve per step.
inline constexpr std::size_t kPolicyMaxNodes = 100000;
VISolution policy_iteration_solve(const DiscreteOperator& op, const GridField& f, const GridField& psi,
                                  const SolverSettings& cfg, PolicyStart start = PolicyStart::Empty,
                                  const std::vector<std::uint8_t>* initial_active = nullptr);

// Dispatches on cfg.inner_method. A warm start (iterate for PSOR, active set
// for policy iteration) only changes the path, not the solution.
VISolution solve_obstacle_with(const DiscreteOperator& op, const GridField& f, const GridField& psi,
                               const SolverSettings& cfg, const GridField* warm = nullptr);

}  // namespace qvi
