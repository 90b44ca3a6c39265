#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qvi/discrete_operator.hpp"
#include "qvi/errors.hpp"
#include "qvi/intervention.hpp"
#include "qvi/obstacle.hpp"
#include "qvi/problem.hpp"
#include "qvi/settings.hpp"

namespace qvi {

// Geometric envelope of the successive-approximation scheme:
// mu * |u_0| <= 1 and theta_n = (1 - mu)^(n - 1).
struct ConvergenceModel {
    double mu = 0.99;
    double u0_norm = 0.0;

    double theta(int n) const;
    std::vector<double> thetas(int count) const;  // theta_1 .. theta_count
};

ConvergenceModel convergence_model(const GridField& u0);

// Transition u_n -> u_{n+1}.
struct IterationStep {
    double diff = 0.0;       // sup_dist(u_n, u_{n+1})
    double norm_next = 0.0;  // sup_norm(u_{n+1})
    bool monotone_ok = true; // 0 <= u_{n+1} <= u_n (within slack)
    bool bound_ok = true;    // diff <= theta_n * sup_norm(u_n) (within slack)
    long inner_iterations = 0;
    double inner_residual = 0.0;
};

struct IterationTrace {
    double u0_norm = 0.0;
    std::vector<IterationStep> steps;
    std::vector<GridField> iterates;  // u_0 .. u_{K-1}
    double slack = 0.0;
};

struct QVISolution {
    GridField u;
    InterventionResult intervention;  // M u of the returned iterate
    std::vector<std::uint8_t> contact;
    double eps_contact = 0.0;
    double fixed_point_residual = 0.0;
    IterationTrace trace;
    ConvergenceModel model;
    ValidationReport validation;
    bool guarantees_valid = false;
    bool converged = false;
};

class QviNonConvergence : public NonConvergence {
public:
    QviNonConvergence(const std::string& what, std::shared_ptr<const QVISolution> partial);
    const QVISolution& partial() const { return *partial_; }

private:
    std::shared_ptr<const QVISolution> partial_;
};

// Everything a solve needs, sampled and assembled once.
struct PreparedProblem {
    Problem problem;
    SampledProblem sampled;
    ValidationReport validation;
    DiscreteOperator op;
    GridField source;
    GridField phi;
};

// Validates (hard failures throw ValidationError) and assembles.
PreparedProblem prepare(const Problem& p, const Grid& g);

// sup over interior nodes of |max(L_h u - f, u - M u)|.
double fixed_point_residual(const PreparedProblem& pp, const GridField& u);

// 1e-6 * max(1, sup_norm(u)).
double contact_tolerance(const GridField& u);
std::vector<std::uint8_t> contact_mask(const GridField& u, const GridField& mu);

// u_0 solves L u = f; u_n solves the obstacle problem under M u_{n-1}.
QVISolution solve_qvi(const PreparedProblem& pp, const SolverSettings& cfg);
QVISolution solve_qvi(const Problem& p, const Grid& g, const SolverSettings& cfg);

// Damped iteration from u = 0: u <- (u + S(u)) / 2 with S the obstacle solve
// under M u. Shares only the fixed point with solve_qvi.
GridField independent_fixed_point(const PreparedProblem& pp, const SolverSettings& cfg);
GridField independent_fixed_point(const Problem& p, const Grid& g, const SolverSettings& cfg);

struct ChainReport {
    bool passed = true;
    std::string failure;  // empty when passed
    int failing_n = -1;
    std::optional<std::size_t> witness;
    int checked_iterates = 0;
    int checked_steps = 0;
};

// Monotone chain 0 <= u_{n+1} <= u_n on persisted iterates, and
// sup_dist(u_{n+1}, u_{n+2}) <= (1 - mu)^n |u_0| + slack on every step.
// Refuses (ValidationError) when the standing assumptions do not hold.
ChainReport verify_chain(const IterationTrace& trace, const ConvergenceModel& model, bool guarantees_valid,
                         double slack);

double default_chain_slack(const SolverSettings& cfg);

}  // namespace qvi
