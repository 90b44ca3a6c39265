#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qvi/expr.hpp"
#include "qvi/grid.hpp"

namespace qvi {

// Which sign convention the data was declared in.
//   Standard:    L u <= f,  u <= M u   (elliptic operator with a, b, c)
//   LaplacianGe: Δu >= f5,  u <= M u   (a = I, b = 0, c = 0; solved as -Δu <= -f5)
enum class ProblemForm { Standard, LaplacianGe };

const char* to_string(ProblemForm f);

struct Problem {
    int dim = 1;
    std::vector<Expr> diffusion;  // dim x dim, row-major
    std::vector<Expr> drift;      // dim
    Expr reaction;                // c
    Expr data;                    // f (Standard) or f5 (LaplacianGe), as declared
    Expr cost;                    // intervention cost phi
    double c0 = 0.0;
    ProblemForm form = ProblemForm::Standard;

    const Expr& a(int i, int j) const { return diffusion[static_cast<std::size_t>(i * dim + j)]; }

    // Builds a problem from expression strings. Missing diffusion defaults to
    // the identity, missing drift to zero, missing cost to the literal 1.
    static Problem standard(int dim, const std::vector<std::string>& a, const std::vector<std::string>& b,
                            const std::string& c, double c0, const std::string& f,
                            const std::string& phi = "1");
    static Problem laplacian_ge(int dim, const std::string& f5, const std::string& phi = "1",
                                double c0 = 0.0);

    // Throws ShapeError when expression dimensions disagree.
    void check_shape() const;
};

// Every coefficient sampled at every node of a grid.
struct SampledProblem {
    Grid grid;
    int dim = 1;
    std::vector<double> a;       // node-major, dim*dim per node
    std::vector<double> b;       // node-major, dim per node
    std::vector<double> c;
    std::vector<double> source;  // right-hand side under L u <= source
    std::vector<double> data;    // declared data (f or f5)
    std::vector<double> phi;

    double a_at(std::size_t node, int i, int j) const {
        return a[node * static_cast<std::size_t>(dim * dim) + static_cast<std::size_t>(i * dim + j)];
    }
    double b_at(std::size_t node, int i) const { return b[node * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)]; }

    GridField source_field() const;
    GridField data_field() const;
    GridField phi_field() const;
};

// Evaluates all expressions at every node. An evaluation error is rethrown as
// a ValidationError naming the expression and the node.
SampledProblem sample(const Problem& p, const Grid& g);

struct ValidationFlag {
    std::string name;
    bool passed = true;
    bool hard = false;  // a hard failure blocks solving
    std::string witness;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationFlag> flags;
    double c_min = 0.0;
    double min_eigenvalue = 0.0;
    double coercivity_gamma = 0.0;  // min over rows of center - sum |off-diagonal|

    const ValidationFlag& flag(const std::string& name) const;
    bool hard_ok() const;
    // All standing assumptions of the existence scheme hold, including f >= 0.
    bool guarantees_valid() const;
    std::string first_hard_failure() const;
};

ValidationReport validate_assumptions(const Problem& p, const Grid& g);
ValidationReport validate_assumptions(const Problem& p, const SampledProblem& s);

// f(x) <= f(y) for every y >= x componentwise. Returns a violating pair
// (x, y) as linear indices, or nullopt when monotone.
std::optional<std::pair<std::size_t, std::size_t>> cone_monotone_violation(const GridField& f);
// phi(y) <= phi(x) for every y >= x.
std::optional<std::pair<std::size_t, std::size_t>> cone_decreasing_violation(const GridField& phi);

std::string node_label(const Grid& g, std::size_t node);

}  // namespace qvi
