#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qvi/grid.hpp"
#include "qvi/problem.hpp"

namespace qvi {

struct StencilEntry {
    std::size_t node;
    double coeff;
};

// Outcome of checking the discrete monotonicity conditions row by row.
struct MMatrixCertificate {
    bool granted = false;
    double min_center = 0.0;
    double max_off_diagonal = 0.0;  // largest neighbor coefficient (must be <= 0)
    double min_row_sum = 0.0;       // sum over the full stencil, equals c(x) up to rounding
    double gamma = 0.0;             // min over rows of center - sum |interior off-diagonals|
    std::size_t worst_node = 0;
    std::string detail;
};

// Five/seven/nine-point finite-difference form of
//   L u = -sum a_ij d_ij u + sum b_i d_i u + c u
// on interior nodes. Boundary neighbors stay in the stencil; fields passed to
// the solvers carry zero there, so they contribute nothing.
class DiscreteOperator {
public:
    DiscreteOperator(Grid grid, std::vector<double> center, std::vector<std::size_t> row_start,
                     std::vector<StencilEntry> entries, MMatrixCertificate cert);

    const Grid& grid() const { return grid_; }
    bool interior(std::size_t node) const { return interior_[node] != 0; }
    const std::vector<std::size_t>& interior_nodes() const { return interior_list_; }
    double center(std::size_t node) const { return center_[node]; }
    std::span<const StencilEntry> neighbors(std::size_t node) const {
        return {entries_.data() + row_start_[node], row_start_[node + 1] - row_start_[node]};
    }
    const MMatrixCertificate& certificate() const { return cert_; }

    // (L_h u)(node) for an interior node.
    double apply_at(std::span<const double> u, std::size_t node) const;
    // L_h u at interior nodes, zero on the boundary.
    GridField apply(const GridField& u) const;

private:
    Grid grid_;
    std::vector<double> center_;
    std::vector<std::size_t> row_start_;
    std::vector<StencilEntry> entries_;
    std::vector<char> interior_;
    std::vector<std::size_t> interior_list_;
    MMatrixCertificate cert_;
};

// Central differences for a_ii, sign-split seven-point corners for a_ij,
// upwind differences for b_i. Throws NonMonotoneStencil when a neighbor
// coefficient comes out positive or a center does not.
DiscreteOperator assemble_operator(const SampledProblem& s, double c0);
DiscreteOperator assemble_operator(const Problem& p, const Grid& g);

}  // namespace qvi
