#include "qvi/discrete_operator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "qvi/errors.hpp"

namespace qvi {

DiscreteOperator::DiscreteOperator(Grid grid, std::vector<double> center,
                                   std::vector<std::size_t> row_start,
                                   std::vector<StencilEntry> entries, MMatrixCertificate cert)
    : grid_(std::move(grid)),
      center_(std::move(center)),
      row_start_(std::move(row_start)),
      entries_(std::move(entries)),
      interior_(grid_.size(), 0),
      cert_(std::move(cert)) {
    if (center_.size() != grid_.size() || row_start_.size() != grid_.size() + 1) {
        throw ShapeError("operator: row storage does not match the grid");
    }
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        if (!grid_.on_boundary(k)) {
            interior_[k] = 1;
            interior_list_.push_back(k);
        }
    }
}

double DiscreteOperator::apply_at(std::span<const double> u, std::size_t node) const {
    double s = center_[node] * u[node];
    for (const auto& e : neighbors(node)) s += e.coeff * u[e.node];
    return s;
}

GridField DiscreteOperator::apply(const GridField& u) const {
    if (u.grid() != grid_) throw ShapeError("operator applied to a field on another grid");
    std::vector<double> out(grid_.size(), 0.0);
    for (std::size_t k : interior_list_) out[k] = apply_at(u.values(), k);
    return GridField(grid_, std::move(out), "Lu");
}

namespace {

// Slot for an offset in {-1,0,1}^n.
int slot(const Offset& o) { return (o[0] + 1) + 3 * (o[1] + 1) + 9 * (o[2] + 1); }

Offset offset_of_slot(int s) { return {s % 3 - 1, (s / 3) % 3 - 1, s / 9 - 1}; }

}  // namespace

DiscreteOperator assemble_operator(const SampledProblem& s, double c0) {
    const Grid& g = s.grid;
    const int n = g.dim();
    std::vector<double> center(g.size(), 1.0);
    std::vector<std::size_t> row_start(g.size() + 1, 0);
    std::vector<StencilEntry> entries;
    entries.reserve(g.size() * static_cast<std::size_t>(2 * n + (n > 1 ? 4 : 0)));

    MMatrixCertificate cert;
    cert.min_center = std::numeric_limits<double>::infinity();
    cert.max_off_diagonal = -std::numeric_limits<double>::infinity();
    cert.min_row_sum = std::numeric_limits<double>::infinity();
    cert.gamma = std::numeric_limits<double>::infinity();

    double worst_positive = 0.0;
    std::size_t worst_positive_node = 0;
    bool any_interior = false;

    for (std::size_t k = 0; k < g.size(); ++k) {
        row_start[k] = entries.size();
        if (g.on_boundary(k)) continue;
        any_interior = true;
        const MultiIndex x = g.multi(k);
        std::array<double, 27> w{};
        const int mid = slot(Offset{});
        auto at = [&](int i, int si, int j = -1, int sj = 0) -> double& {
            Offset o{};
            o[i] += si;
            if (j >= 0) o[j] += sj;
            return w[slot(o)];
        };
        for (int i = 0; i < n; ++i) {
            const double hi = g.spacing(i);
            const double aii = s.a_at(k, i, i) / (hi * hi);
            w[mid] += 2.0 * aii;
            at(i, 1) -= aii;
            at(i, -1) -= aii;
            for (int j = i + 1; j < n; ++j) {
                const double aij = s.a_at(k, i, j);
                if (aij == 0.0) continue;
                const double t = std::abs(aij) / (hi * g.spacing(j));
                const int sj = aij > 0.0 ? 1 : -1;
                at(i, 1, j, sj) -= t;
                at(i, -1, j, -sj) -= t;
                w[mid] -= 2.0 * t;
                at(i, 1) += t;
                at(i, -1) += t;
                at(j, 1) += t;
                at(j, -1) += t;
            }
            const double bi = s.b_at(k, i) / hi;
            if (bi > 0.0) {
                w[mid] += bi;
                at(i, -1) -= bi;
            } else if (bi < 0.0) {
                w[mid] -= bi;
                at(i, 1) += bi;
            }
        }
        w[mid] += s.c[k];

        double row_sum = w[mid];
        double interior_abs = 0.0;
        for (int sl = 0; sl < 27; ++sl) {
            if (sl == mid) continue;
            // Rounding in a_ii / h^2 - |a_ij| / (h h) may leave a tiny positive residue.
            if (w[sl] > 0.0 && w[sl] <= 1e-12 * w[mid]) w[sl] = 0.0;
            if (w[sl] == 0.0) continue;
            const Offset o = offset_of_slot(sl);
            MultiIndex y{};
            for (int i = 0; i < kMaxDim; ++i) y[i] = x[i] + o[i];
            const std::size_t nb = g.linear(y);
            entries.push_back({nb, w[sl]});
            row_sum += w[sl];
            if (!g.on_boundary(nb)) interior_abs += std::abs(w[sl]);
            if (w[sl] > cert.max_off_diagonal) cert.max_off_diagonal = w[sl];
            if (w[sl] > worst_positive) {
                worst_positive = w[sl];
                worst_positive_node = k;
            }
        }
        center[k] = w[mid];
        if (w[mid] < cert.min_center) {
            cert.min_center = w[mid];
            if (!(w[mid] > 0.0)) cert.worst_node = k;
        }
        cert.min_row_sum = std::min(cert.min_row_sum, row_sum);
        cert.gamma = std::min(cert.gamma, w[mid] - interior_abs);
    }
    row_start[g.size()] = entries.size();

    if (!any_interior) throw ShapeError("operator: grid has no interior nodes");
    if (!(cert.min_center > 0.0)) {
        throw NonMonotoneStencil("non-monotone stencil: non-positive center coefficient at " +
                                     node_label(g, cert.worst_node),
                                 cert.worst_node);
    }
    if (worst_positive > 0.0) {
        throw NonMonotoneStencil(
            "non-monotone stencil: positive off-diagonal coefficient " + std::to_string(worst_positive) +
                " at " + node_label(g, worst_positive_node) +
                " (cross-diffusion too large for the spacing)",
            worst_positive_node);
    }
    // Row sums equal c(x) up to the rounding of the difference quotients.
    const double slack = 1e-9 * cert.min_center;
    cert.granted = c0 >= 0.0 && cert.min_row_sum >= c0 - slack && cert.min_row_sum >= -slack;
    if (!cert.granted) {
        cert.detail = "row sum " + std::to_string(cert.min_row_sum) + " below c0 = " + std::to_string(c0);
    }
    return DiscreteOperator(g, std::move(center), std::move(row_start), std::move(entries), std::move(cert));
}

DiscreteOperator assemble_operator(const Problem& p, const Grid& g) {
    return assemble_operator(sample(p, g), p.c0);
}

}  // namespace qvi
