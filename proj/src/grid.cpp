#include "qvi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qvi/errors.hpp"

namespace qvi {

Grid::Grid(std::vector<Interval> bounds, std::vector<int> counts) {
    if (bounds.size() != counts.size()) {
        throw ShapeError("grid: bounds and counts have different lengths");
    }
    if (bounds.empty() || bounds.size() > static_cast<std::size_t>(kMaxDim)) {
        throw ShapeError("grid: dimension must be between 1 and 3");
    }
    dim_ = static_cast<int>(bounds.size());
    for (int i = 0; i < dim_; ++i) {
        if (counts[i] < 3) {
            throw ShapeError("grid: every axis needs at least 3 nodes");
        }
        if (!std::isfinite(bounds[i].lo) || !std::isfinite(bounds[i].hi) ||
            !(bounds[i].hi > bounds[i].lo)) {
            throw ShapeError("grid: axis " + std::to_string(i + 1) + " has an empty interval");
        }
        bounds_[i] = bounds[i];
        counts_[i] = counts[i];
        spacing_[i] = (bounds[i].hi - bounds[i].lo) / (counts[i] - 1);
    }
    std::size_t stride = 1;
    for (int i = dim_ - 1; i >= 0; --i) {
        strides_[i] = stride;
        stride *= static_cast<std::size_t>(counts_[i]);
    }
    size_ = stride;
}

double Grid::max_spacing() const {
    double h = 0.0;
    for (int i = 0; i < dim_; ++i) h = std::max(h, spacing_[i]);
    return h;
}

std::size_t Grid::linear(const MultiIndex& idx) const {
    std::size_t k = 0;
    for (int i = 0; i < dim_; ++i) k += static_cast<std::size_t>(idx[i]) * strides_[i];
    return k;
}

MultiIndex Grid::multi(std::size_t linear) const {
    MultiIndex idx{};
    for (int i = 0; i < dim_; ++i) {
        idx[i] = static_cast<int>(linear / strides_[i]);
        linear %= strides_[i];
    }
    return idx;
}

bool Grid::in_range(const MultiIndex& idx) const {
    for (int i = 0; i < dim_; ++i) {
        if (idx[i] < 0 || idx[i] >= counts_[i]) return false;
    }
    for (int i = dim_; i < kMaxDim; ++i) {
        if (idx[i] != 0) return false;
    }
    return true;
}

bool Grid::on_boundary(const MultiIndex& idx) const {
    for (int i = 0; i < dim_; ++i) {
        if (idx[i] == 0 || idx[i] == counts_[i] - 1) return true;
    }
    return false;
}

bool Grid::on_boundary(std::size_t linear) const { return on_boundary(multi(linear)); }

Point Grid::point(const MultiIndex& idx) const {
    Point p{};
    for (int i = 0; i < dim_; ++i) {
        // Pin the last node to hi exactly so the closed box is honored.
        p[i] = idx[i] == counts_[i] - 1 ? bounds_[i].hi : bounds_[i].lo + idx[i] * spacing_[i];
    }
    return p;
}

Point Grid::displacement(const Offset& h) const {
    Point d{};
    for (int i = 0; i < dim_; ++i) d[i] = h[i] * spacing_[i];
    return d;
}

double Grid::length(const Offset& h) const {
    const Point d = displacement(h);
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += d[i] * d[i];
    return std::sqrt(s);
}

Grid Grid::coarsened() const {
    std::vector<Interval> b;
    std::vector<int> c;
    for (int i = 0; i < dim_; ++i) {
        if (counts_[i] < 5 || (counts_[i] - 1) % 2 != 0) {
            throw ShapeError("grid: axis " + std::to_string(i + 1) + " cannot be coarsened");
        }
        b.push_back(bounds_[i]);
        c.push_back((counts_[i] - 1) / 2 + 1);
    }
    return Grid(std::move(b), std::move(c));
}

bool Grid::operator==(const Grid& other) const {
    if (dim_ != other.dim_) return false;
    for (int i = 0; i < dim_; ++i) {
        if (counts_[i] != other.counts_[i] || !(bounds_[i] == other.bounds_[i])) return false;
    }
    return true;
}

std::string Grid::describe() const {
    std::ostringstream os;
    for (int i = 0; i < dim_; ++i) os << (i ? "x" : "") << counts_[i];
    return os.str();
}

GridField::GridField(Grid grid, std::vector<double> values, std::string name)
    : grid_(std::move(grid)), values_(std::move(values)), name_(std::move(name)) {
    if (values_.size() != grid_.size()) {
        throw ShapeError("field '" + name_ + "': " + std::to_string(values_.size()) +
                         " values for " + std::to_string(grid_.size()) + " nodes");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw ValidationError("field '" + name_ + "' has a non-finite value",
                                  "node " + std::to_string(i));
        }
    }
}

GridField GridField::constant(const Grid& grid, double value, std::string name) {
    return GridField(grid, std::vector<double>(grid.size(), value), std::move(name));
}

double GridField::at(const MultiIndex& idx) const {
    if (!grid_.in_range(idx)) throw RangeError("field index out of range");
    return values_[grid_.linear(idx)];
}

GridField GridField::renamed(std::string name) const {
    GridField copy = *this;
    copy.name_ = std::move(name);
    return copy;
}

namespace {

MultiIndex shifted(const MultiIndex& x, const Offset& h, int sign) {
    MultiIndex y{};
    for (int i = 0; i < kMaxDim; ++i) y[i] = x[i] + sign * h[i];
    return y;
}

}  // namespace

double second_difference(const GridField& u, const MultiIndex& x, const Offset& h) {
    const Grid& g = u.grid();
    const MultiIndex fwd = shifted(x, h, 1);
    const MultiIndex bwd = shifted(x, h, -1);
    if (!g.in_range(x) || !g.in_range(fwd) || !g.in_range(bwd)) {
        throw RangeError("second_difference: stencil leaves the grid");
    }
    const double len = g.length(h);
    if (len == 0.0) throw RangeError("second_difference: zero step");
    const double num = u[g.linear(fwd)] + u[g.linear(bwd)] - 2.0 * u[g.linear(x)];
    return num / (len * len);
}

double discrete_laplacian(const GridField& u, const MultiIndex& x) {
    const Grid& g = u.grid();
    if (!g.in_range(x) || g.on_boundary(x)) {
        throw RangeError("discrete_laplacian: node is not interior");
    }
    double sum = 0.0;
    for (int i = 0; i < g.dim(); ++i) {
        Offset e{};
        e[i] = 1;
        sum += second_difference(u, x, e);
    }
    return sum;
}

void require_same_grid(const GridField& u, const GridField& v) {
    if (u.grid() != v.grid()) {
        throw ShapeError("fields '" + u.name() + "' and '" + v.name() + "' live on different grids");
    }
}

double sup_norm(const GridField& u) {
    double m = 0.0;
    for (double x : u.values()) m = std::max(m, std::abs(x));
    return m;
}

double sup_dist(const GridField& u, const GridField& v) {
    require_same_grid(u, v);
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
    return m;
}

}  // namespace qvi
