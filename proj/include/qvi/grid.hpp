#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qvi {

inline constexpr int kMaxDim = 3;

// Per-axis integer index. Unused trailing axes are kept at zero so that two
// indices on the same grid compare equal iff they name the same node.
using MultiIndex = std::array<int, kMaxDim>;
// Signed index displacement; a cone offset has every component >= 0.
using Offset = std::array<int, kMaxDim>;
using Point = std::array<double, kMaxDim>;

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool operator==(const Interval&) const = default;
};

// Node-centered uniform lattice over an axis-aligned box in 1 to 3 dimensions.
class Grid {
public:
    Grid(std::vector<Interval> bounds, std::vector<int> counts);

    int dim() const { return dim_; }
    int count(int axis) const { return counts_[axis]; }
    const Interval& bounds(int axis) const { return bounds_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    double max_spacing() const;
    std::size_t size() const { return size_; }
    std::size_t stride(int axis) const { return strides_[axis]; }

    std::size_t linear(const MultiIndex& idx) const;
    MultiIndex multi(std::size_t linear) const;
    bool in_range(const MultiIndex& idx) const;
    bool on_boundary(std::size_t linear) const;
    bool on_boundary(const MultiIndex& idx) const;
    Point point(const MultiIndex& idx) const;
    Point point(std::size_t linear) const { return point(multi(linear)); }
    // Physical displacement of an index offset.
    Point displacement(const Offset& h) const;
    double length(const Offset& h) const;

    // Grid with (m - 1) / 2 + 1 nodes per axis over the same box; requires odd m >= 5.
    Grid coarsened() const;

    bool operator==(const Grid& other) const;
    bool operator!=(const Grid& other) const { return !(*this == other); }

    std::string describe() const;

private:
    int dim_ = 0;
    std::array<Interval, kMaxDim> bounds_{};
    std::array<int, kMaxDim> counts_{1, 1, 1};
    std::array<double, kMaxDim> spacing_{};
    std::array<std::size_t, kMaxDim> strides_{};
    std::size_t size_ = 0;
};

// Scalar samples on every node of a grid. Values are finite by construction.
class GridField {
public:
    GridField(Grid grid, std::vector<double> values, std::string name = {});
    static GridField constant(const Grid& grid, double value, std::string name = {});

    const Grid& grid() const { return grid_; }
    const std::string& name() const { return name_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double at(const MultiIndex& idx) const;

    GridField renamed(std::string name) const;

private:
    Grid grid_;
    std::vector<double> values_;
    std::string name_;
};

// (u(x+h) + u(x-h) - 2u(x)) / |h|^2 with |h| the physical step length.
double second_difference(const GridField& u, const MultiIndex& x, const Offset& h);

// Sum of axis-aligned second differences with step one node; x must be interior.
double discrete_laplacian(const GridField& u, const MultiIndex& x);

double sup_norm(const GridField& u);
double sup_dist(const GridField& u, const GridField& v);

void require_same_grid(const GridField& u, const GridField& v);

}  // namespace qvi
