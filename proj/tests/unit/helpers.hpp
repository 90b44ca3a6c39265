#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qvi/grid.hpp"

namespace testutil {

inline qvi::Grid unit_grid(std::vector<int> counts) {
    std::vector<qvi::Interval> b(counts.size(), qvi::Interval{0.0, 1.0});
    return qvi::Grid(b, counts);
}

inline qvi::GridField random_field(const qvi::Grid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(g.size());
    for (double& x : v) x = d(rng);
    return qvi::GridField(g, std::move(v));
}

// Values on a coarse lattice so that ties are common.
inline qvi::GridField tied_field(const qvi::Grid& g, std::mt19937_64& rng, int levels = 4) {
    std::uniform_int_distribution<int> d(0, levels - 1);
    std::vector<double> v(g.size());
    for (double& x : v) x = d(rng);
    return qvi::GridField(g, std::move(v));
}

template <class F>
qvi::GridField sample(const qvi::Grid& g, F&& fn) {
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) v[k] = fn(g.point(k));
    return qvi::GridField(g, std::move(v));
}

// Zero on the boundary, as every solver iterate is.
inline qvi::GridField with_zero_boundary(const qvi::GridField& u) {
    std::vector<double> v(u.values().begin(), u.values().end());
    for (std::size_t k = 0; k < v.size(); ++k)
        if (u.grid().on_boundary(k)) v[k] = 0.0;
    return qvi::GridField(u.grid(), std::move(v));
}

}  // namespace testutil
