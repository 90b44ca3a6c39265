#pragma once

#include <vector>

#include "qvi/grid.hpp"

namespace qvi {

// M u(x) = phi(x) + min over nodes y >= x (componentwise, closed box) of u(y).
struct InterventionResult {
    GridField mu;
    GridField cone_min;
    // Index offset xi*(x) >= 0 with u(x + xi*) == cone_min(x). Ties are broken
    // by smallest L1 norm, then lexicographically smallest offset.
    std::vector<Offset> argmin;
};

struct ConeMin {
    GridField value;
    std::vector<Offset> argmin;
};

// One reverse row-major sweep: S(x) = min(u(x), min_i S(x + e_i)).
ConeMin cone_suffix_min(const GridField& u);

InterventionResult apply_intervention(const GridField& u, const GridField& phi);
InterventionResult apply_intervention(const GridField& u);  // phi == 1

// Quadratic-cost reference: scans the whole upper quadrant of every node.
// Refuses grids above max_nodes.
inline constexpr std::size_t kBruteForceMaxNodes = 100000;
InterventionResult brute_force_intervention(const GridField& u, const GridField& phi);

}  // namespace qvi
