#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qvi/grid.hpp"
#include "qvi/problem.hpp"
#include "qvi/qvi_scheme.hpp"
#include "qvi/settings.hpp"

namespace qvi {

// Nonzero offsets with |h|_inf <= max_steps, one of each +-h pair.
std::vector<Offset> probe_offsets(int dim, int max_steps);

// sup of second_difference(mu, x, h) over interior x and probe offsets with
// x +- h on the grid. Only an upper bound is meaningful (semiconcavity).
double semiconcavity_scan(const GridField& mu, int max_steps);

struct SecondDifferenceBounds {
    bool vacuous = true;
    double k_est = 0.0;  // -inf of second differences near the contact set
    double c_est = 0.0;  // sup of second differences near the contact set
    std::size_t probe_nodes = 0;
    // Second differences of u at contact nodes never exceed those of M u
    // by more than 10 eps_contact / |h|^2.
    std::size_t contact_checks = 0;
    std::size_t contact_violations = 0;
    double worst_excess = 0.0;  // max of d2u - d2Mu - allowance (<= 0 when clean)
    std::optional<std::size_t> witness;
};

SecondDifferenceBounds second_difference_bounds(const GridField& u, const GridField& mu,
                                                const std::vector<std::uint8_t>& contact, double r_probe,
                                                int max_steps, double eps_contact);

struct LaplacianRange {
    bool vacuous = true;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t nodes = 0;
};

LaplacianRange laplacian_bounds_on_contact(const GridField& u, const std::vector<std::uint8_t>& contact);

// Fraction of interior nodes inside the closed ball of each physical radius
// around `node` that are contact nodes.
std::vector<double> density_profile(const Grid& g, const std::vector<std::uint8_t>& contact, std::size_t node,
                                    const std::vector<double>& radii);

enum class ArgminClass { Interior, Edge, Mixed };
enum class FreeBoundaryLabel { Regular, Singular, Degenerate, Indeterminate };

const char* to_string(ArgminClass c);
const char* to_string(FreeBoundaryLabel l);

ArgminClass classify_argmin(const Offset& xi, int dim, int* edge_axis = nullptr);

struct ContactNodeInfo {
    std::size_t node = 0;
    Offset xi{};
    ArgminClass cls = ArgminClass::Mixed;
    int edge_axis = -1;
    // Interior argmin only: spread of M u - phi over the ball of radius
    // delta / 2, delta = min_i xi_i (physical). Equals the spread of M u
    // when phi is constant.
    bool local_checked = false;
    double delta = 0.0;
    double spread = 0.0;
    bool local_ok = true;
};

struct FreeBoundaryNodeInfo {
    std::size_t node = 0;
    FreeBoundaryLabel label = FreeBoundaryLabel::Indeterminate;
    std::vector<double> density;
    // Degenerate nodes: |D_i u(y)| at y = x_c + xi*(x_c) for the adjacent
    // edge-argmin contact node x_c, against the discrete-minimality bound.
    bool first_order_checked = false;
    double derivative = 0.0;
    double derivative_bound = 0.0;
    bool first_order_ok = true;
};

struct FreeBoundaryReport {
    bool labeling_refused = false;
    std::string refusal;
    std::vector<double> radii;  // physical
    std::vector<ContactNodeInfo> contact;
    std::vector<FreeBoundaryNodeInfo> boundary;
    std::size_t interior_argmin = 0, edge_argmin = 0, mixed_argmin = 0;
    std::size_t regular = 0, singular = 0, degenerate = 0, indeterminate = 0;
    std::size_t local_constancy_failures = 0;
    std::size_t first_order_failures = 0;
    double eps_contact = 0.0;
};

// Inactive interior nodes with at least one contact node among their axis neighbors.
std::vector<std::size_t> free_boundary_nodes(const Grid& g, const std::vector<std::uint8_t>& contact);

// Density-only labeling used for nodes next to interior-argmin contact.
FreeBoundaryLabel density_label(const std::vector<double>& density, const AnalysisSettings& cfg);

std::vector<double> physical_radii(const Grid& g, const AnalysisSettings& cfg);

FreeBoundaryReport classify_free_boundary(const GridField& u, const InterventionResult& m,
                                          const std::vector<std::uint8_t>& contact, double eps_contact,
                                          const AnalysisSettings& cfg);
FreeBoundaryReport classify_free_boundary(const QVISolution& sol, const AnalysisSettings& cfg);

struct Claim7Entry {
    std::size_t node = 0;
    double f5 = 0.0;
    double laplacian = 0.0;
    bool lower_ok = true;   // f5 <= Δu + slack
    bool upper_ok = true;   // Δu <= slack
    bool strict_ok = true;  // f5 < 0
};

struct Claim7Report {
    bool refused = false;
    std::string reason;
    bool vacuous = true;
    std::vector<Claim7Entry> entries;
    std::size_t counterexamples = 0;
    double min_margin = 0.0;  // min of -f5 over checked nodes
    double slack_lower = 0.0;
    double slack_upper = 0.0;
};

// Only for problems declared as Δu >= f5 with a = I, b = 0, c = 0.
Claim7Report claim7_check(const QVISolution& sol, const Problem& p, const FreeBoundaryReport& fb);

// Regularity quantities of one solved level.
struct RegularityLevel {
    std::string counts;
    std::size_t nodes = 0;
    double spacing = 0.0;
    double semiconcavity = 0.0;
    SecondDifferenceBounds d2;
    LaplacianRange laplacian;
    std::size_t contact_nodes = 0;
    // 10 eps_contact / h_min^2: second differences below this are not
    // distinguishable from zero at this level.
    double noise = 0.0;
};

RegularityLevel regularity_level(const QVISolution& sol, const AnalysisSettings& cfg);

// Largest ratio between consecutive levels of a nonnegative quantity. A level
// pair where both values are within `floor` of zero counts as ratio 1.
double max_growth(const std::vector<double>& values, double floor = 1e-9);

}  // namespace qvi
