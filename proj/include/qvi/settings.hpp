#pragma once

#include <string>
#include <vector>

namespace qvi {

enum class InnerMethod { Psor, Policy };

const char* to_string(InnerMethod m);
InnerMethod inner_method_from_string(const std::string& s);

struct SolverSettings {
    double tol_inner = 1e-10;
    double tol_res = 1e-8;
    double omega_relax = 1.5;
    long max_sweeps = 0;  // 0: 200 sweeps per grid node
    InnerMethod inner_method = InnerMethod::Psor;
    double tol_outer = 1e-8;
    int max_outer = 200;
    int persist_iterates = 12;
    int max_policy_iterations = 0;  // 0: node count + 1

    long sweep_cap(std::size_t nodes) const {
        return max_sweeps > 0 ? max_sweeps : 200L * static_cast<long>(nodes);
    }
};

struct AnalysisSettings {
    double r_probe = 0.0;  // physical; 0 means 4 * max spacing
    int max_steps = 4;
    // Ball radii for contact density, in units of the largest spacing.
    std::vector<double> density_radii{6.0, 8.0, 10.0};
    int refinement_levels = 3;
    double regular_threshold = 0.4;
    double singular_threshold = 0.25;
};

}  // namespace qvi
