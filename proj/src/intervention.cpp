#include "qvi/intervention.hpp"

#include "qvi/errors.hpp"

namespace qvi {

namespace {

int l1(const Offset& o) { return o[0] + o[1] + o[2]; }

// Strict "better" under (value, L1 norm, lexicographic offset).
bool better(double v, const Offset& o, double best_v, const Offset& best_o) {
    if (v != best_v) return v < best_v;
    const int a = l1(o), b = l1(best_o);
    if (a != b) return a < b;
    return o < best_o;
}

void check_phi(const GridField& phi) {
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (!(phi[i] > 0.0)) {
            throw ValidationError("intervention cost must be strictly positive",
                                  "node " + std::to_string(i));
        }
    }
}

InterventionResult assemble(const GridField& u, const GridField& phi, ConeMin cm) {
    std::vector<double> mu(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) mu[i] = phi[i] + cm.value[i];
    return {GridField(u.grid(), std::move(mu), "Mu"), std::move(cm.value), std::move(cm.argmin)};
}

}  // namespace

ConeMin cone_suffix_min(const GridField& u) {
    const Grid& g = u.grid();
    const int n = g.dim();
    std::vector<double> s(g.size());
    std::vector<Offset> arg(g.size(), Offset{});
    for (std::size_t k = g.size(); k-- > 0;) {
        const MultiIndex x = g.multi(k);
        double best = u[k];
        Offset best_o{};
        for (int i = 0; i < n; ++i) {
            if (x[i] + 1 >= g.count(i)) continue;
            const std::size_t nb = k + g.stride(i);
            Offset o = arg[nb];
            o[i] += 1;
            if (better(s[nb], o, best, best_o)) {
                best = s[nb];
                best_o = o;
            }
        }
        s[k] = best;
        arg[k] = best_o;
    }
    return {GridField(g, std::move(s), "cone_min"), std::move(arg)};
}

InterventionResult apply_intervention(const GridField& u, const GridField& phi) {
    require_same_grid(u, phi);
    check_phi(phi);
    return assemble(u, phi, cone_suffix_min(u));
}

InterventionResult apply_intervention(const GridField& u) {
    return apply_intervention(u, GridField::constant(u.grid(), 1.0, "phi"));
}

InterventionResult brute_force_intervention(const GridField& u, const GridField& phi) {
    require_same_grid(u, phi);
    const Grid& g = u.grid();
    if (g.size() > kBruteForceMaxNodes) {
        throw SizeGuardError("brute-force intervention refuses " + std::to_string(g.size()) +
                             " nodes (limit " + std::to_string(kBruteForceMaxNodes) + ")");
    }
    check_phi(phi);
    const int n = g.dim();
    std::vector<double> s(g.size());
    std::vector<Offset> arg(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const MultiIndex x = g.multi(k);
        double best = u[k];
        Offset best_o{};
        // Enumerate the closed upper quadrant with an odometer over offsets.
        Offset o{};
        const Offset lim{n > 0 ? g.count(0) - 1 - x[0] : 0, n > 1 ? g.count(1) - 1 - x[1] : 0,
                         n > 2 ? g.count(2) - 1 - x[2] : 0};
        for (;;) {
            int axis = n - 1;
            while (axis >= 0 && o[axis] == lim[axis]) {
                o[axis] = 0;
                --axis;
            }
            if (axis < 0) break;
            ++o[axis];
            MultiIndex y{};
            for (int i = 0; i < kMaxDim; ++i) y[i] = x[i] + o[i];
            const double v = u[g.linear(y)];
            if (better(v, o, best, best_o)) {
                best = v;
                best_o = o;
            }
        }
        s[k] = best;
        arg[k] = best_o;
    }
    return assemble(u, phi, {GridField(g, std::move(s), "cone_min"), std::move(arg)});
}

}  // namespace qvi
