#include "qvi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qvi/errors.hpp"

namespace qvi {

const char* to_string(ArgminClass c) {
    switch (c) {
        case ArgminClass::Interior: return "interior";
        case ArgminClass::Edge: return "edge";
        case ArgminClass::Mixed: return "mixed";
    }
    return "?";
}

const char* to_string(FreeBoundaryLabel l) {
    switch (l) {
        case FreeBoundaryLabel::Regular: return "regular";
        case FreeBoundaryLabel::Singular: return "singular";
        case FreeBoundaryLabel::Degenerate: return "degenerate";
        case FreeBoundaryLabel::Indeterminate: return "indeterminate";
    }
    return "?";
}

std::vector<Offset> probe_offsets(int dim, int max_steps) {
    std::vector<Offset> out;
    const int r = max_steps;
    for (int a = -r; a <= r; ++a) {
        for (int b = dim > 1 ? -r : 0; b <= (dim > 1 ? r : 0); ++b) {
            for (int c = dim > 2 ? -r : 0; c <= (dim > 2 ? r : 0); ++c) {
                const Offset h{a, b, c};
                // Keep h whose first nonzero component is positive.
                const int lead = a != 0 ? a : b != 0 ? b : c;
                if (lead > 0) out.push_back(h);
            }
        }
    }
    return out;
}

namespace {

bool stencil_fits(const Grid& g, const MultiIndex& x, const Offset& h) {
    for (int i = 0; i < g.dim(); ++i) {
        if (x[i] - std::abs(h[i]) < 0 || x[i] + std::abs(h[i]) >= g.count(i)) return false;
    }
    return true;
}

double d2(const GridField& u, std::size_t k, const Grid& g, const Offset& h, double inv_len2) {
    std::ptrdiff_t shift = 0;
    for (int i = 0; i < g.dim(); ++i) shift += static_cast<std::ptrdiff_t>(h[i]) * static_cast<std::ptrdiff_t>(g.stride(i));
    return (u[k + shift] + u[k - shift] - 2.0 * u[k]) * inv_len2;
}

template <class F>
void for_ball(const Grid& g, std::size_t center, double radius, F&& fn) {
    const MultiIndex c = g.multi(center);
    std::array<int, kMaxDim> reach{0, 0, 0};
    for (int i = 0; i < g.dim(); ++i) reach[i] = static_cast<int>(std::floor(radius / g.spacing(i) + 1e-9));
    const double r2 = radius * radius * (1.0 + 1e-12);
    for (int a = -reach[0]; a <= reach[0]; ++a) {
        for (int b = -reach[1]; b <= reach[1]; ++b) {
            for (int d = -reach[2]; d <= reach[2]; ++d) {
                const Offset o{a, b, d};
                MultiIndex y{c[0] + a, c[1] + b, c[2] + d};
                if (!g.in_range(y)) continue;
                const Point disp = g.displacement(o);
                double s = 0.0;
                for (int i = 0; i < g.dim(); ++i) s += disp[i] * disp[i];
                if (s <= r2) fn(g.linear(y));
            }
        }
    }
}

}  // namespace

double semiconcavity_scan(const GridField& mu, int max_steps) {
    const Grid& g = mu.grid();
    double best = -std::numeric_limits<double>::infinity();
    for (const Offset& h : probe_offsets(g.dim(), max_steps)) {
        const double len = g.length(h);
        const double inv = 1.0 / (len * len);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const MultiIndex x = g.multi(k);
            if (g.on_boundary(x) || !stencil_fits(g, x, h)) continue;
            best = std::max(best, d2(mu, k, g, h, inv));
        }
    }
    return std::isfinite(best) ? best : 0.0;
}

SecondDifferenceBounds second_difference_bounds(const GridField& u, const GridField& mu,
                                                const std::vector<std::uint8_t>& contact, double r_probe,
                                                int max_steps, double eps_contact) {
    require_same_grid(u, mu);
    const Grid& g = u.grid();
    if (contact.size() != g.size()) throw ShapeError("contact mask has the wrong length");
    SecondDifferenceBounds r;
    std::vector<std::uint8_t> probe(g.size(), 0);
    bool any = false;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!contact[k]) continue;
        any = true;
        for_ball(g, k, r_probe, [&](std::size_t y) { probe[y] = 1; });
    }
    if (!any) return r;

    const auto offsets = probe_offsets(g.dim(), max_steps);
    std::vector<double> inv(offsets.size());
    for (std::size_t j = 0; j < offsets.size(); ++j) {
        const double len = g.length(offsets[j]);
        inv[j] = 1.0 / (len * len);
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    r.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!probe[k]) continue;
        const MultiIndex x = g.multi(k);
        bool counted = false;
        for (std::size_t j = 0; j < offsets.size(); ++j) {
            if (!stencil_fits(g, x, offsets[j])) continue;
            counted = true;
            const double du = d2(u, k, g, offsets[j], inv[j]);
            lo = std::min(lo, du);
            hi = std::max(hi, du);
            if (contact[k]) {
                ++r.contact_checks;
                const double excess = du - d2(mu, k, g, offsets[j], inv[j]) - 10.0 * eps_contact * inv[j];
                if (excess > r.worst_excess) r.worst_excess = excess;
                if (excess > 0.0) {
                    ++r.contact_violations;
                    if (!r.witness) r.witness = k;
                }
            }
        }
        if (counted) ++r.probe_nodes;
    }
    if (r.probe_nodes == 0) return r;
    r.vacuous = false;
    r.k_est = -lo;
    r.c_est = hi;
    if (r.contact_checks == 0) r.worst_excess = 0.0;
    return r;
}

LaplacianRange laplacian_bounds_on_contact(const GridField& u, const std::vector<std::uint8_t>& contact) {
    const Grid& g = u.grid();
    if (contact.size() != g.size()) throw ShapeError("contact mask has the wrong length");
    LaplacianRange r;
    r.lo = std::numeric_limits<double>::infinity();
    r.hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!contact[k] || g.on_boundary(k)) continue;
        const double lap = discrete_laplacian(u, g.multi(k));
        r.lo = std::min(r.lo, lap);
        r.hi = std::max(r.hi, lap);
        ++r.nodes;
    }
    if (r.nodes == 0) {
        r.lo = r.hi = 0.0;
        return r;
    }
    r.vacuous = false;
    return r;
}

std::vector<double> density_profile(const Grid& g, const std::vector<std::uint8_t>& contact, std::size_t node,
                                    const std::vector<double>& radii) {
    if (contact.size() != g.size()) throw ShapeError("contact mask has the wrong length");
    std::vector<double> out;
    out.reserve(radii.size());
    for (double r : radii) {
        std::size_t total = 0, hit = 0;
        for_ball(g, node, r, [&](std::size_t y) {
            if (g.on_boundary(y)) return;
            ++total;
            hit += contact[y] ? 1 : 0;
        });
        out.push_back(total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0);
    }
    return out;
}

ArgminClass classify_argmin(const Offset& xi, int dim, int* edge_axis) {
    int positive = 0, axis = -1;
    for (int i = 0; i < dim; ++i) {
        if (xi[i] >= 1) {
            ++positive;
            axis = i;
        }
    }
    if (edge_axis) *edge_axis = -1;
    if (positive == dim && dim > 1) return ArgminClass::Interior;
    if (positive == 1) {
        if (edge_axis) *edge_axis = axis;
        // In one dimension the cone has no faces: a positive shift is interior.
        return dim == 1 ? ArgminClass::Interior : ArgminClass::Edge;
    }
    return ArgminClass::Mixed;
}

std::vector<std::size_t> free_boundary_nodes(const Grid& g, const std::vector<std::uint8_t>& contact) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (contact[k] || g.on_boundary(k)) continue;
        const MultiIndex x = g.multi(k);
        bool adjacent = false;
        for (int i = 0; i < g.dim() && !adjacent; ++i) {
            adjacent = (x[i] > 0 && contact[k - g.stride(i)]) || (x[i] + 1 < g.count(i) && contact[k + g.stride(i)]);
        }
        if (adjacent) out.push_back(k);
    }
    return out;
}

FreeBoundaryLabel density_label(const std::vector<double>& density, const AnalysisSettings& cfg) {
    if (density.empty()) return FreeBoundaryLabel::Indeterminate;
    const double d = density.front();
    if (d >= cfg.regular_threshold) return FreeBoundaryLabel::Regular;
    if (d <= cfg.singular_threshold) return FreeBoundaryLabel::Singular;
    return FreeBoundaryLabel::Indeterminate;
}

std::vector<double> physical_radii(const Grid& g, const AnalysisSettings& cfg) {
    std::vector<double> radii;
    for (double r : cfg.density_radii) {
        if (r < 2.0) throw ValidationError("density radii must be at least 2 spacings");
        radii.push_back(r * g.max_spacing());
    }
    std::sort(radii.begin(), radii.end());
    return radii;
}

FreeBoundaryReport classify_free_boundary(const GridField& u, const InterventionResult& m,
                                          const std::vector<std::uint8_t>& contact, double eps_contact,
                                          const AnalysisSettings& cfg) {
    const Grid& g = u.grid();
    const int n = g.dim();
    if (contact.size() != g.size() || m.argmin.size() != g.size()) {
        throw ShapeError("classification inputs disagree with the grid");
    }
    FreeBoundaryReport r;
    r.eps_contact = eps_contact;
    r.radii = physical_radii(g, cfg);

    std::vector<int> cls_of(g.size(), -1);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!contact[k]) continue;
        ContactNodeInfo c;
        c.node = k;
        c.xi = m.argmin[k];
        c.cls = classify_argmin(c.xi, n, &c.edge_axis);
        cls_of[k] = static_cast<int>(c.cls);
        switch (c.cls) {
            case ArgminClass::Interior: ++r.interior_argmin; break;
            case ArgminClass::Edge: ++r.edge_argmin; break;
            case ArgminClass::Mixed: ++r.mixed_argmin; break;
        }
        if (c.cls == ArgminClass::Interior) {
            c.local_checked = true;
            double delta = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) delta = std::min(delta, c.xi[i] * g.spacing(i));
            c.delta = delta;
            double lo = m.cone_min[k], hi = m.cone_min[k];
            for_ball(g, k, 0.5 * delta, [&](std::size_t y) {
                lo = std::min(lo, m.cone_min[y]);
                hi = std::max(hi, m.cone_min[y]);
            });
            c.spread = hi - lo;
            c.local_ok = c.spread <= 2.0 * eps_contact;
            if (!c.local_ok) ++r.local_constancy_failures;
        }
        r.contact.push_back(c);
    }

    if (n >= 3) {
        r.labeling_refused = true;
        r.refusal =
            "free-boundary labeling needs n <= 2: for n >= 3 the cone splits into faces with 2..n-1 positive "
            "components that the interior/edge decomposition does not cover";
        return r;
    }

    for (std::size_t k : free_boundary_nodes(g, contact)) {
        FreeBoundaryNodeInfo b;
        b.node = k;
        const MultiIndex x = g.multi(k);
        bool near_interior = false;
        std::optional<std::size_t> edge_neighbor;
        for (int i = 0; i < n; ++i) {
            for (int s : {-1, 1}) {
                const int xi = x[i] + s;
                if (xi < 0 || xi >= g.count(i)) continue;
                const std::size_t nb = s < 0 ? k - g.stride(i) : k + g.stride(i);
                if (!contact[nb]) continue;
                if (cls_of[nb] == static_cast<int>(ArgminClass::Edge)) {
                    if (!edge_neighbor) edge_neighbor = nb;
                } else if (cls_of[nb] == static_cast<int>(ArgminClass::Interior)) {
                    near_interior = true;
                }
            }
        }
        b.density = density_profile(g, contact, k, r.radii);
        if (edge_neighbor) {
            b.label = FreeBoundaryLabel::Degenerate;
            const std::size_t xc = *edge_neighbor;
            int axis = -1;
            classify_argmin(m.argmin[xc], n, &axis);
            MultiIndex y = g.multi(xc);
            for (int i = 0; i < kMaxDim; ++i) y[i] += m.argmin[xc][i];
            if (!g.on_boundary(y)) {
                const std::size_t yk = g.linear(y);
                const double h = g.spacing(axis);
                const double up = u[yk + g.stride(axis)];
                const double down = u[yk - g.stride(axis)];
                b.first_order_checked = true;
                b.derivative = (up - down) / (2.0 * h);
                const double curv = std::abs(up + down - 2.0 * u[yk]) / (h * h);
                b.derivative_bound = 0.5 * h * curv + 1e-12 * std::max(1.0, std::abs(u[yk])) / h;
                b.first_order_ok = std::abs(b.derivative) <= b.derivative_bound;
                if (!b.first_order_ok) ++r.first_order_failures;
            }
        } else if (near_interior) {
            b.label = density_label(b.density, cfg);
        } else {
            b.label = FreeBoundaryLabel::Indeterminate;
        }
        switch (b.label) {
            case FreeBoundaryLabel::Regular: ++r.regular; break;
            case FreeBoundaryLabel::Singular: ++r.singular; break;
            case FreeBoundaryLabel::Degenerate: ++r.degenerate; break;
            case FreeBoundaryLabel::Indeterminate: ++r.indeterminate; break;
        }
        r.boundary.push_back(std::move(b));
    }
    return r;
}

FreeBoundaryReport classify_free_boundary(const QVISolution& sol, const AnalysisSettings& cfg) {
    return classify_free_boundary(sol.u, sol.intervention, sol.contact, sol.eps_contact, cfg);
}

Claim7Report claim7_check(const QVISolution& sol, const Problem& p, const FreeBoundaryReport& fb) {
    Claim7Report r;
    const bool laplacian_form = p.form == ProblemForm::LaplacianGe && p.reaction.is_literal(0.0) &&
                                std::all_of(p.drift.begin(), p.drift.end(), [](const Expr& e) { return e.is_literal(0.0); });
    bool identity = true;
    for (int i = 0; i < p.dim; ++i)
        for (int j = 0; j < p.dim; ++j) identity = identity && p.a(i, j).is_literal(i == j ? 1.0 : 0.0);
    if (!laplacian_form || !identity) {
        r.refused = true;
        r.reason = "the contact-point sign check applies only to problems declared as Δu >= f with a = I, b = 0, c = 0";
        return r;
    }
    const Grid& g = sol.u.grid();
    double inv_h2 = 0.0;
    for (int i = 0; i < g.dim(); ++i) inv_h2 += 1.0 / (g.spacing(i) * g.spacing(i));
    // L_h u <= f + residual gives Δ_h u >= f5 - residual; u <= M u with
    // M u flat near the node gives Δ_h u <= O(eps_contact / h^2).
    r.slack_lower = 2.0 * sol.fixed_point_residual + 1e-12 * inv_h2;
    r.slack_upper = 10.0 * sol.eps_contact * inv_h2;
    r.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& c : fb.contact) {
        if (c.cls != ArgminClass::Interior || g.on_boundary(c.node)) continue;
        const Point pt = g.point(c.node);
        Claim7Entry e;
        e.node = c.node;
        e.f5 = p.data.eval(std::span<const double>(pt.data(), static_cast<std::size_t>(g.dim())));
        e.laplacian = discrete_laplacian(sol.u, g.multi(c.node));
        e.lower_ok = e.f5 <= e.laplacian + r.slack_lower;
        e.upper_ok = e.laplacian <= r.slack_upper;
        e.strict_ok = e.f5 < 0.0;
        if (!(e.lower_ok && e.upper_ok && e.strict_ok)) ++r.counterexamples;
        r.min_margin = std::min(r.min_margin, -e.f5);
        r.entries.push_back(e);
    }
    r.vacuous = r.entries.empty();
    if (r.vacuous) r.min_margin = 0.0;
    return r;
}

RegularityLevel regularity_level(const QVISolution& sol, const AnalysisSettings& cfg) {
    const Grid& g = sol.u.grid();
    RegularityLevel lvl;
    lvl.counts = g.describe();
    lvl.nodes = g.size();
    lvl.spacing = g.max_spacing();
    lvl.semiconcavity = semiconcavity_scan(sol.intervention.mu, cfg.max_steps);
    const double r_probe = cfg.r_probe > 0.0 ? cfg.r_probe : 4.0 * g.max_spacing();
    lvl.d2 = second_difference_bounds(sol.u, sol.intervention.mu, sol.contact, r_probe, cfg.max_steps,
                                      sol.eps_contact);
    lvl.laplacian = laplacian_bounds_on_contact(sol.u, sol.contact);
    lvl.contact_nodes = static_cast<std::size_t>(std::count(sol.contact.begin(), sol.contact.end(), 1));
    double h_min = g.spacing(0);
    for (int i = 1; i < g.dim(); ++i) h_min = std::min(h_min, g.spacing(i));
    lvl.noise = 10.0 * sol.eps_contact / (h_min * h_min);
    return lvl;
}

double max_growth(const std::vector<double>& values, double floor) {
    double worst = 1.0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double prev = values[i - 1], next = values[i];
        if (std::abs(prev) <= floor && std::abs(next) <= floor) continue;
        if (std::abs(prev) <= floor) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, next / prev);
    }
    return worst;
}

}  // namespace qvi
