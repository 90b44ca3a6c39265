#include "qvi/problem.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "qvi/discrete_operator.hpp"
#include "qvi/errors.hpp"
#include "qvi/field_io.hpp"
#include "qvi/intervention.hpp"

namespace qvi {

const char* to_string(ProblemForm f) {
    return f == ProblemForm::Standard ? "standard" : "laplacian_ge";
}

std::string node_label(const Grid& g, std::size_t node) {
    const MultiIndex idx = g.multi(node);
    const Point p = g.point(idx);
    std::string s = "node (";
    for (int i = 0; i < g.dim(); ++i) s += (i ? "," : "") + std::to_string(idx[i]);
    s += ") at x=(";
    for (int i = 0; i < g.dim(); ++i) s += (i ? "," : "") + format_real(p[i]);
    return s + ")";
}

Problem Problem::standard(int dim, const std::vector<std::string>& a, const std::vector<std::string>& b,
                          const std::string& c, double c0, const std::string& f, const std::string& phi) {
    Problem p;
    p.dim = dim;
    p.form = ProblemForm::Standard;
    if (a.empty()) {
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) p.diffusion.push_back(Expr::literal(i == j ? 1.0 : 0.0, dim));
    } else {
        for (const auto& t : a) p.diffusion.push_back(parse_expression(t, dim));
    }
    if (b.empty()) {
        for (int i = 0; i < dim; ++i) p.drift.push_back(Expr::literal(0.0, dim));
    } else {
        for (const auto& t : b) p.drift.push_back(parse_expression(t, dim));
    }
    p.reaction = parse_expression(c, dim);
    p.c0 = c0;
    p.data = parse_expression(f, dim);
    p.cost = parse_expression(phi, dim);
    p.check_shape();
    return p;
}

Problem Problem::laplacian_ge(int dim, const std::string& f5, const std::string& phi, double c0) {
    Problem p = standard(dim, {}, {}, "0", c0, f5, phi);
    p.form = ProblemForm::LaplacianGe;
    return p;
}

void Problem::check_shape() const {
    if (dim < 1 || dim > kMaxDim) throw ShapeError("problem dimension must be 1..3");
    if (diffusion.size() != static_cast<std::size_t>(dim * dim)) {
        throw ShapeError("diffusion needs " + std::to_string(dim * dim) + " entries");
    }
    if (drift.size() != static_cast<std::size_t>(dim)) {
        throw ShapeError("drift needs " + std::to_string(dim) + " entries");
    }
    auto same = [&](const Expr& e, const char* what) {
        if (e.dim() != dim) throw ShapeError(std::string(what) + " declared for another dimension");
    };
    for (const auto& e : diffusion) same(e, "diffusion entry");
    for (const auto& e : drift) same(e, "drift entry");
    same(reaction, "c");
    same(data, "f");
    same(cost, "phi");
}

namespace {

double eval_at(const Expr& e, const Grid& g, std::size_t node, const std::string& what) {
    const Point p = g.point(node);
    try {
        return e.eval(std::span<const double>(p.data(), static_cast<std::size_t>(g.dim())));
    } catch (const EvalError& err) {
        throw ValidationError(what + ": " + err.what(), node_label(g, node));
    }
}

}  // namespace

SampledProblem sample(const Problem& p, const Grid& g) {
    p.check_shape();
    if (g.dim() != p.dim) throw ShapeError("problem and grid dimensions differ");
    SampledProblem s{g, p.dim, {}, {}, {}, {}, {}, {}};
    const std::size_t N = g.size();
    const int n = p.dim;
    s.a.resize(N * static_cast<std::size_t>(n * n));
    s.b.resize(N * static_cast<std::size_t>(n));
    s.c.resize(N);
    s.source.resize(N);
    s.data.resize(N);
    s.phi.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                s.a[k * n * n + i * n + j] =
                    eval_at(p.a(i, j), g, k, "a" + std::to_string(i + 1) + std::to_string(j + 1));
            }
            s.b[k * n + i] = eval_at(p.drift[i], g, k, "b" + std::to_string(i + 1));
        }
        s.c[k] = eval_at(p.reaction, g, k, "c");
        s.data[k] = eval_at(p.data, g, k, "f");
        s.source[k] = p.form == ProblemForm::LaplacianGe ? -s.data[k] : s.data[k];
        s.phi[k] = eval_at(p.cost, g, k, "phi");
    }
    return s;
}

GridField SampledProblem::source_field() const { return GridField(grid, source, "f"); }
GridField SampledProblem::data_field() const { return GridField(grid, data, "data"); }
GridField SampledProblem::phi_field() const { return GridField(grid, phi, "phi"); }

std::optional<std::pair<std::size_t, std::size_t>> cone_monotone_violation(const GridField& f) {
    // f is cone-nondecreasing iff it equals its own cone suffix minimum.
    const ConeMin cm = cone_suffix_min(f);
    const Grid& g = f.grid();
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (cm.value[k] < f[k]) {
            MultiIndex y = g.multi(k);
            for (int i = 0; i < kMaxDim; ++i) y[i] += cm.argmin[k][i];
            return std::make_pair(k, g.linear(y));
        }
    }
    return std::nullopt;
}

std::optional<std::pair<std::size_t, std::size_t>> cone_decreasing_violation(const GridField& phi) {
    std::vector<double> neg(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) neg[k] = -phi[k];
    return cone_monotone_violation(GridField(phi.grid(), std::move(neg)).renamed("-phi")) ;
}

const ValidationFlag& ValidationReport::flag(const std::string& name) const {
    for (const auto& f : flags) {
        if (f.name == name) return f;
    }
    throw Error("validation report has no flag '" + name + "'");
}

bool ValidationReport::hard_ok() const {
    return std::all_of(flags.begin(), flags.end(), [](const ValidationFlag& f) { return f.passed || !f.hard; });
}

bool ValidationReport::guarantees_valid() const {
    static const char* needed[] = {"c_lower_bound", "c0_positive",   "a_symmetric", "a_positive_definite",
                                   "m_matrix",      "coercive",      "f_lower_bound", "f_nonnegative",
                                   "phi_positive"};
    for (const char* name : needed) {
        if (!flag(name).passed) return false;
    }
    return true;
}

std::string ValidationReport::first_hard_failure() const {
    for (const auto& f : flags) {
        if (f.hard && !f.passed) return f.name + ": " + f.detail + (f.witness.empty() ? "" : " [" + f.witness + "]");
    }
    return {};
}

ValidationReport validate_assumptions(const Problem& p, const Grid& g) {
    return validate_assumptions(p, sample(p, g));
}

ValidationReport validate_assumptions(const Problem& p, const SampledProblem& s) {
    const Grid& g = s.grid;
    const int n = s.dim;
    const std::size_t N = g.size();
    ValidationReport r;

    auto add = [&](std::string name, bool hard, bool passed, std::string witness, std::string detail) {
        r.flags.push_back({std::move(name), passed, hard, std::move(witness), std::move(detail)});
    };

    // c >= c0 everywhere.
    {
        std::size_t worst = 0;
        double cmin = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < N; ++k) {
            if (s.c[k] < cmin) {
                cmin = s.c[k];
                worst = k;
            }
        }
        r.c_min = cmin;
        const bool ok = cmin >= p.c0;
        add("c_lower_bound", true, ok, ok ? "" : node_label(g, worst),
            "min c = " + format_real(cmin) + ", c0 = " + format_real(p.c0));
        add("c0_nonnegative", true, p.c0 >= 0.0, "", "c0 = " + format_real(p.c0));
        add("c0_positive", false, p.c0 > 0.0, "", "c0 = " + format_real(p.c0));
    }

    // Symmetric, positive-definite diffusion.
    {
        std::size_t sym_bad = N, pd_bad = N;
        double min_eig = std::numeric_limits<double>::infinity();
        Eigen::MatrixXd a(n, n);
        for (std::size_t k = 0; k < N; ++k) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a(i, j) = s.a_at(k, i, j);
            if (sym_bad == N) {
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j)
                        if (a(i, j) != a(j, i)) sym_bad = k;
            }
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
            const double e = es.eigenvalues()(0);
            if (e < min_eig) {
                min_eig = e;
                if (!(e > 0.0)) pd_bad = k;
            }
        }
        r.min_eigenvalue = min_eig;
        add("a_symmetric", true, sym_bad == N, sym_bad == N ? "" : node_label(g, sym_bad), "a_ij == a_ji at every node");
        add("a_positive_definite", true, pd_bad == N, pd_bad == N ? "" : node_label(g, pd_bad),
            "smallest eigenvalue = " + format_real(min_eig));
    }

    // Source bounds, on the right-hand side actually solved against.
    {
        const double bound = p.c0 > 0.0 ? -1.0 / p.c0 : -std::numeric_limits<double>::infinity();
        std::size_t low = N, neg = N;
        for (std::size_t k = 0; k < N; ++k) {
            if (low == N && s.source[k] < bound) low = k;
            if (neg == N && s.source[k] < 0.0) neg = k;
        }
        add("f_lower_bound", false, low == N, low == N ? "" : node_label(g, low), "f >= -1/c0");
        add("f_nonnegative", false, neg == N, neg == N ? "" : node_label(g, neg),
            "f >= 0 (makes 0 a subsolution of every obstacle step)");
    }

    // Cone monotonicity of the declared data.
    {
        const auto v = cone_monotone_violation(s.data_field());
        add("f_cone_monotone", false, !v, v ? node_label(g, v->first) + " vs " + node_label(g, v->second) : "",
            "f(x) <= f(x + xi) for all xi >= 0");
    }

    // Intervention cost.
    {
        std::size_t bad = N;
        for (std::size_t k = 0; k < N && bad == N; ++k)
            if (!(s.phi[k] > 0.0)) bad = k;
        add("phi_positive", true, bad == N, bad == N ? "" : node_label(g, bad), "phi > 0");
        const auto v = cone_decreasing_violation(s.phi_field());
        add("phi_cone_decreasing", false, !v, v ? node_label(g, v->first) + " vs " + node_label(g, v->second) : "",
            "phi(x + xi) <= phi(x) for all xi >= 0");
    }

    // Discrete monotonicity and coercivity of the assembled stencil.
    try {
        const DiscreteOperator op = assemble_operator(s, p.c0);
        const auto& cert = op.certificate();
        r.coercivity_gamma = cert.gamma;
        add("m_matrix", true, cert.granted, cert.granted ? "" : node_label(g, cert.worst_node),
            cert.granted ? "center > 0, neighbors <= 0, row sums >= c0" : cert.detail);
        add("coercive", false, cert.granted && cert.gamma > 0.0, "",
            "diagonal dominance margin gamma_h = " + format_real(cert.gamma));
    } catch (const NonMonotoneStencil& e) {
        add("m_matrix", true, false, node_label(g, e.node()), e.what());
        add("coercive", false, false, "", "stencil is not monotone");
    }
    return r;
}

}  // namespace qvi
