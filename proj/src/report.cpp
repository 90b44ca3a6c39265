#include "qvi/report.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "qvi/errors.hpp"

namespace qvi {

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << bytes;
    if (!out) throw Error("write failed: " + path);
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

std::vector<double> to_vector(const GridField& f) { return {f.values().begin(), f.values().end()}; }

Json grid_json(const Grid& g) {
    Json j;
    j["dim"] = g.dim();
    for (int i = 0; i < g.dim(); ++i) {
        j["counts"].push_back(g.count(i));
        j["bounds"].push_back({g.bounds(i).lo, g.bounds(i).hi});
        j["spacing"].push_back(g.spacing(i));
    }
    return j;
}

Json node_json(const Grid& g, std::size_t node) {
    const MultiIndex idx = g.multi(node);
    Json j = Json::array();
    for (int i = 0; i < g.dim(); ++i) j.push_back(idx[i]);
    return j;
}

namespace {

Json offset_json(const Offset& o, int dim) {
    Json j = Json::array();
    for (int i = 0; i < dim; ++i) j.push_back(o[i]);
    return j;
}

}  // namespace

Json to_json(const ValidationReport& r) {
    Json j;
    j["c_min"] = r.c_min;
    j["min_eigenvalue"] = r.min_eigenvalue;
    j["coercivity_gamma"] = r.coercivity_gamma;
    j["hard_ok"] = r.hard_ok();
    j["guarantees_valid"] = r.guarantees_valid();
    j["flags"] = Json::array();
    for (const auto& f : r.flags) {
        j["flags"].push_back({{"name", f.name},
                              {"passed", f.passed},
                              {"hard", f.hard},
                              {"witness", f.witness},
                              {"detail", f.detail}});
    }
    return j;
}

Json to_json(const ConvergenceModel& m) {
    return {{"mu", m.mu}, {"u0_norm", m.u0_norm}};
}

Json to_json(const IterationTrace& t) {
    Json j;
    j["u0_norm"] = t.u0_norm;
    j["slack"] = t.slack;
    Json diff = Json::array(), norm = Json::array(), mono = Json::array(), bound = Json::array(),
         inner = Json::array(), res = Json::array();
    for (const auto& s : t.steps) {
        diff.push_back(s.diff);
        norm.push_back(s.norm_next);
        mono.push_back(s.monotone_ok);
        bound.push_back(s.bound_ok);
        inner.push_back(s.inner_iterations);
        res.push_back(s.inner_residual);
    }
    j["sup_dist"] = diff;
    j["sup_norm_next"] = norm;
    j["monotone_ok"] = mono;
    j["bound_ok"] = bound;
    j["inner_iterations"] = inner;
    j["inner_residual"] = res;
    j["iterates"] = Json::array();
    for (const auto& u : t.iterates) j["iterates"].push_back(to_vector(u));
    return j;
}

Json to_json(const ChainReport& r) {
    Json j;
    j["passed"] = r.passed;
    j["failure"] = r.failure;
    j["failing_n"] = r.failing_n;
    j["witness"] = r.witness ? Json(*r.witness) : Json(nullptr);
    j["checked_iterates"] = r.checked_iterates;
    j["checked_steps"] = r.checked_steps;
    return j;
}

Json to_json(const SecondDifferenceBounds& b, const Grid& g) {
    Json j;
    j["vacuous"] = b.vacuous;
    j["k_est"] = b.k_est;
    j["c_est"] = b.c_est;
    j["probe_nodes"] = b.probe_nodes;
    j["contact_checks"] = b.contact_checks;
    j["contact_violations"] = b.contact_violations;
    j["worst_excess"] = b.worst_excess;
    j["witness"] = b.witness ? node_json(g, *b.witness) : Json(nullptr);
    return j;
}

Json to_json(const LaplacianRange& r) {
    return {{"vacuous", r.vacuous}, {"lo", r.lo}, {"hi", r.hi}, {"nodes", r.nodes}};
}

Json to_json(const RegularityLevel& l, const Grid& g) {
    Json j;
    j["counts"] = l.counts;
    j["nodes"] = l.nodes;
    j["spacing"] = l.spacing;
    j["semiconcavity"] = l.semiconcavity;
    j["second_differences"] = to_json(l.d2, g);
    j["laplacian_on_contact"] = to_json(l.laplacian);
    j["contact_nodes"] = l.contact_nodes;
    j["noise_floor"] = l.noise;
    return j;
}

Json to_json(const FreeBoundaryReport& r, const Grid& g) {
    Json j;
    j["labeling_refused"] = r.labeling_refused;
    j["refusal"] = r.refusal;
    j["radii"] = r.radii;
    j["eps_contact"] = r.eps_contact;
    j["counts"] = {{"interior_argmin", r.interior_argmin},
                   {"edge_argmin", r.edge_argmin},
                   {"mixed_argmin", r.mixed_argmin},
                   {"regular", r.regular},
                   {"singular", r.singular},
                   {"degenerate", r.degenerate},
                   {"indeterminate", r.indeterminate},
                   {"local_constancy_failures", r.local_constancy_failures},
                   {"first_order_failures", r.first_order_failures}};
    j["contact"] = Json::array();
    for (const auto& c : r.contact) {
        Json e{{"node", node_json(g, c.node)}, {"xi", offset_json(c.xi, g.dim())}, {"class", to_string(c.cls)}};
        if (c.cls == ArgminClass::Edge) e["axis"] = c.edge_axis + 1;
        if (c.local_checked) {
            e["local_constancy"] = {{"delta", c.delta}, {"spread", c.spread}, {"ok", c.local_ok}};
        }
        j["contact"].push_back(e);
    }
    j["free_boundary"] = Json::array();
    for (const auto& b : r.boundary) {
        Json e{{"node", node_json(g, b.node)}, {"label", to_string(b.label)}, {"density", b.density}};
        if (b.first_order_checked) {
            e["first_order"] = {{"derivative", b.derivative}, {"bound", b.derivative_bound}, {"ok", b.first_order_ok}};
        }
        j["free_boundary"].push_back(e);
    }
    return j;
}

Json to_json(const Claim7Report& r, const Grid& g) {
    Json j;
    j["refused"] = r.refused;
    j["reason"] = r.reason;
    j["vacuous"] = r.vacuous;
    j["counterexamples"] = r.counterexamples;
    j["min_margin"] = r.min_margin;
    j["slack_lower"] = r.slack_lower;
    j["slack_upper"] = r.slack_upper;
    j["nodes"] = Json::array();
    for (const auto& e : r.entries) {
        j["nodes"].push_back({{"node", node_json(g, e.node)},
                              {"f5", e.f5},
                              {"laplacian", e.laplacian},
                              {"lower_ok", e.lower_ok},
                              {"upper_ok", e.upper_ok},
                              {"strict_ok", e.strict_ok}});
    }
    return j;
}

}  // namespace qvi
