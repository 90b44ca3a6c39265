#include "qvi/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "qvi/analysis.hpp"
#include "qvi/config.hpp"
#include "qvi/errors.hpp"
#include "qvi/field_io.hpp"
#include "qvi/intervention.hpp"
#include "qvi/obstacle.hpp"
#include "qvi/qvi_scheme.hpp"
#include "qvi/report.hpp"

namespace fs = std::filesystem;

namespace qvi {

namespace {

constexpr const char* kArtifacts[] = {"u.csv",           "mu.csv",      "contact.csv",   "density.csv",
                                      "trace.json",      "verify.json", "regularity.json",
                                      "freeboundary.json", "oracle.json"};

std::ostream& log_of(const CommandOptions& opt) { return opt.log ? *opt.log : std::cerr; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path output_dir(const CommandOptions& opt, const fs::path& fallback) {
    fs::path out = opt.out_dir.empty() ? fallback : fs::path(opt.out_dir);
    fs::create_directories(out);
    return out;
}

std::string field_csv(const GridField& f) {
    std::ostringstream os;
    write_field_csv(os, f);
    return os.str();
}

GridField mask_field(const Grid& g, const std::vector<std::uint8_t>& mask, const std::string& name) {
    std::vector<double> v(mask.begin(), mask.end());
    return GridField(g, std::move(v), name);
}

// Records the command in manifest.json next to content hashes of every
// artifact present. Wall-clock timings live only here.
void update_manifest(const fs::path& dir, const std::string& command, const std::string& config_text,
                     const Json& inputs, double seconds) {
    const fs::path path = dir / "manifest.json";
    Json m = Json::object();
    if (fs::exists(path)) {
        try {
            m = Json::parse(read_file(path.string()));
        } catch (const std::exception&) {
            m = Json::object();
        }
    }
    m["tool_version"] = kToolVersion;
    m["command"] = command;
    m["config"] = config_text;
    m["runs"][command] = {{"inputs", inputs}, {"seconds", seconds}};
    Json outputs = Json::object();
    for (const char* name : kArtifacts) {
        const fs::path p = dir / name;
        if (fs::exists(p)) outputs[name] = sha256_hex(read_file(p.string()));
    }
    m["outputs"] = outputs;
    write_file(path.string(), dump_json(m));
}

Json solver_json(const SolverSettings& s) {
    return {{"tol_inner", s.tol_inner},
            {"tol_res", s.tol_res},
            {"omega_relax", s.omega_relax},
            {"max_sweeps", s.max_sweeps},
            {"inner_method", to_string(s.inner_method)},
            {"tol_outer", s.tol_outer},
            {"max_outer", s.max_outer},
            {"persist_iterates", s.persist_iterates},
            {"max_policy_iterations", s.max_policy_iterations}};
}

struct RunInputs {
    RunConfig config;
    Json trace;
    GridField u;
};

// Loads the artifacts a finished solve leaves behind. Throws Error when
// something is missing or unreadable.
RunInputs load_run(const fs::path& dir) {
    for (const char* name : {"trace.json", "u.csv"}) {
        if (!fs::exists(dir / name)) throw Error(std::string("missing artifact ") + (dir / name).string());
    }
    Json trace = Json::parse(read_file((dir / "trace.json").string()));
    if (!trace.contains("config")) throw Error("trace.json has no config echo");
    RunConfig cfg = parse_config(trace["config"].get<std::string>());
    GridField u = load_field((dir / "u.csv").string(), "u");
    if (u.grid() != cfg.grid) throw Error("u.csv grid does not match the configured grid");
    return {std::move(cfg), std::move(trace), std::move(u)};
}

}  // namespace

int cmd_solve(const std::string& config_path, const CommandOptions& opt) {
    std::ostream& log = log_of(opt);
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<RunConfig> cfg;
    try {
        cfg.emplace(load_config(config_path));
    } catch (const Error& e) {
        log << "qvi solve: " << e.what() << '\n';
        return kExitInput;
    }
    const std::uint64_t seed = opt.seed.value_or(cfg->seed);
    const fs::path out = output_dir(opt, "qvi_out");
    const Json inputs{{"config", sha256_hex(cfg->text)}};

    std::optional<PreparedProblem> pp;
    try {
        pp.emplace(prepare(cfg->problem, cfg->grid));
    } catch (const ValidationError& e) {
        log << "qvi solve: " << e.what();
        if (!e.witness().empty()) log << " at " << e.witness();
        log << '\n';
        return kExitInput;
    } catch (const Error& e) {
        log << "qvi solve: " << e.what() << '\n';
        return kExitInput;
    }

    Json trace;
    trace["config"] = cfg->text;
    trace["seed"] = seed;
    trace["grid"] = grid_json(cfg->grid);
    trace["form"] = to_string(cfg->problem.form);
    trace["solver"] = solver_json(cfg->solver);
    trace["validation"] = to_json(pp->validation);
    trace["guarantees_valid"] = pp->validation.guarantees_valid();

    std::optional<QVISolution> sol;
    int code = kExitOk;
    try {
        sol.emplace(solve_qvi(*pp, cfg->solver));
        trace["status"] = "converged";
    } catch (const QviNonConvergence& e) {
        sol.emplace(e.partial());
        trace["status"] = "outer_cap";
        trace["message"] = e.what();
        log << "qvi solve: " << e.what() << '\n';
        code = kExitNonConvergence;
    } catch (const NonConvergence& e) {
        trace["status"] = "inner_nonconvergence";
        trace["message"] = e.what();
        trace["history"] = e.history();
        log << "qvi solve: " << e.what() << '\n';
        write_file((out / "trace.json").string(), dump_json(trace));
        update_manifest(out, "solve", cfg->text, inputs, seconds_since(t0));
        return kExitNonConvergence;
    } catch (const Error& e) {
        log << "qvi solve: " << e.what() << '\n';
        return kExitInput;
    }

    const Grid& g = cfg->grid;
    const std::string u_csv = field_csv(sol->u);
    const std::string mu_csv = field_csv(sol->intervention.mu.renamed("mu"));
    const std::string contact_csv = field_csv(mask_field(g, sol->contact, "contact"));
    write_file((out / "u.csv").string(), u_csv);
    write_file((out / "mu.csv").string(), mu_csv);
    write_file((out / "contact.csv").string(), contact_csv);

    trace["converged"] = sol->converged;
    trace["model"] = to_json(sol->model);
    trace["thetas"] = sol->model.thetas(static_cast<int>(sol->trace.steps.size()));
    trace["trace"] = to_json(sol->trace);
    trace["outer_iterations"] = sol->trace.steps.size();
    trace["fixed_point_residual"] = sol->fixed_point_residual;
    trace["eps_contact"] = sol->eps_contact;
    trace["u_sup_norm"] = sup_norm(sol->u);
    trace["contact_nodes"] = std::count(sol->contact.begin(), sol->contact.end(), 1);
    trace["hashes"] = {{"u.csv", sha256_hex(u_csv)}, {"mu.csv", sha256_hex(mu_csv)}, {"contact.csv", sha256_hex(contact_csv)}};
    write_file((out / "trace.json").string(), dump_json(trace));
    update_manifest(out, "solve", cfg->text, inputs, seconds_since(t0));

    log << "qvi solve: " << trace["status"].get<std::string>() << " after " << sol->trace.steps.size()
        << " outer steps, residual " << format_real(sol->fixed_point_residual) << ", "
        << trace["contact_nodes"].get<long>() << " contact nodes\n";
    return code;
}

int cmd_verify(const std::string& run_dir, const CommandOptions& opt) {
    std::ostream& log = log_of(opt);
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<RunInputs> run;
    std::optional<PreparedProblem> pp;
    try {
        run.emplace(load_run(run_dir));
        pp.emplace(prepare(run->config.problem, run->config.grid));
    } catch (const std::exception& e) {
        log << "qvi verify: " << e.what() << '\n';
        return kExitInput;
    }
    const fs::path out = output_dir(opt, run_dir);
    const RunConfig& cfg = run->config;
    const Grid& g = cfg.grid;
    const GridField& u = run->u;
    const double tol = cfg.solver.tol_res;

    Json checks = Json::object();
    bool all = true;
    auto record = [&](const std::string& name, bool passed, Json detail) {
        detail["passed"] = passed;
        checks[name] = detail;
        all = all && passed;
    };

    const InterventionResult m = apply_intervention(u, pp->phi);
    const double fpr = complementarity_residual(pp->op, pp->source, m.mu, u);
    record("fixed_point_residual", fpr <= tol, {{"value", fpr}, {"tolerance", tol}});

    double lin_excess = 0.0, obs_excess = 0.0, product = 0.0;
    for (std::size_t k : pp->op.interior_nodes()) {
        const double lin = pp->op.apply_at(u.values(), k) - pp->source[k];
        const double gap = m.mu[k] - u[k];
        lin_excess = std::max(lin_excess, lin);
        obs_excess = std::max(obs_excess, -gap);
        product = std::max(product, std::min(std::abs(lin), std::abs(gap)));
    }
    record("complementarity", lin_excess <= tol && obs_excess <= tol && product <= tol,
           {{"max_Lu_minus_f", lin_excess}, {"max_u_minus_Mu", obs_excess}, {"max_min_gap", product}, {"tolerance", tol}});

    // Stored fields must be what the stored u implies.
    bool boundary_ok = true;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (g.on_boundary(k) && u[k] != 0.0) boundary_ok = false;
    record("boundary_values", boundary_ok, Json::object());
    try {
        const GridField mu_file = load_field((fs::path(run_dir) / "mu.csv").string());
        const GridField contact_file = load_field((fs::path(run_dir) / "contact.csv").string());
        const auto mask = contact_mask(u, m.mu);
        bool contact_same = contact_file.grid() == g;
        for (std::size_t k = 0; contact_same && k < g.size(); ++k) contact_same = contact_file[k] == mask[k];
        const double mu_dev = mu_file.grid() == g ? sup_dist(mu_file, m.mu) : INFINITY;
        record("stored_mu", mu_dev == 0.0, {{"deviation", mu_dev}});
        record("stored_contact", contact_same, Json::object());
    } catch (const Error& e) {
        record("stored_mu", false, {{"error", e.what()}});
    }

    // Iterates persisted by the solve.
    std::vector<GridField> iterates;
    const Json& tr = run->trace["trace"];
    if (tr.contains("iterates")) {
        for (const auto& v : tr["iterates"]) iterates.emplace_back(g, v.get<std::vector<double>>());
    }
    IterationTrace trace;
    trace.iterates = iterates;
    trace.slack = default_chain_slack(cfg.solver);
    const std::vector<double> diffs = tr.value("sup_dist", std::vector<double>{});
    for (double d : diffs) {
        IterationStep s;
        s.diff = d;
        trace.steps.push_back(s);
    }
    bool recomputable = true;
    for (std::size_t n = 0; n + 1 < iterates.size() && n < diffs.size(); ++n) {
        if (sup_dist(iterates[n], iterates[n + 1]) != diffs[n]) recomputable = false;
    }
    record("trace_recomputable", recomputable, {{"iterates", iterates.size()}, {"steps", diffs.size()}});

    const bool guarantees = pp->validation.guarantees_valid();
    if (guarantees && !iterates.empty()) {
        const ConvergenceModel model = convergence_model(iterates.front());
        trace.u0_norm = model.u0_norm;
        const ChainReport chain = verify_chain(trace, model, true, trace.slack);
        Json detail = to_json(chain);
        detail["mu"] = model.mu;
        detail["slack"] = trace.slack;
        if (chain.witness) detail["witness_node"] = node_json(g, *chain.witness);
        record("chain", chain.passed, detail);
    } else {
        checks["chain"] = {{"passed", true},
                           {"skipped", true},
                           {"reason", guarantees ? "no persisted iterates"
                                                 : "standing assumptions (including f >= 0) do not all hold"}};
    }

    // Operator properties on the stored iterates and the final u.
    std::vector<GridField> fields = iterates;
    fields.push_back(u);
    const double arith = 1e-12;
    std::size_t pairs = 0, mono_bad = 0, nonexp_bad = 0, concave_bad = 0;
    for (std::size_t i = 0; i + 1 < fields.size(); ++i) {
        const GridField& a = fields[i];
        const GridField& b = fields[i + 1];
        const double scale = arith * std::max({1.0, sup_norm(a), sup_norm(b)});
        std::vector<double> lo(g.size()), mid(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            lo[k] = std::min(a[k], b[k]);
            mid[k] = 0.5 * (a[k] + b[k]);
        }
        const auto ma = apply_intervention(a, pp->phi).mu;
        const auto mb = apply_intervention(b, pp->phi).mu;
        const auto mlo = apply_intervention(GridField(g, lo), pp->phi).mu;
        const auto mmid = apply_intervention(GridField(g, mid), pp->phi).mu;
        ++pairs;
        if (sup_dist(ma, mb) > sup_dist(a, b) + scale) ++nonexp_bad;
        bool mono = true, concave = true;
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (mlo[k] > mb[k] + scale) mono = false;
            if (mmid[k] < 0.5 * (ma[k] + mb[k]) - scale) concave = false;
        }
        mono_bad += mono ? 0 : 1;
        concave_bad += concave ? 0 : 1;
    }
    record("operator_properties", mono_bad == 0 && nonexp_bad == 0 && concave_bad == 0,
           {{"pairs", pairs},
            {"monotone_violations", mono_bad},
            {"nonexpansive_violations", nonexp_bad},
            {"concavity_violations", concave_bad}});

    Json report{{"passed", all}, {"checks", checks}, {"guarantees_valid", guarantees}};
    write_file((out / "verify.json").string(), dump_json(report));
    update_manifest(out, "verify", cfg.text, {{"trace.json", sha256_hex(read_file((fs::path(run_dir) / "trace.json").string()))},
                                              {"u.csv", sha256_hex(read_file((fs::path(run_dir) / "u.csv").string()))}},
                    seconds_since(t0));
    if (!all) {
        for (const auto& [name, c] : checks.items())
            if (!c["passed"].get<bool>()) log << "qvi verify: check failed: " << name << '\n';
        return kExitCheckFailed;
    }
    log << "qvi verify: all checks passed\n";
    return kExitOk;
}

int cmd_analyze(const std::string& run_dir, const CommandOptions& opt) {
    std::ostream& log = log_of(opt);
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<RunInputs> run;
    std::optional<PreparedProblem> pp;
    try {
        run.emplace(load_run(run_dir));
        pp.emplace(prepare(run->config.problem, run->config.grid));
    } catch (const std::exception& e) {
        log << "qvi analyze: " << e.what() << '\n';
        return kExitInput;
    }
    const fs::path out = output_dir(opt, run_dir);
    const RunConfig& cfg = run->config;
    const Grid& g = cfg.grid;

    InterventionResult m = apply_intervention(run->u, pp->phi);
    auto contact = contact_mask(run->u, m.mu);
    const double eps = contact_tolerance(run->u);
    const double fpr = complementarity_residual(pp->op, pp->source, m.mu, run->u);
    QVISolution sol{run->u, std::move(m), std::move(contact), eps, fpr, {}, {}, pp->validation,
                    pp->validation.guarantees_valid(), true};

    // Refinement table: coarser levels are re-solved, the finest is the run itself.
    std::vector<Grid> grids{g};
    std::string stop;
    while (static_cast<int>(grids.size()) < cfg.analysis.refinement_levels) {
        try {
            grids.insert(grids.begin(), grids.front().coarsened());
        } catch (const Error& e) {
            stop = e.what();
            break;
        }
    }
    Json levels = Json::array();
    std::vector<double> semi, kk, cc, lap;
    double floor = 0.0;
    for (const Grid& lg : grids) {
        try {
            const bool finest = lg == g;
            std::optional<QVISolution> level;
            if (!finest) level.emplace(solve_qvi(cfg.problem, lg, cfg.solver));
            const QVISolution& s = finest ? sol : *level;
            const RegularityLevel r = regularity_level(s, cfg.analysis);
            levels.push_back(to_json(r, lg));
            semi.push_back(std::abs(r.semiconcavity));
            kk.push_back(std::abs(r.d2.k_est));
            cc.push_back(std::abs(r.d2.c_est));
            lap.push_back(std::max(std::abs(r.laplacian.lo), std::abs(r.laplacian.hi)));
            floor = std::max(floor, r.noise);
        } catch (const Error& e) {
            levels.push_back({{"counts", lg.describe()}, {"error", e.what()}});
        }
    }
    Json regularity;
    regularity["levels"] = levels;
    if (!stop.empty()) regularity["refinement_note"] = stop;
    regularity["growth"] = {{"semiconcavity", max_growth(semi, floor)},
                            {"k_est", max_growth(kk, floor)},
                            {"c_est", max_growth(cc, floor)},
                            {"laplacian_on_contact", max_growth(lap, floor)}};
    regularity["noise_floor"] = floor;
    regularity["growth_limit"] = 1.5;
    regularity["max_steps"] = cfg.analysis.max_steps;
    regularity["r_probe"] = cfg.analysis.r_probe > 0.0 ? cfg.analysis.r_probe : 4.0 * g.max_spacing();
    write_file((out / "regularity.json").string(), dump_json(regularity));

    FreeBoundaryReport fb = classify_free_boundary(sol, cfg.analysis);
    Json fbj = to_json(fb, g);
    fbj["thresholds"] = {{"regular", cfg.analysis.regular_threshold},
                         {"singular", cfg.analysis.singular_threshold},
                         {"note", "density thresholds are heuristics calibrated on synthetic masks; labels are not proofs"}};
    fbj["claim7"] = to_json(claim7_check(sol, cfg.problem, fb), g);
    write_file((out / "freeboundary.json").string(), dump_json(fbj));

    std::vector<std::size_t> nodes;
    std::vector<std::vector<std::string>> cols;
    for (const auto& b : fb.boundary) {
        nodes.push_back(b.node);
        std::vector<std::string> row{to_string(b.label)};
        for (double d : b.density) row.push_back(format_real(d));
        cols.push_back(std::move(row));
    }
    std::ostringstream dens;
    write_node_table(dens, g, nodes, cols);
    write_file((out / "density.csv").string(), dens.str());

    update_manifest(out, "analyze", cfg.text,
                    {{"trace.json", sha256_hex(read_file((fs::path(run_dir) / "trace.json").string()))},
                     {"u.csv", sha256_hex(read_file((fs::path(run_dir) / "u.csv").string()))}},
                    seconds_since(t0));
    if (fb.labeling_refused) log << "qvi analyze: " << fb.refusal << '\n';
    log << "qvi analyze: " << fb.contact.size() << " contact nodes, " << fb.boundary.size()
        << " free-boundary nodes\n";
    return kExitOk;
}

int cmd_oracle(const std::string& config_path, const CommandOptions& opt) {
    std::ostream& log = log_of(opt);
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<RunConfig> cfg;
    std::optional<PreparedProblem> pp;
    try {
        cfg.emplace(load_config(config_path));
        if (cfg->grid.size() > kBruteForceMaxNodes) {
            throw SizeGuardError("oracle refuses " + std::to_string(cfg->grid.size()) + " nodes (limit " +
                                 std::to_string(kBruteForceMaxNodes) + "); use a coarser grid in [domain] counts");
        }
        pp.emplace(prepare(cfg->problem, cfg->grid));
    } catch (const Error& e) {
        log << "qvi oracle: " << e.what() << '\n';
        return kExitInput;
    }
    const fs::path out = output_dir(opt, "qvi_out");
    const Grid& g = cfg->grid;
    const std::uint64_t seed = opt.seed.value_or(cfg->seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    Json report;
    report["seed"] = seed;
    report["grid"] = grid_json(g);
    bool all = true;

    // Cone suffix min against the quadrant scan; every other field is rounded
    // to create ties.
    {
        const int fields = 20;
        double dev = 0.0;
        std::size_t argmin_mismatch = 0;
        for (int t = 0; t < fields; ++t) {
            std::vector<double> v(g.size());
            for (double& x : v) x = t % 2 ? std::round(4.0 * unit(rng)) / 4.0 : unit(rng);
            const GridField u(g, std::move(v));
            const GridField phi = GridField::constant(g, 1.0);
            const auto fast = apply_intervention(u, phi);
            const auto slow = brute_force_intervention(u, phi);
            dev = std::max(dev, sup_dist(fast.mu, slow.mu));
            for (std::size_t k = 0; k < g.size(); ++k) argmin_mismatch += fast.argmin[k] != slow.argmin[k] ? 1 : 0;
        }
        const bool ok = dev == 0.0 && argmin_mismatch == 0;
        all = all && ok;
        report["intervention"] = {{"fields", fields},
                                  {"max_deviation", dev},
                                  {"argmin_mismatches", argmin_mismatch},
                                  {"tolerance", 0.0},
                                  {"passed", ok}};
    }

    // Projected SOR against policy iteration on random obstacles.
    try {
        SolverSettings tight = cfg->solver;
        tight.tol_inner = 1e-13;
        tight.tol_res = 1e-11;
        const double scale = 0.5 * std::max(1.0, sup_norm(solve_linear_direct(pp->op, pp->source)));
        std::uniform_real_distribution<double> level(0.05, 1.0);
        const int instances = 5;
        double dev = 0.0;
        for (int t = 0; t < instances; ++t) {
            std::vector<double> psi(g.size());
            for (double& x : psi) x = scale * level(rng);
            const GridField obstacle(g, std::move(psi));
            const VISolution a = solve_obstacle(pp->op, pp->source, obstacle, tight);
            const VISolution b = policy_iteration_solve(pp->op, pp->source, obstacle, tight);
            dev = std::max(dev, sup_dist(a.u, b.u));
        }
        const bool ok = dev <= 1e-9;
        all = all && ok;
        report["obstacle"] = {{"instances", instances}, {"max_deviation", dev}, {"tolerance", 1e-9}, {"passed", ok}};
    } catch (const Error& e) {
        all = false;
        report["obstacle"] = {{"passed", false}, {"error", e.what()}};
    }

    // Damped fixed point from zero against the successive approximations.
    try {
        const QVISolution s = solve_qvi(*pp, cfg->solver);
        const GridField w = independent_fixed_point(*pp, cfg->solver);
        const double dev = sup_dist(s.u, w);
        const bool ok = dev <= 1e-7;
        all = all && ok;
        report["fixed_point"] = {{"max_deviation", dev}, {"tolerance", 1e-7}, {"passed", ok}};
    } catch (const Error& e) {
        all = false;
        report["fixed_point"] = {{"passed", false}, {"error", e.what()}};
    }

    report["passed"] = all;
    write_file((out / "oracle.json").string(), dump_json(report));
    update_manifest(out, "oracle", cfg->text, {{"config", sha256_hex(cfg->text)}}, seconds_since(t0));
    log << "qvi oracle: " << (all ? "all cross-checks within tolerance" : "cross-check failed") << '\n';
    return all ? kExitOk : kExitCheckFailed;
}

}  // namespace qvi
