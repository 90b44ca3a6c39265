#include "qvi/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "qvi/errors.hpp"
#include "qvi/field_io.hpp"

namespace qvi {

namespace {

struct Value {
    std::variant<double, std::string, bool, std::vector<Value>> v;
    std::size_t offset = 0;
};

using Table = std::map<std::string, Value>;

class Reader {
public:
    explicit Reader(const std::string& text) : s_(text) {}

    std::map<std::string, Table> parse() {
        std::map<std::string, Table> out;
        std::string section;
        out[section];
        for (;;) {
            skip_blank_lines();
            if (pos_ >= s_.size()) break;
            if (s_[pos_] == '[') {
                ++pos_;
                section = bare_key();
                expect(']');
                if (out.count(section) && !section.empty()) fail("duplicate section [" + section + "]");
                out[section];
            } else {
                const std::size_t at = pos_;
                const std::string key = bare_key();
                skip_inline_space();
                expect('=');
                Value v = value();
                if (!out[section].emplace(key, std::move(v)).second) {
                    pos_ = at;
                    fail("duplicate key '" + key + "'");
                }
            }
            end_of_line();
        }
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError("config: " + what, pos_); }

    void skip_inline_space() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
    }

    void skip_comment() {
        if (pos_ < s_.size() && s_[pos_] == '#')
            while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
    }

    void skip_blank_lines() {
        for (;;) {
            skip_inline_space();
            skip_comment();
            if (pos_ < s_.size() && s_[pos_] == '\n') {
                ++pos_;
                continue;
            }
            return;
        }
    }

    void end_of_line() {
        skip_inline_space();
        skip_comment();
        if (pos_ < s_.size() && s_[pos_] != '\n') fail("expected end of line");
    }

    void expect(char c) {
        skip_inline_space();
        if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string bare_key() {
        skip_inline_space();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        if (pos_ == start) fail("expected a key");
        return s_.substr(start, pos_ - start);
    }

    Value value() {
        skip_inline_space();
        if (pos_ >= s_.size()) fail("expected a value");
        Value out;
        out.offset = pos_;
        const char c = s_[pos_];
        if (c == '"') {
            out.v = string();
        } else if (c == '[') {
            ++pos_;
            std::vector<Value> items;
            for (;;) {
                skip_blank_lines();
                if (pos_ < s_.size() && s_[pos_] == ']') {
                    ++pos_;
                    break;
                }
                items.push_back(value());
                skip_blank_lines();
                if (pos_ < s_.size() && s_[pos_] == ',') {
                    ++pos_;
                } else if (pos_ < s_.size() && s_[pos_] == ']') {
                    ++pos_;
                    break;
                } else {
                    fail("expected ',' or ']' in array");
                }
            }
            out.v = std::move(items);
        } else if (s_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            out.v = true;
        } else if (s_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            out.v = false;
        } else {
            out.v = number();
        }
        return out;
    }

    std::string string() {
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\n') fail("unterminated string");
            if (s_[pos_] == '\\') {
                ++pos_;
                if (pos_ >= s_.size()) break;
                const char e = s_[pos_];
                if (e == '"' || e == '\\') out += e;
                else if (e == 'n') out += '\n';
                else if (e == 't') out += '\t';
                else fail("unsupported escape");
            } else {
                out += s_[pos_];
            }
            ++pos_;
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    double number() {
        const std::size_t start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                    s_[pos_] == '_' ||
                                    ((s_[pos_] == '-' || s_[pos_] == '+') && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
            ++pos_;
        std::string tok;
        for (std::size_t i = start; i < pos_; ++i)
            if (s_[i] != '_' && s_[i] != '+') tok += s_[i];
        double x = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
        if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
            pos_ = start;
            fail("malformed number");
        }
        return x;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ValidationError("config " + where + ": " + what);
}

double as_number(const Value& v, const std::string& where) {
    if (const double* d = std::get_if<double>(&v.v)) return *d;
    bad(where, "expected a number");
}

long as_integer(const Value& v, const std::string& where) {
    const double d = as_number(v, where);
    if (d != static_cast<double>(static_cast<long>(d))) bad(where, "expected an integer");
    return static_cast<long>(d);
}

std::string as_string(const Value& v, const std::string& where) {
    if (const std::string* s = std::get_if<std::string>(&v.v)) return *s;
    bad(where, "expected a string");
}

// Expressions may be written as strings or bare numbers.
std::string as_expr(const Value& v, const std::string& where) {
    if (const double* d = std::get_if<double>(&v.v)) return format_real(*d);
    return as_string(v, where);
}

const std::vector<Value>& as_array(const Value& v, const std::string& where) {
    if (const auto* a = std::get_if<std::vector<Value>>(&v.v)) return *a;
    bad(where, "expected an array");
}

void check_keys(const std::string& section, const Table& t, const std::set<std::string>& allowed) {
    for (const auto& [k, v] : t) {
        if (!allowed.count(k)) {
            throw ValidationError("config: unknown key '" + k + "' in " +
                                  (section.empty() ? std::string("top level") : "[" + section + "]"));
        }
    }
}

const Value* find(const Table& t, const std::string& key) {
    auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    auto doc = Reader(text).parse();
    static const std::map<std::string, std::set<std::string>> schema{
        {"", {"seed"}},
        {"domain", {"bounds", "counts"}},
        {"operator", {"form", "a", "b", "c", "c0"}},
        {"data", {"f", "phi"}},
        {"solver",
         {"tol_inner", "tol_res", "omega_relax", "max_sweeps", "inner_method", "tol_outer", "max_outer",
          "persist_iterates", "max_policy_iterations"}},
        {"analysis",
         {"r_probe", "max_steps", "density_radii", "refinement_levels", "regular_threshold", "singular_threshold"}},
    };
    for (const auto& [name, table] : doc) {
        auto it = schema.find(name);
        if (it == schema.end()) throw ValidationError("config: unknown section [" + name + "]");
        check_keys(name, table, it->second);
    }
    const Table empty;
    auto section = [&](const std::string& name) -> const Table& {
        auto it = doc.find(name);
        return it == doc.end() ? empty : it->second;
    };

    std::uint64_t seed = 0;
    if (const Value* v = find(section(""), "seed")) {
        const long s = as_integer(*v, "seed");
        if (s < 0) bad("seed", "must be nonnegative");
        seed = static_cast<std::uint64_t>(s);
    }

    const Table& dom = section("domain");
    const Value* bv = find(dom, "bounds");
    const Value* cv = find(dom, "counts");
    if (!bv || !cv) bad("[domain]", "needs bounds and counts");
    std::vector<Interval> bounds;
    for (const Value& item : as_array(*bv, "domain.bounds")) {
        const auto& pair = as_array(item, "domain.bounds");
        if (pair.size() != 2) bad("domain.bounds", "each entry is [lo, hi]");
        bounds.push_back({as_number(pair[0], "domain.bounds"), as_number(pair[1], "domain.bounds")});
    }
    std::vector<int> counts;
    for (const Value& item : as_array(*cv, "domain.counts")) {
        counts.push_back(static_cast<int>(as_integer(item, "domain.counts")));
    }
    Grid grid(bounds, counts);
    const int n = grid.dim();

    const Table& op = section("operator");
    const Table& data = section("data");
    const Value* fv = find(data, "f");
    if (!fv) bad("[data]", "needs f");
    const std::string f = as_expr(*fv, "data.f");
    const std::string phi = find(data, "phi") ? as_expr(*find(data, "phi"), "data.phi") : "1";
    const std::string form = find(op, "form") ? as_string(*find(op, "form"), "operator.form") : "standard";

    Problem problem;
    if (form == "laplacian_ge") {
        for (const char* k : {"a", "b", "c"}) {
            if (find(op, k)) bad(std::string("operator.") + k, "is fixed by form = \"laplacian_ge\"");
        }
        const double c0 = find(op, "c0") ? as_number(*find(op, "c0"), "operator.c0") : 0.0;
        problem = Problem::laplacian_ge(n, f, phi, c0);
    } else if (form == "standard") {
        std::vector<std::string> a, b;
        if (const Value* av = find(op, "a")) {
            const auto& rows = as_array(*av, "operator.a");
            if (rows.size() != static_cast<std::size_t>(n)) bad("operator.a", "needs " + std::to_string(n) + " rows");
            for (const Value& row : rows) {
                const auto& entries = as_array(row, "operator.a");
                if (entries.size() != static_cast<std::size_t>(n)) {
                    bad("operator.a", "rows need " + std::to_string(n) + " entries");
                }
                for (const Value& e : entries) a.push_back(as_expr(e, "operator.a"));
            }
        }
        if (const Value* bvv = find(op, "b")) {
            const auto& entries = as_array(*bvv, "operator.b");
            if (entries.size() != static_cast<std::size_t>(n)) bad("operator.b", "needs " + std::to_string(n) + " entries");
            for (const Value& e : entries) b.push_back(as_expr(e, "operator.b"));
        }
        const Value* c = find(op, "c");
        const Value* c0 = find(op, "c0");
        if (!c || !c0) bad("[operator]", "needs c and c0");
        problem = Problem::standard(n, a, b, as_expr(*c, "operator.c"), as_number(*c0, "operator.c0"), f, phi);
    } else {
        bad("operator.form", "must be \"standard\" or \"laplacian_ge\"");
    }

    SolverSettings solver;
    const Table& sv = section("solver");
    if (const Value* v = find(sv, "tol_inner")) solver.tol_inner = as_number(*v, "solver.tol_inner");
    if (const Value* v = find(sv, "tol_res")) solver.tol_res = as_number(*v, "solver.tol_res");
    if (const Value* v = find(sv, "omega_relax")) solver.omega_relax = as_number(*v, "solver.omega_relax");
    if (const Value* v = find(sv, "max_sweeps")) solver.max_sweeps = as_integer(*v, "solver.max_sweeps");
    if (const Value* v = find(sv, "inner_method"))
        solver.inner_method = inner_method_from_string(as_string(*v, "solver.inner_method"));
    if (const Value* v = find(sv, "tol_outer")) solver.tol_outer = as_number(*v, "solver.tol_outer");
    if (const Value* v = find(sv, "max_outer")) solver.max_outer = static_cast<int>(as_integer(*v, "solver.max_outer"));
    if (const Value* v = find(sv, "persist_iterates"))
        solver.persist_iterates = static_cast<int>(as_integer(*v, "solver.persist_iterates"));
    if (const Value* v = find(sv, "max_policy_iterations"))
        solver.max_policy_iterations = static_cast<int>(as_integer(*v, "solver.max_policy_iterations"));
    if (!(solver.tol_inner > 0 && solver.tol_res > 0 && solver.tol_outer > 0)) bad("[solver]", "tolerances must be positive");
    if (solver.max_outer < 1) bad("solver.max_outer", "must be at least 1");
    if (solver.persist_iterates < 0) bad("solver.persist_iterates", "must be nonnegative");

    AnalysisSettings analysis;
    const Table& an = section("analysis");
    if (const Value* v = find(an, "r_probe")) analysis.r_probe = as_number(*v, "analysis.r_probe");
    if (const Value* v = find(an, "max_steps")) analysis.max_steps = static_cast<int>(as_integer(*v, "analysis.max_steps"));
    if (const Value* v = find(an, "density_radii")) {
        analysis.density_radii.clear();
        for (const Value& r : as_array(*v, "analysis.density_radii"))
            analysis.density_radii.push_back(as_number(r, "analysis.density_radii"));
        if (analysis.density_radii.empty()) bad("analysis.density_radii", "needs at least one radius");
    }
    if (const Value* v = find(an, "refinement_levels"))
        analysis.refinement_levels = static_cast<int>(as_integer(*v, "analysis.refinement_levels"));
    if (const Value* v = find(an, "regular_threshold"))
        analysis.regular_threshold = as_number(*v, "analysis.regular_threshold");
    if (const Value* v = find(an, "singular_threshold"))
        analysis.singular_threshold = as_number(*v, "analysis.singular_threshold");
    if (analysis.max_steps < 1) bad("analysis.max_steps", "must be at least 1");

    return RunConfig{seed, std::move(grid), std::move(problem), solver, analysis, text};
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace qvi
