#include "qvi/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qvi/errors.hpp"

namespace qvi {

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string grid_header(const Grid& grid) {
    std::ostringstream os;
    os << "# grid n=" << grid.dim() << " counts=";
    for (int i = 0; i < grid.dim(); ++i) os << (i ? "," : "") << grid.count(i);
    os << " bounds=";
    for (int i = 0; i < grid.dim(); ++i) {
        os << (i ? "," : "") << format_real(grid.bounds(i).lo) << ":"
           << format_real(grid.bounds(i).hi);
    }
    return os.str();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

double to_real(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ValidationError("csv: not a number: '" + s + "'");
    }
    if (used != s.size()) throw ValidationError("csv: trailing characters in '" + s + "'");
    return v;
}

}  // namespace

Grid parse_grid_header(const std::string& line) {
    std::istringstream is(line);
    std::string hash, word;
    is >> hash >> word;
    if (hash != "#" || word != "grid") throw ValidationError("csv: missing '# grid' header");
    int n = 0;
    std::vector<int> counts;
    std::vector<Interval> bounds;
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ValidationError("csv: malformed header token '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "n") {
            n = static_cast<int>(to_real(val));
        } else if (key == "counts") {
            for (const auto& c : split(val, ',')) counts.push_back(static_cast<int>(to_real(c)));
        } else if (key == "bounds") {
            for (const auto& b : split(val, ',')) {
                const auto parts = split(b, ':');
                if (parts.size() != 2) throw ValidationError("csv: malformed bounds '" + b + "'");
                bounds.push_back({to_real(parts[0]), to_real(parts[1])});
            }
        } else {
            throw ValidationError("csv: unknown header key '" + key + "'");
        }
    }
    if (static_cast<std::size_t>(n) != counts.size()) {
        throw ValidationError("csv: header dimension disagrees with counts");
    }
    return Grid(std::move(bounds), std::move(counts));
}

void write_field_csv(std::ostream& os, const GridField& field) {
    const Grid& g = field.grid();
    os << grid_header(g) << '\n';
    for (std::size_t k = 0; k < g.size(); ++k) {
        const MultiIndex idx = g.multi(k);
        const Point p = g.point(idx);
        for (int i = 0; i < g.dim(); ++i) os << idx[i] << ',';
        for (int i = 0; i < g.dim(); ++i) os << format_real(p[i]) << ',';
        os << format_real(field[k]) << '\n';
    }
}

GridField read_field_csv(std::istream& is, std::string name) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("csv: empty input");
    Grid g = parse_grid_header(line);
    std::vector<double> values(g.size());
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != static_cast<std::size_t>(2 * g.dim() + 1)) {
            throw ValidationError("csv: row " + std::to_string(row) + " has wrong column count");
        }
        if (row >= g.size()) throw ValidationError("csv: more rows than grid nodes");
        MultiIndex idx{};
        for (int i = 0; i < g.dim(); ++i) idx[i] = static_cast<int>(to_real(cells[i]));
        if (!g.in_range(idx) || g.linear(idx) != row) {
            throw ValidationError("csv: row " + std::to_string(row) + " is out of row-major order");
        }
        values[row] = to_real(cells.back());
        ++row;
    }
    if (row != g.size()) throw ValidationError("csv: fewer rows than grid nodes");
    return GridField(std::move(g), std::move(values), std::move(name));
}

void save_field(const std::string& path, const GridField& field) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_field_csv(os, field);
}

GridField load_field(const std::string& path, std::string name) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "'");
    return read_field_csv(is, std::move(name));
}

void write_node_table(std::ostream& os, const Grid& grid, const std::vector<std::size_t>& nodes,
                      const std::vector<std::vector<std::string>>& columns) {
    if (columns.size() != nodes.size()) throw ShapeError("node table: one column row per node");
    os << grid_header(grid) << '\n';
    for (std::size_t r = 0; r < nodes.size(); ++r) {
        const MultiIndex idx = grid.multi(nodes[r]);
        const Point p = grid.point(idx);
        std::vector<std::string> cells;
        for (int i = 0; i < grid.dim(); ++i) cells.push_back(std::to_string(idx[i]));
        for (int i = 0; i < grid.dim(); ++i) cells.push_back(format_real(p[i]));
        cells.insert(cells.end(), columns[r].begin(), columns[r].end());
        for (std::size_t c = 0; c < cells.size(); ++c) os << (c ? "," : "") << cells[c];
        os << '\n';
    }
}

}  // namespace qvi
