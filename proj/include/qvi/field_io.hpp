#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qvi/grid.hpp"

namespace qvi {

// Shortest-safe decimal form: 17 significant digits, so parsing it back
// yields the identical double.
std::string format_real(double x);

// Header line `# grid n=<n> counts=<m1,...> bounds=<lo1:hi1,...>`.
std::string grid_header(const Grid& grid);
Grid parse_grid_header(const std::string& line);

// One row per node in row-major order: index tuple, coordinates, value.
void write_field_csv(std::ostream& os, const GridField& field);
GridField read_field_csv(std::istream& is, std::string name = {});

void save_field(const std::string& path, const GridField& field);
GridField load_field(const std::string& path, std::string name = {});

// Rows of node index tuple, coordinates, then caller-supplied columns. Used
// for masks and labels, which carry text next to the numeric code.
void write_node_table(std::ostream& os, const Grid& grid, const std::vector<std::size_t>& nodes,
                      const std::vector<std::vector<std::string>>& columns);

}  // namespace qvi
