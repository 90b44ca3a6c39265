#pragma once

#include <string>

#include <json.hpp>

#include "qvi/analysis.hpp"
#include "qvi/problem.hpp"
#include "qvi/qvi_scheme.hpp"

namespace qvi {

using Json = nlohmann::json;

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

// Two-space indented, keys sorted, trailing newline.
std::string dump_json(const Json& j);

std::vector<double> to_vector(const GridField& f);
Json grid_json(const Grid& g);

Json to_json(const ValidationReport& r);
Json to_json(const ConvergenceModel& m);
Json to_json(const IterationTrace& t);
Json to_json(const ChainReport& r);
Json to_json(const SecondDifferenceBounds& b, const Grid& g);
Json to_json(const LaplacianRange& r);
Json to_json(const RegularityLevel& l, const Grid& g);
Json to_json(const FreeBoundaryReport& r, const Grid& g);
Json to_json(const Claim7Report& r, const Grid& g);

// Index tuple of a node, for JSON witnesses.
Json node_json(const Grid& g, std::size_t node);

}  // namespace qvi
