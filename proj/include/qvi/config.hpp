#pragma once

#include <cstdint>
#include <string>

#include "qvi/grid.hpp"
#include "qvi/problem.hpp"
#include "qvi/settings.hpp"

namespace qvi {

// A run configuration: TOML subset with a top-level `seed` and the sections
// [domain], [operator], [data], [solver], [analysis]. See README for the keys.
struct RunConfig {
    std::uint64_t seed = 0;
    Grid grid;
    Problem problem;
    SolverSettings solver;
    AnalysisSettings analysis;
    std::string text;  // verbatim source, echoed into reports
};

// Throws ParseError (with byte offset) on malformed input and ValidationError
// on unknown or missing keys.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace qvi
