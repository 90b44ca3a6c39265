#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace qvi {

inline constexpr const char* kToolVersion = "qvi 0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 1,           // unreadable or invalid input, missing artifacts, size guard
    kExitNonConvergence = 2,  // solve hit an iteration cap; artifacts still written
    kExitCheckFailed = 3,     // verify or oracle found a violation
};

struct CommandOptions {
    std::string out_dir;             // empty: "qvi_out" for solve/oracle, the run directory otherwise
    std::optional<std::uint64_t> seed;
    std::ostream* log = nullptr;     // nullptr: std::cerr
};

int cmd_solve(const std::string& config_path, const CommandOptions& opt = {});
int cmd_verify(const std::string& run_dir, const CommandOptions& opt = {});
int cmd_analyze(const std::string& run_dir, const CommandOptions& opt = {});
int cmd_oracle(const std::string& config_path, const CommandOptions& opt = {});

}  // namespace qvi
