#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "grushin/core.hpp"

namespace grushin {

inline const std::vector<std::string> kCommands = {"eigen",   "scaling", "bounds",   "observability",
                                                   "crossover", "control", "carleman", "trichotomy"};

using ConfigPairs = std::map<std::string, std::string>;

struct RunManifest {
    std::string command;
    std::string config_path;  // empty: defaults plus overrides
    std::string output_dir = ".";
    std::uint64_t seed = 1;
    int threads = 0;  // 0: GRUSHIN_THREADS, then the OpenMP default
    ConfigPairs overrides;  // config keys set on the command line, applied over the file
    int n = 0;              // mode index for eigen/carleman (0: command default)
    int modes = 8;          // control
    double epsilon = 1e-8;  // control
};

/// Flat key=value text; '#' starts a comment. Keys: gamma, a, b, a_prime,
/// b_prime, T, nx, nt, n_max. Unknown keys, duplicates and malformed values
/// are rejected with the key named.
ConfigPairs parse_config_pairs(const std::string& text, const std::string& source = "<text>");

/// Validated config from pairs; missing a', b' default to the trisection of (a,b).
ProblemConfig config_from_pairs(const ConfigPairs& pairs);

ProblemConfig parse_config(const std::string& path);

/// Exit status: 0 success, 2 numerical flag (non-convergence or failed check), 1 usage or config error.
int run(const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// Parses argv (subcommand first) and calls run.
int cli_main(int argc, char** argv);

}  // namespace grushin
