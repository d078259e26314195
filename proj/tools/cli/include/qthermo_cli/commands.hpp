#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qthermo_cli/config.hpp"

namespace qthermo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutDirEnv = "QTHERMO_OUT_DIR";

struct CommonArgs {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::vector<std::string> assignments;  // key=value
    bool timing = false;
};

/// --out, then $QTHERMO_OUT_DIR, then output.dir, then the working directory.
std::filesystem::path resolve_output_dir(const std::optional<std::string>& cli_out, const RunConfig& cfg);

struct GridAxis {
    std::string key;
    std::vector<std::string> values;
};

/// "key=v1,v2;key2=w1" -> axes in the given order. Throws ConfigError on an empty grid.
std::vector<GridAxis> parse_grid(const std::string& spec);

/// Grid points in iteration order: the first axis varies slowest.
std::vector<std::vector<std::pair<std::string, std::string>>> expand_grid(const std::vector<GridAxis>& axes);

int cmd_simulate(const CommonArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommonArgs& args, const std::string& grid, unsigned threads, std::ostream& out, std::ostream& err);
int cmd_needle(const CommonArgs& args, std::ostream& out, std::ostream& err);

} // namespace qthermo::cli
