#pragma once

// Run configuration for the qthermo command-line tool: YAML file plus
// key=value overrides, validated into a typed RunConfig.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "qthermo/measurement.hpp"

namespace qthermo::cli {

/// Malformed, incomplete or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Protocol { Section3, ProcessA, ProcessB, Erasure, Needle, Relax };

std::string_view protocol_name(Protocol p);
Protocol parse_protocol(std::string_view name);

struct NeedleBlock {
    double mu = 1.0;
    double B_max = 10.0;
    double width = 1.0;
    std::optional<double> z0;  // default 5 * width
    double z_m = 0.0;
    int n_phi = 512;
    int n_z = 201;
    int sign = 1;
};

struct RunConfig {
    Protocol protocol = Protocol::Section3;
    double E0 = 0.0;
    double beta = 0.0;
    double gamma0 = 1.0;
    std::optional<double> tau_ramp;  // protocol-specific default
    std::optional<double> t_relax;   // default 20 / gamma0
    int n_cycles = 1;
    MeasurementPolicy policy = MeasurementPolicy::standard();
    double epsilon = 0.0;
    double dwell = 1.0;
    std::optional<double> duration;  // relax protocol, default 20 / gamma0

    std::optional<double> tol;  // protocol default when unset
    std::uint64_t seed = 0;
    std::size_t sample_stride = 1;
    std::size_t max_steps = 2'000'000;  // integrator step budget

    std::string output_dir;  // empty: not set in the file
    NeedleBlock needle;

    YAML::Node source;  // validated document, base for sweep points
};

/// Parse "key=value"; keys may be dotted paths into nested blocks (numerics.seed).
std::pair<std::string, std::string> split_assignment(const std::string& text);

/// Set a scalar at a dotted path, creating intermediate maps.
void apply_override(YAML::Node& root, const std::string& key, const std::string& value);

/// Validate a parsed document. Unknown keys, missing required keys and bad values throw ConfigError.
RunConfig build_config(const YAML::Node& root);

/// Integration tolerance: the configured value, else 1e-8.
double resolved_tol(const RunConfig& cfg);

/// Load a YAML file, apply overrides in order, validate.
RunConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides = {});

} // namespace qthermo::cli
