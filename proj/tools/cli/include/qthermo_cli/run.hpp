#pragma once

// Executes a RunConfig and renders its artifacts (ledger CSV, summary JSON,
// needle profile CSV) as strings, so that nothing touches the disk until a
// run has fully succeeded.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qthermo/needle.hpp"
#include "qthermo/protocols.hpp"
#include "qthermo_cli/config.hpp"

namespace qthermo::cli {

struct RunResult {
    Protocol protocol = Protocol::Section3;
    std::optional<ProtocolReport> report;        // every protocol except needle
    std::optional<NeedleCycleReport> needle;
    std::vector<std::pair<double, double>> profile;  // needle (z, F)
    double wall_clock_s = 0.0;
};

/// Throws qthermo::Error subclasses on numerical failure, ConfigError on bad parameters.
RunResult run(const RunConfig& cfg);

NeedleConfig needle_config(const RunConfig& cfg);

/// 17 significant digits, "C" locale.
std::string format_real(double x);

std::string ledger_csv(const ProtocolReport& report);
std::string needle_profile_csv(const std::vector<std::pair<double, double>>& profile);

/// Resolved physical and numerical parameters of the run.
nlohmann::ordered_json parameters_json(const RunConfig& cfg);
nlohmann::ordered_json summary_json(const RunConfig& cfg, const RunResult& result, bool include_timing);

} // namespace qthermo::cli
