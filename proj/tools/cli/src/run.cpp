#include "qthermo_cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "qthermo/errors.hpp"

namespace qthermo::cli {

namespace {

double tau_ramp_or_default(const RunConfig& c) {
    if (c.tau_ramp) return *c.tau_ramp;
    return (c.protocol == Protocol::Erasure ? 1000.0 : 100.0) / c.gamma0;
}

double t_relax_or_default(const RunConfig& c) { return c.t_relax.value_or(20.0 / c.gamma0); }
double duration_or_default(const RunConfig& c) { return c.duration.value_or(20.0 / c.gamma0); }

ProtocolReport run_protocol(const RunConfig& c) {
    switch (c.protocol) {
    case Protocol::Section3: {
        Section3Params p;
        p.E0 = c.E0;
        p.beta = c.beta;
        p.gamma0 = c.gamma0;
        p.tau_ramp = tau_ramp_or_default(c);
        p.t_relax = t_relax_or_default(c);
        p.policy = c.policy;
        p.seed = c.seed;
        p.tol = resolved_tol(c);
        p.sample_stride = c.sample_stride;
        p.max_steps = c.max_steps;
        return run_section3_cycle(p);
    }
    case Protocol::ProcessA: {
        ProcessAParams p;
        p.E = c.E0;
        p.beta = c.beta;
        p.n_cycles = c.n_cycles;
        p.policy = c.policy;
        p.seed = c.seed;
        p.memory = MemoryModel{c.epsilon, c.gamma0, c.dwell};
        p.tol = resolved_tol(c);
        p.sample_stride = c.sample_stride;
        p.max_steps = c.max_steps;
        return run_process_a(p);
    }
    case Protocol::ProcessB: {
        ProcessBParams p;
        p.E0 = c.E0;
        p.beta = c.beta;
        p.gamma0 = c.gamma0;
        p.tau_ramp = tau_ramp_or_default(c);
        p.t_relax = t_relax_or_default(c);
        p.policy = c.policy;
        p.seed = c.seed;
        p.memory = MemoryModel{c.epsilon, c.gamma0, c.dwell};
        p.tol = resolved_tol(c);
        p.sample_stride = c.sample_stride;
        p.max_steps = c.max_steps;
        return run_process_b(p).report;
    }
    case Protocol::Erasure: {
        ErasureParams p;
        p.E_max = c.E0;
        p.beta = c.beta;
        p.gamma0 = c.gamma0;
        p.tau = tau_ramp_or_default(c);
        if (!(p.tau > 0.0)) throw ConfigError("erasure needs tau_ramp > 0");
        p.tol = resolved_tol(c);
        p.sample_stride = c.sample_stride;
        p.max_steps = c.max_steps;
        ErasureReport r = run_erasure(p);
        r.report.metrics["satisfies_enen"] = r.balance.satisfies_enen ? 1.0 : 0.0;
        if (r.balance.satisfies_lbound) r.report.metrics["satisfies_lbound"] = *r.balance.satisfies_lbound ? 1.0 : 0.0;
        return std::move(r.report);
    }
    case Protocol::Relax: {
        RelaxationParams p;
        p.E0 = c.E0;
        p.beta = c.beta;
        p.gamma0 = c.gamma0;
        p.duration = duration_or_default(c);
        p.tol = resolved_tol(c);
        p.sample_stride = c.sample_stride;
        p.max_steps = c.max_steps;
        return run_relaxation(p);
    }
    case Protocol::Needle: break;
    }
    throw ConfigError("protocol has no master-equation run");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

} // namespace

NeedleConfig needle_config(const RunConfig& c) {
    const NeedleBlock& b = c.needle;
    NeedleConfig n;
    n.mu = b.mu;
    n.beta = c.beta;
    n.profile = FieldProfile::gaussian(b.B_max, b.width);
    n.z0 = b.z0.value_or(5.0 * b.width);
    n.z_m = b.z_m;
    n.n_phi = b.n_phi;
    n.n_z = b.n_z;
    n.sign = b.sign;
    return n;
}

RunResult run(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunResult r;
    r.protocol = cfg.protocol;
    try {
        if (cfg.protocol == Protocol::Needle) {
            const NeedleConfig n = needle_config(cfg);
            r.needle = run_needle_cycle(n);
            r.profile = force_profile(n);
        } else {
            r.report = run_protocol(cfg);
        }
    } catch (const qthermo::InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    r.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string ledger_csv(const ProtocolReport& report) {
    const std::size_t nb = report.schedule.baths.size();
    std::string out = "t,E,W_cum";
    for (std::size_t j = 0; j < nb; ++j) out += ",Q_cum_" + std::to_string(j);
    out += ",S";
    for (std::size_t j = 0; j < nb; ++j) out += ",sigma_" + std::to_string(j);
    out += ",event\n";
    for (const LedgerRow& row : report.ledger) {
        out += format_real(row.t) + ',' + format_real(row.energy) + ',' + format_real(row.work_cum);
        for (const double q : row.heat_cum) out += ',' + format_real(q);
        out += ',' + format_real(row.entropy);
        for (const double s : row.sigma) out += ',' + format_real(s);
        out += ',' + csv_field(row.events) + '\n';
    }
    return out;
}

std::string needle_profile_csv(const std::vector<std::pair<double, double>>& profile) {
    std::string out = "z,F\n";
    for (const auto& [z, f] : profile) out += format_real(z) + ',' + format_real(f) + '\n';
    return out;
}

nlohmann::ordered_json parameters_json(const RunConfig& c) {
    nlohmann::ordered_json p;
    p["beta"] = c.beta;
    switch (c.protocol) {
    case Protocol::Section3:
    case Protocol::ProcessB:
        p["E0"] = c.E0;
        p["gamma0"] = c.gamma0;
        p["tau_ramp"] = tau_ramp_or_default(c);
        p["t_relax"] = t_relax_or_default(c);
        p["landauer_policy"] = std::string(c.policy.name());
        if (c.protocol == Protocol::ProcessB) p["epsilon"] = c.epsilon;
        break;
    case Protocol::ProcessA:
        p["E0"] = c.E0;
        p["gamma0"] = c.gamma0;
        p["n_cycles"] = c.n_cycles;
        p["landauer_policy"] = std::string(c.policy.name());
        p["epsilon"] = c.epsilon;
        p["dwell"] = c.dwell;
        break;
    case Protocol::Erasure:
        p["E0"] = c.E0;
        p["gamma0"] = c.gamma0;
        p["tau_ramp"] = tau_ramp_or_default(c);
        break;
    case Protocol::Relax:
        p["E0"] = c.E0;
        p["gamma0"] = c.gamma0;
        p["duration"] = duration_or_default(c);
        break;
    case Protocol::Needle: {
        const NeedleConfig n = needle_config(c);
        p["mu"] = n.mu;
        p["B_max"] = c.needle.B_max;
        p["width"] = c.needle.width;
        p["z0"] = n.z0;
        p["z_m"] = n.z_m;
        p["n_phi"] = n.n_phi;
        p["n_z"] = n.n_z;
        p["sign"] = n.sign;
        break;
    }
    }
    p["tol"] = resolved_tol(c);
    p["seed"] = c.seed;
    p["sample_stride"] = c.sample_stride;
    p["max_steps"] = c.max_steps;
    return p;
}

nlohmann::ordered_json summary_json(const RunConfig& cfg, const RunResult& result, bool include_timing) {
    nlohmann::ordered_json j;
    j["protocol"] = std::string(protocol_name(result.protocol));
    j["parameters"] = parameters_json(cfg);
    if (result.report) {
        const ProtocolReport& r = *result.report;
        j["policy"] = std::string(r.policy.name());
        j["net_work_extracted"] = r.net_work_extracted;
        j["gross_work_extracted"] = r.gross_work_extracted;
        j["net_heat"] = r.net_heat_per_bath;
        j["measurement_charges"] = r.measurement_charges;
        j["verdict"] = {{"second_law_consistent", r.second_law_consistent},
                        {"sigma_nonnegative", r.audit.sigma_nonnegative},
                        {"clausius_ok", r.audit.clausius_ok},
                        {"first_law_ok", r.audit.first_law_ok}};
        j["max_sigma_violation"] = std::max(0.0, -r.audit.min_sigma);
        j["first_law_residual"] = r.audit.first_law_residual;
        j["max_clausius_residual"] = r.audit.max_clausius_residual;
        j["floored_rows"] = r.audit.floored_rows;
        j["ledger_rows"] = r.ledger.size();
        nlohmann::ordered_json m = nlohmann::ordered_json::object();
        for (const auto& [k, v] : r.metrics) m[k] = v;  // std::map: sorted keys
        j["metrics"] = m;
        j["warnings"] = r.warnings;
    } else if (result.needle) {
        const NeedleCycleReport& n = *result.needle;
        j["net_work"] = n.net_work;
        j["forward_work"] = n.forward_work;
        j["return_work"] = n.return_work;
        j["alignment_probability"] = n.alignment_probability;
        j["reset_total_variation"] = n.reset_total_variation;
        j["verdict"] = {{"reset_ok", n.reset_ok}};
        j["warnings"] = n.warnings;
    }
    if (include_timing) j["wall_clock_s"] = result.wall_clock_s;
    return j;
}

} // namespace qthermo::cli
