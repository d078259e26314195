#include "qthermo_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qthermo/errors.hpp"

namespace qthermo::cli {

namespace {

const std::set<std::string> kTopKeys = {"protocol", "E0",     "beta",     "gamma0",   "tau_ramp", "t_relax", "n_cycles",
                                        "landauer_policy", "epsilon", "dwell",   "duration", "numerics", "output",  "needle"};
const std::set<std::string> kNumericsKeys = {"tol", "seed", "sample_stride", "max_steps"};
const std::set<std::string> kOutputKeys = {"dir"};
const std::set<std::string> kNeedleKeys = {"mu", "B_max", "width", "z0", "z_m", "n_phi", "n_z", "sign"};

void reject_unknown(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
    if (!map.IsMap()) throw ConfigError(where + ": expected a mapping");
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) throw ConfigError("'" + key + "' must be a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("'" + key + "' has an invalid value '" + node.Scalar() + "'");
    }
}

double real(const YAML::Node& node, const std::string& key) {
    const auto v = scalar<double>(node, key);
    if (!std::isfinite(v)) throw ConfigError("'" + key + "' must be finite");
    return v;
}

double positive(const YAML::Node& node, const std::string& key) {
    const double v = real(node, key);
    if (!(v > 0.0)) throw ConfigError("'" + key + "' must be positive");
    return v;
}

double non_negative(const YAML::Node& node, const std::string& key) {
    const double v = real(node, key);
    if (v < 0.0) throw ConfigError("'" + key + "' must be non-negative");
    return v;
}

template <class F>
void optional_field(const YAML::Node& map, const char* key, F&& assign) {
    if (const YAML::Node n = map[key]) assign(n, std::string(key));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(item);
    return out;
}

} // namespace

std::string_view protocol_name(Protocol p) {
    switch (p) {
    case Protocol::Section3: return "section3";
    case Protocol::ProcessA: return "process_a";
    case Protocol::ProcessB: return "process_b";
    case Protocol::Erasure: return "erasure";
    case Protocol::Needle: return "needle";
    case Protocol::Relax: return "relax";
    }
    return "unknown";
}

Protocol parse_protocol(std::string_view name) {
    for (const Protocol p : {Protocol::Section3, Protocol::ProcessA, Protocol::ProcessB, Protocol::Erasure,
                             Protocol::Needle, Protocol::Relax}) {
        if (protocol_name(p) == name) return p;
    }
    throw ConfigError("unknown protocol '" + std::string(name) + "'");
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + text + "'");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

void apply_override(YAML::Node& root, const std::string& key, const std::string& value) {
    const auto parts = split(key, '.');
    if (parts.empty()) throw ConfigError("empty override key");
    // yaml-cpp nodes are handles; walk with fresh handles so the root is not rebound.
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node next = chain.back()[parts[i]];
        if (next && !next.IsMap()) throw ConfigError("override '" + key + "': '" + parts[i] + "' is not a block");
        if (!next) {
            chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
            next = chain.back()[parts[i]];
        }
        chain.push_back(next);
    }
    chain.back()[parts.back()] = value;
}

RunConfig build_config(const YAML::Node& root) {
    if (!root || !root.IsMap()) throw ConfigError("config must be a YAML mapping");
    reject_unknown(root, kTopKeys, "config");

    RunConfig c;
    c.source = YAML::Clone(root);
    if (!root["protocol"]) throw ConfigError("missing required key 'protocol'");
    c.protocol = parse_protocol(scalar<std::string>(root["protocol"], "protocol"));
    if (!root["beta"]) throw ConfigError("missing required key 'beta'");
    c.beta = positive(root["beta"], "beta");

    if (c.protocol != Protocol::Needle) {
        if (!root["E0"]) throw ConfigError("missing required key 'E0' for protocol " + std::string(protocol_name(c.protocol)));
        c.E0 = positive(root["E0"], "E0");
    } else if (root["E0"]) {
        throw ConfigError("'E0' is not used by the needle protocol");
    }

    optional_field(root, "gamma0", [&](const YAML::Node& n, const std::string& k) { c.gamma0 = positive(n, k); });
    optional_field(root, "tau_ramp", [&](const YAML::Node& n, const std::string& k) { c.tau_ramp = non_negative(n, k); });
    optional_field(root, "t_relax", [&](const YAML::Node& n, const std::string& k) { c.t_relax = non_negative(n, k); });
    optional_field(root, "duration", [&](const YAML::Node& n, const std::string& k) { c.duration = positive(n, k); });
    optional_field(root, "epsilon", [&](const YAML::Node& n, const std::string& k) { c.epsilon = non_negative(n, k); });
    optional_field(root, "dwell", [&](const YAML::Node& n, const std::string& k) { c.dwell = positive(n, k); });
    optional_field(root, "n_cycles", [&](const YAML::Node& n, const std::string& k) {
        c.n_cycles = scalar<int>(n, k);
        if (c.n_cycles < 1) throw ConfigError("'n_cycles' must be at least 1");
    });
    optional_field(root, "landauer_policy", [&](const YAML::Node& n, const std::string& k) {
        try {
            c.policy = MeasurementPolicy::parse(scalar<std::string>(n, k));
        } catch (const qthermo::InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    });

    if (const YAML::Node num = root["numerics"]) {
        reject_unknown(num, kNumericsKeys, "numerics");
        optional_field(num, "tol", [&](const YAML::Node& n, const std::string& k) {
            c.tol = positive(n, k);
            if (*c.tol < 1e-12 || *c.tol > 1e-4) throw ConfigError("'tol' must lie in [1e-12, 1e-4]");
        });
        optional_field(num, "seed", [&](const YAML::Node& n, const std::string& k) { c.seed = scalar<std::uint64_t>(n, k); });
        optional_field(num, "sample_stride", [&](const YAML::Node& n, const std::string& k) {
            const auto s = scalar<long long>(n, k);
            if (s < 1) throw ConfigError("'sample_stride' must be at least 1");
            c.sample_stride = static_cast<std::size_t>(s);
        });
        optional_field(num, "max_steps", [&](const YAML::Node& n, const std::string& k) {
            const auto s = scalar<long long>(n, k);
            if (s < 1) throw ConfigError("'max_steps' must be at least 1");
            c.max_steps = static_cast<std::size_t>(s);
        });
    }
    if (const YAML::Node out = root["output"]) {
        reject_unknown(out, kOutputKeys, "output");
        optional_field(out, "dir", [&](const YAML::Node& n, const std::string& k) { c.output_dir = scalar<std::string>(n, k); });
    }
    if (const YAML::Node nd = root["needle"]) {
        if (c.protocol != Protocol::Needle) throw ConfigError("'needle' block is only valid for the needle protocol");
        reject_unknown(nd, kNeedleKeys, "needle");
        NeedleBlock& b = c.needle;
        optional_field(nd, "mu", [&](const YAML::Node& n, const std::string& k) { b.mu = positive(n, k); });
        optional_field(nd, "B_max", [&](const YAML::Node& n, const std::string& k) { b.B_max = real(n, k); });
        optional_field(nd, "width", [&](const YAML::Node& n, const std::string& k) { b.width = positive(n, k); });
        optional_field(nd, "z0", [&](const YAML::Node& n, const std::string& k) { b.z0 = real(n, k); });
        optional_field(nd, "z_m", [&](const YAML::Node& n, const std::string& k) { b.z_m = real(n, k); });
        optional_field(nd, "n_phi", [&](const YAML::Node& n, const std::string& k) {
            b.n_phi = scalar<int>(n, k);
            if (b.n_phi < 8) throw ConfigError("'n_phi' must be at least 8");
        });
        optional_field(nd, "n_z", [&](const YAML::Node& n, const std::string& k) {
            b.n_z = scalar<int>(n, k);
            if (b.n_z < 2) throw ConfigError("'n_z' must be at least 2");
        });
        optional_field(nd, "sign", [&](const YAML::Node& n, const std::string& k) {
            b.sign = scalar<int>(n, k);
            if (b.sign != 1 && b.sign != -1) throw ConfigError("'sign' must be 1 or -1");
        });
    }
    return c;
}

double resolved_tol(const RunConfig& cfg) {
    return cfg.tol.value_or(1e-8);
}

RunConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    YAML::Node root;
    try {
        root = YAML::Load(in);
    } catch (const YAML::Exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    if (!root) root = YAML::Node(YAML::NodeType::Map);
    for (const auto& [k, v] : overrides) apply_override(root, k, v);
    return build_config(root);
}

} // namespace qthermo::cli
