#include "qthermo_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "qthermo/errors.hpp"
#include "qthermo_cli/run.hpp"

namespace qthermo::cli {

namespace {

namespace fs = std::filesystem;

using Overrides = std::vector<std::pair<std::string, std::string>>;

Overrides collect_overrides(const CommonArgs& args) {
    Overrides o;
    for (const auto& a : args.assignments) o.push_back(split_assignment(a));
    if (args.seed) o.emplace_back("numerics.seed", std::to_string(*args.seed));
    if (args.tol) o.emplace_back("numerics.tol", format_real(*args.tol));
    return o;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw ConfigError("write failed for '" + path.string() + "'");
}

struct Artifact {
    std::string name;
    std::string content;
};

std::vector<Artifact> render(const RunConfig& cfg, const RunResult& r, bool timing) {
    std::vector<Artifact> files;
    if (r.report) files.push_back({"ledger.csv", ledger_csv(*r.report)});
    if (r.needle) files.push_back({"needle_profile.csv", needle_profile_csv(r.profile)});
    files.push_back({"summary.json", summary_json(cfg, r, timing).dump(2) + "\n"});
    return files;
}

int emit(const fs::path& dir, const std::vector<Artifact>& files, std::ostream& out) {
    fs::create_directories(dir);
    for (const Artifact& a : files) {
        write_file(dir / a.name, a.content);
        out << (dir / a.name).string() << "\n";
    }
    return kExitOk;
}

/// Runs `body`, mapping failures onto exit codes with a diagnostic on `err`.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "output error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const qthermo::Error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(item);
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

struct SweepRow {
    std::string status = "ok";
    std::string net, gross, charges, heat, consistent, sigma_violation, error;
};

SweepRow run_point(const YAML::Node& doc) {
    SweepRow row;
    try {
        const RunConfig cfg = build_config(doc);
        const RunResult r = run(cfg);
        if (r.report) {
            const ProtocolReport& rep = *r.report;
            row.net = format_real(rep.net_work_extracted);
            row.gross = format_real(rep.gross_work_extracted);
            row.charges = format_real(rep.measurement_charges);
            row.heat = format_real(rep.metrics.at("heat_absorbed"));
            row.consistent = rep.second_law_consistent ? "true" : "false";
            row.sigma_violation = format_real(std::max(0.0, -rep.audit.min_sigma));
        } else if (r.needle) {
            row.net = format_real(-r.needle->net_work);
        }
    } catch (const ConfigError& e) {
        row.status = "config_error";
        row.error = e.what();
    } catch (const std::exception& e) {
        row.status = "numerical_error";
        row.error = e.what();
    }
    return row;
}

std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

fs::path resolve_output_dir(const std::optional<std::string>& cli_out, const RunConfig& cfg) {
    if (cli_out && !cli_out->empty()) return *cli_out;
    if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    return ".";
}

std::vector<GridAxis> parse_grid(const std::string& spec) {
    std::vector<GridAxis> axes;
    for (const std::string& part : split(spec, ';')) {
        const std::string item = trim(part);
        if (item.empty()) continue;
        const auto [key, list] = split_assignment(item);
        GridAxis axis{trim(key), {}};
        for (const std::string& v : split(list, ',')) {
            const std::string t = trim(v);
            if (!t.empty()) axis.values.push_back(t);
        }
        if (axis.values.empty()) throw ConfigError("grid axis '" + axis.key + "' has no values");
        for (const GridAxis& a : axes) {
            if (a.key == axis.key) throw ConfigError("grid axis '" + axis.key + "' given twice");
        }
        axes.push_back(std::move(axis));
    }
    if (axes.empty()) throw ConfigError("empty sweep grid");
    return axes;
}

std::vector<Overrides> expand_grid(const std::vector<GridAxis>& axes) {
    std::vector<Overrides> points{{}};
    for (const GridAxis& axis : axes) {
        std::vector<Overrides> next;
        next.reserve(points.size() * axis.values.size());
        for (const Overrides& p : points) {
            for (const std::string& v : axis.values) {
                Overrides q = p;
                q.emplace_back(axis.key, v);
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    return points;
}

int cmd_simulate(const CommonArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load_config(args.config_path, collect_overrides(args));
        const RunResult r = run(cfg);
        const auto files = render(cfg, r, args.timing);
        return emit(resolve_output_dir(args.out_dir, cfg), files, out);
    });
}

int cmd_needle(const CommonArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load_config(args.config_path, collect_overrides(args));
        if (cfg.protocol != Protocol::Needle) throw ConfigError("the needle command needs 'protocol: needle'");
        const RunResult r = run(cfg);
        const auto files = render(cfg, r, args.timing);
        return emit(resolve_output_dir(args.out_dir, cfg), files, out);
    });
}

int cmd_sweep(const CommonArgs& args, const std::string& grid, unsigned threads, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const std::vector<GridAxis> axes = parse_grid(grid);
        const RunConfig base = load_config(args.config_path, collect_overrides(args));
        const auto points = expand_grid(axes);

        std::vector<SweepRow> rows(points.size());
        std::vector<std::uint64_t> seeds(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) seeds[i] = base.seed + i;

        // yaml-cpp documents are not safe to share across threads: build every point's document up front.
        std::vector<std::optional<YAML::Node>> docs(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            try {
                YAML::Node doc = YAML::Clone(base.source);
                for (const auto& [k, v] : points[i]) apply_override(doc, k, v);
                apply_override(doc, "numerics.seed", std::to_string(seeds[i]));
                docs[i] = doc;
            } catch (const ConfigError& e) {
                rows[i].status = "config_error";
                rows[i].error = e.what();
            }
        }

        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < points.size(); i = next++) {
                if (docs[i]) rows[i] = run_point(*docs[i]);
            }
        };
        const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(points.size())));
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        std::string csv = "point";
        for (const GridAxis& a : axes) csv += ',' + quoted(a.key);
        csv += ",seed,status,net_work_extracted,gross_work_extracted,measurement_charges,heat_absorbed,"
               "second_law_consistent,max_sigma_violation,error\n";
        for (std::size_t i = 0; i < points.size(); ++i) {
            const SweepRow& r = rows[i];
            csv += std::to_string(i);
            for (const auto& kv : points[i]) csv += ',' + quoted(kv.second);
            csv += ',' + std::to_string(seeds[i]) + ',' + r.status + ',' + r.net + ',' + r.gross + ',' + r.charges + ',' +
                   r.heat + ',' + r.consistent + ',' + r.sigma_violation + ',' + quoted(r.error) + '\n';
        }
        return emit(resolve_output_dir(args.out_dir, base), {{"sweep.csv", csv}}, out);
    });
}

} // namespace qthermo::cli
