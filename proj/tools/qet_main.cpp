// qet_main.cpp — Command-line front end: simulate, sweep, oracle, compare, plot

#include "qet/config.hpp"
#include "qet/csv.hpp"
#include "qet/plot.hpp"
#include "qet/runner.hpp"
#include "qet/sweep.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace {

enum ExitCode { ok = 0, config_error = 2, numerical_failure = 3, verification_failed = 4 };

struct Options {
    std::string config;
    std::string out{"."};
    int jobs{1};
    std::optional<std::uint64_t> seed;
    bool force{false};
};

int default_jobs() {
    if (const char* env = std::getenv("QET_JOBS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return n;
        }
    }
    return 1;
}

std::ofstream open_output(const Options& opt, const std::string& name) {
    std::error_code ec;
    fs::create_directories(opt.out, ec);
    const auto path = fs::path(opt.out) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw qet::ConfigError(0, "", "cannot write '" + path.string() + "'");
    }
    return os;
}

qet::RunConfig load_config(const Options& opt, const qet::KeyValueFile& file) {
    auto cfg = qet::parse_run_config(file);
    if (opt.seed) {
        cfg.oracle.seed = *opt.seed;
    }
    return cfg;
}

int cmd_simulate(const Options& opt) {
    const auto file = qet::KeyValueFile::load(opt.config);
    const auto cfg = load_config(opt, file);
    const auto result = qet::simulate(cfg);
    if (cfg.output.trajectory) {
        auto os = open_output(opt, "trajectory.csv");
        qet::write_trajectory_csv(os, result.trajectory, cfg.output.states);
    }
    auto js = open_output(opt, "measures.json");
    qet::write_measures_json(js, cfg, result);
    for (const auto& w : result.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    if (!result.measures && !(cfg.chain.kappa > 0.0)) {
        std::cerr << "note: " << result.measures_error << '\n';
        return ok;
    }
    if (!result.measures) {
        std::cerr << "error: " << result.measures_error << '\n';
        return numerical_failure;
    }
    const auto& m = *result.measures;
    std::cout << "<t> - 1/kappa = " << qet::format_double(m.avg_minus_offset)
              << "  eta(" << qet::format_double(m.t_u) << ") = " << qet::format_double(m.eta) << '\n';
    return ok;
}

int cmd_sweep(const Options& opt) {
    const auto file = qet::KeyValueFile::load(opt.config);
    const auto spec = qet::parse_sweep(file);
    const auto points = qet::run_sweep(file, spec, opt.jobs, opt.force);
    auto os = open_output(opt, "sweep.csv");
    qet::write_sweep_csv(os, spec, points);
    std::size_t failed = 0;
    for (const auto& p : points) {
        failed += p.error.empty() ? 0 : 1;
    }
    std::cout << points.size() << " points, " << failed << " without measures\n";
    return ok;
}

int cmd_oracle(const Options& opt) {
    const auto file = qet::KeyValueFile::load(opt.config);
    const auto cfg = load_config(opt, file);
    const auto est = qet::run_oracle(cfg, opt.jobs);
    auto os = open_output(opt, "oracle.csv");
    qet::write_oracle_csv(os, est);
    std::cout << est.n_traj << " trajectories to t = " << qet::format_double(est.times.back()) << '\n';
    return ok;
}

int cmd_compare(const Options& opt) {
    const auto file = qet::KeyValueFile::load(opt.config);
    const auto cfg = load_config(opt, file);
    const auto report = qet::run_compare(cfg, opt.jobs);
    {
        auto js = open_output(opt, "compare.json");
        qet::write_compare_json(js, cfg, report);
        auto csv = open_output(opt, "compare.csv");
        qet::write_compare_csv(csv, report);
    }
    for (std::size_t a = 0; a < report.max_deviation.size(); ++a) {
        std::cout << "site " << a + 1 << ": max |engine - MC| = " << qet::format_double(report.max_deviation[a])
                  << " at t = " << qet::format_double(report.time_of_max[a])
                  << ", envelope " << qet::format_double(report.envelope_at_max[a]) << '\n';
    }
    std::cout << (report.pass ? "PASS" : "FAIL") << '\n';
    return report.pass ? ok : verification_failed;
}

int cmd_plot(const Options& opt) {
    const auto file = qet::KeyValueFile::load(opt.config);
    const auto spec = qet::parse_plot(file);
    std::vector<qet::CsvTable> tables;
    for (const auto& input : spec.inputs) {
        const fs::path p(input);
        tables.push_back(qet::read_csv_file((p.is_absolute() ? p : fs::path(opt.out) / p).string()));
    }
    const auto svg = qet::render_plot(spec, tables);
    auto os = open_output(opt, spec.output);
    os << svg;
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qet: correlated-dephasing transport simulator"};
    app.require_subcommand(1);
    Options opt;
    opt.jobs = default_jobs();

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Command commands[] = {
        {"simulate", "Propagate one configuration; writes trajectory.csv and measures.json", cmd_simulate},
        {"sweep", "Run a parameter grid; writes sweep.csv", cmd_sweep},
        {"oracle", "Monte-Carlo average over noise paths; writes oracle.csv", cmd_oracle},
        {"compare", "Engine populations against the Monte-Carlo oracle; exit 4 on failure", cmd_compare},
        {"plot", "Render an SVG from CSV output", cmd_plot},
    };
    int (*selected)(const Options&) = nullptr;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", opt.config, "Configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
        sub->add_option("--jobs", opt.jobs, "Worker threads (default: QET_JOBS or 1)")->check(CLI::PositiveNumber);
        sub->add_option("--seed", opt.seed, "Oracle master seed (overrides oracle.seed)");
        sub->add_flag("--force", opt.force, "Allow sweeps above the point budget");
        sub->callback([&selected, run = c.run] { selected = run; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? ok : config_error;
    }

    try {
        return selected(opt);
    } catch (const qet::SpecError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return config_error;
    } catch (const qet::NumericalError& err) {
        std::cerr << "numerical failure: " << err.what() << '\n';
        return numerical_failure;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return numerical_failure;
    }
}
