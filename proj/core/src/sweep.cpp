#include "qet/sweep.hpp"

#include "qet/csv.hpp"
#include "qet/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace qet {

namespace {

std::string trimmed(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::istringstream in(s);
    std::string part;
    while (std::getline(in, part, sep)) {
        parts.push_back(trimmed(part));
    }
    return parts;
}

bool numeric_token(const std::string& token) {
    return !token.empty() && (std::isdigit(static_cast<unsigned char>(token[0])) != 0 || token[0] == '.' ||
                              ((token[0] == '-' || token[0] == '+') && token.size() > 1 &&
                               (std::isdigit(static_cast<unsigned char>(token[1])) != 0 || token[1] == '.')));
}

double lookup(const KeyValueFile& file, const std::string& key) {
    const auto* e = file.find(key);
    if (e == nullptr) {
        throw ConfigError(0, key, "constraint references a key that is neither swept nor set");
    }
    return parse_double(e->value, e->line, e->key);
}

void assign(KeyValueFile& file, const std::string& target, double value) {
    if (target == "alpha") {
        const auto* d = file.find("noise.delta");
        const double delta = d == nullptr ? 1.0 : parse_double(d->value, d->line, d->key);
        file.set("noise.tau_c", format_double(value / delta));
    } else {
        file.set(target, format_double(value));
    }
}

std::string cell(double value) {
    return format_double(value);
}

std::optional<double> column_value(const SweepPoint& p, const std::string& col) {
    if (p.propagated) {
        if (col == "end_trace") {
            return p.end_trace;
        }
        if (col == "min_eigenvalue") {
            return p.min_eigenvalue;
        }
        if (col == "max_trace_increase") {
            return p.max_trace_increase;
        }
    }
    if (!p.measures) {
        return std::nullopt;
    }
    const auto& m = *p.measures;
    if (col == "avg_trapping_time") {
        return m.avg_trapping_time;
    }
    if (col == "avg_minus_offset") {
        return m.avg_minus_offset;
    }
    if (col == "kappa_tau_N") {
        return p.kappa * m.tau_n.back();
    }
    if (col == "eta") {
        return m.eta;
    }
    if (col == "quantum_yield") {
        return m.quantum_yield;
    }
    if (col == "peak_time") {
        return m.peak_time;
    }
    if (col == "peak_value") {
        return m.peak_value;
    }
    if (col == "tail_bound") {
        return m.tail_bound;
    }
    return std::nullopt;
}

} // namespace

std::size_t SweepSpec::size() const {
    std::size_t n = 1;
    for (const auto& axis : axes) {
        n *= axis.values.size();
    }
    return n;
}

const std::vector<std::string>& sweep_measure_columns() {
    static const std::vector<std::string> columns{
        "avg_trapping_time", "avg_minus_offset", "kappa_tau_N", "eta",         "quantum_yield",
        "peak_time",         "peak_value",       "tail_bound",  "end_trace",   "min_eigenvalue",
        "max_trace_increase"};
    return columns;
}

SweepSpec parse_sweep(const KeyValueFile& file) {
    SweepSpec spec;
    std::map<int, SweepAxis> axes;
    std::map<int, const ConfigEntry*> constraint_entries;
    for (const auto& e : file.entries()) {
        if (e.key.rfind("sweep.", 0) != 0) {
            continue;
        }
        const auto parts = split_on(e.key, '.');
        auto index = [&](const std::string& text) {
            const double v = parse_double(text, e.line, e.key);
            if (v < 1 || v > 2 || v != std::floor(v)) {
                throw ConfigError(e.line, e.key, "index must be 1 or 2");
            }
            return static_cast<int>(v);
        };
        if (parts.size() == 3 && parts[1] == "axis") {
            axes[index(parts[2])].target = e.value;
        } else if (parts.size() == 4 && parts[1] == "axis" && parts[3] == "values") {
            axes[index(parts[2])].values = parse_double_list(e.value, e.line, e.key);
        } else if (parts.size() == 4 && parts[1] == "axis" && parts[3] == "range") {
            const auto r = parse_double_list(e.value, e.line, e.key);
            if (r.size() != 3 || r[2] < 1 || r[2] != std::floor(r[2])) {
                throw ConfigError(e.line, e.key, "expected start, stop, count");
            }
            const auto count = static_cast<int>(r[2]);
            auto& values = axes[index(parts[2])].values;
            values.clear();
            for (int k = 0; k < count; ++k) {
                values.push_back(count == 1 ? r[0] : r[0] + (r[1] - r[0]) * k / (count - 1));
            }
        } else if (parts.size() == 3 && parts[1] == "constraint") {
            const double v = parse_double(parts[2], e.line, e.key);
            if (v < 1 || v != std::floor(v)) {
                throw ConfigError(e.line, e.key, "constraint index must be a positive integer");
            }
            constraint_entries[static_cast<int>(v)] = &e;
        } else if (e.key == "sweep.columns") {
            for (const auto& name : split_on(e.value, ',')) {
                const auto& known = sweep_measure_columns();
                if (std::find(known.begin(), known.end(), name) == known.end()) {
                    throw ConfigError(e.line, e.key, "unknown column '" + name + "'");
                }
                spec.columns.push_back(name);
            }
        } else {
            throw ConfigError(e.line, e.key, "unknown sweep key");
        }
    }
    for (auto& [i, axis] : axes) {
        if (axis.target.empty() || axis.values.empty()) {
            throw ConfigError(0, "sweep.axis." + std::to_string(i), "axis needs a target and values");
        }
        if (i == 2 && axes.count(1) == 0) {
            throw ConfigError(0, "sweep.axis.2", "axis 2 requires axis 1");
        }
        spec.axes.push_back(axis);
    }
    for (const auto& [i, e] : constraint_entries) {
        const auto eq = e->value.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(e->line, e->key, "expected 'target = factor * factor ...'");
        }
        SweepConstraint c;
        c.target = trimmed(e->value.substr(0, eq));
        for (auto token : split_on(e->value.substr(eq + 1), '*')) {
            if (token.empty()) {
                throw ConfigError(e->line, e->key, "empty factor");
            }
            if (numeric_token(token)) {
                c.coefficient *= parse_double(token, e->line, e->key);
                continue;
            }
            if (token[0] == '-') {
                c.coefficient = -c.coefficient;
                token = trimmed(token.substr(1));
            }
            c.factors.push_back(token);
        }
        spec.constraints.push_back(c);
    }
    if (spec.columns.empty()) {
        spec.columns = sweep_measure_columns();
    }
    // Targets and factors must resolve on the base configuration.
    for (const auto& c : spec.constraints) {
        for (const auto& f : c.factors) {
            const bool swept = std::any_of(spec.axes.begin(), spec.axes.end(),
                                           [&](const SweepAxis& a) { return a.target == f; });
            const bool earlier = std::any_of(spec.constraints.begin(), spec.constraints.end(),
                                             [&](const SweepConstraint& o) { return o.target == f; });
            if (!swept && !earlier && file.find(f) == nullptr) {
                throw ConfigError(0, f, "constraint references a key that is neither swept nor set");
            }
        }
    }
    return spec;
}

KeyValueFile sweep_point_file(const KeyValueFile& base, const SweepSpec& spec, std::size_t index,
                              std::vector<double>* axis_values, std::vector<double>* derived_values) {
    KeyValueFile file = base;
    std::size_t stride = spec.size();
    for (const auto& axis : spec.axes) {
        stride /= axis.values.size();
        const double value = axis.values[(index / stride) % axis.values.size()];
        assign(file, axis.target, value);
        if (axis_values != nullptr) {
            axis_values->push_back(value);
        }
    }
    for (const auto& c : spec.constraints) {
        double value = c.coefficient;
        for (const auto& f : c.factors) {
            value *= lookup(file, f == "alpha" ? "noise.tau_c" : f);
        }
        assign(file, c.target, value);
        if (derived_values != nullptr) {
            derived_values->push_back(value);
        }
    }
    return file;
}

std::vector<SweepPoint> run_sweep(const KeyValueFile& base, const SweepSpec& spec, int jobs, bool force) {
    const std::size_t total = spec.size();
    if (total > kMaxSweepPoints && !force) {
        throw ConfigError(0, "sweep", std::to_string(total) + " grid points exceed the budget of " +
                                          std::to_string(kMaxSweepPoints) + "; pass --force");
    }
    // Config errors on the base file surface before any work starts.
    parse_run_config(sweep_point_file(base, spec, 0));

    std::vector<SweepPoint> points(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
            SweepPoint& p = points[i];
            try {
                const auto file = sweep_point_file(base, spec, i, &p.axis_values, &p.derived_values);
                RunConfig cfg = parse_run_config(file);
                cfg.output.states = false;
                p.kappa = cfg.chain.kappa;
                const auto result = simulate(cfg);
                const auto& traj = result.trajectory;
                p.end_trace = traj.end_trace();
                p.min_eigenvalue = traj.min_eigenvalue;
                p.max_hermiticity_error = traj.max_hermiticity_error;
                p.max_trace_increase = traj.max_trace_increase;
                p.propagated = true;
                p.measures = result.measures;
                p.error = result.measures_error;
            } catch (const std::exception& err) {
                p.error = err.what();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < workers; ++j) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return points;
}

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepPoint>& points) {
    os << "# qet " << kVersion << " sweep\n";
    std::vector<std::string> header;
    for (const auto& axis : spec.axes) {
        header.push_back(axis.target);
    }
    for (const auto& c : spec.constraints) {
        header.push_back(c.target);
    }
    for (const auto& col : spec.columns) {
        header.push_back(col);
    }
    header.emplace_back("error");
    for (std::size_t i = 0; i < header.size(); ++i) {
        os << (i == 0 ? "" : ",") << csv_escape(header[i]);
    }
    os << '\n';

    for (const auto& p : points) {
        std::vector<std::string> row;
        for (const double v : p.axis_values) {
            row.push_back(cell(v));
        }
        for (const double v : p.derived_values) {
            row.push_back(cell(v));
        }
        row.resize(spec.axes.size() + spec.constraints.size());
        for (const auto& col : spec.columns) {
            const auto value = column_value(p, col);
            row.push_back(value ? cell(*value) : std::string());
        }
        row.push_back(p.error);
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i == 0 ? "" : ",") << csv_escape(row[i]);
        }
        os << '\n';
    }
}

} // namespace qet
