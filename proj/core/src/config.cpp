#include "qet/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace qet {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

long long parse_integer(std::string_view text, int line, const std::string& key) {
    long long value = 0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(line, key, "expected an integer, got '" + std::string(text) + "'");
    }
    return value;
}

std::uint64_t parse_unsigned(std::string_view text, int line, const std::string& key) {
    std::uint64_t value = 0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(line, key, "expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return value;
}

bool parse_bool(std::string_view text, int line, const std::string& key) {
    const auto t = trim(text);
    if (t == "true") {
        return true;
    }
    if (t == "false") {
        return false;
    }
    throw ConfigError(line, key, "expected true or false, got '" + std::string(text) + "'");
}

// "prefix.n.m" -> (n, m), 1-based in the file, 0-based out.
bool matrix_entry(const std::string& key, const std::string& prefix, int n_sites, int line,
                  std::pair<int, int>& out) {
    if (key.rfind(prefix + ".", 0) != 0) {
        return false;
    }
    const auto parts = split(std::string_view(key).substr(prefix.size() + 1), '.');
    if (parts.size() != 2) {
        return false;
    }
    const auto n = parse_integer(parts[0], line, key);
    const auto m = parse_integer(parts[1], line, key);
    if (n < 1 || m < 1 || n > n_sites || m > n_sites) {
        throw ConfigError(line, key, "site index out of range 1.." + std::to_string(n_sites));
    }
    out = {static_cast<int>(n - 1), static_cast<int>(m - 1)};
    return true;
}

bool same(const IntegratorConfig& a, const IntegratorConfig& b) {
    return a.step == b.step && a.t_max == b.t_max && a.stop_trace == b.stop_trace &&
           a.snapshot_stride == b.snapshot_stride && a.dense_stationary == b.dense_stationary &&
           a.monitor_positivity == b.monitor_positivity && a.store_states == b.store_states;
}

constexpr std::array<const char*, 24> kScalarKeys{
    "chain.omega",      "chain.v",          "chain.kappa",
    "noise.c",          "noise.delta",      "noise.tau_c",
    "noise.epsilon_sq", "engine",           "trap_mode",
    "lindblad.gamma",   "integrator.step",  "integrator.t_max",
    "integrator.stop_trace", "integrator.snapshot_stride", "integrator.dense_stationary",
    "initial.site",     "measures.t_u",     "measures.k_d",
    "oracle.n_traj",    "oracle.seed",      "oracle.t_max",
    "oracle.epsilon_sq", "output.trajectory", "output.states"};

bool known_scalar(const std::string& key) {
    return std::any_of(kScalarKeys.begin(), kScalarKeys.end(), [&](const char* k) { return key == k; });
}

void emit(std::ostringstream& os, const std::string& key, const std::string& value) {
    os << key << " = " << value << '\n';
}

std::string matrix_key(const char* prefix, int n, int m) {
    return std::string(prefix) + "." + std::to_string(n + 1) + "." + std::to_string(m + 1);
}

} // namespace

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : SpecError([&] {
          std::ostringstream msg;
          msg << "config";
          if (line > 0) {
              msg << " line " << line;
          }
          if (!key.empty()) {
              msg << " key '" << key << "'";
          }
          msg << ": " << message;
          return msg.str();
      }()),
      line_(line), key_(std::move(key)) {}

KeyValueFile KeyValueFile::parse(std::string_view text) {
    KeyValueFile file;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        auto line = text.substr(start, end == std::string_view::npos ? end : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(line_no, "", "expected 'key = value', got '" + std::string(line) + "'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw ConfigError(line_no, "", "empty key");
        }
        if (value.empty()) {
            throw ConfigError(line_no, key, "empty value");
        }
        if (file.find(key) != nullptr) {
            throw ConfigError(line_no, key, "duplicate key");
        }
        file.entries_.push_back({key, value, line_no});
    }
    return file;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(0, "", "cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

const ConfigEntry* KeyValueFile::find(std::string_view key) const {
    for (const auto& e : entries_) {
        if (e.key == key) {
            return &e;
        }
    }
    return nullptr;
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
    for (auto& e : entries_) {
        if (e.key == key) {
            e.value = value;
            return;
        }
    }
    entries_.push_back({key, value, 0});
}

const char* to_string(Engine engine) noexcept {
    return engine == Engine::tcl2 ? "tcl2" : "lindblad";
}

bool RunConfig::operator==(const RunConfig& other) const {
    return chain == other.chain && noise == other.noise && engine == other.engine &&
           trap == other.trap && lindblad_gamma == other.lindblad_gamma &&
           same(integrator, other.integrator) && auto_step == other.auto_step &&
           initial_site == other.initial_site && measures.t_u == other.measures.t_u &&
           measures.k_d == other.measures.k_d && measures.stop_trace == other.measures.stop_trace &&
           oracle.n_traj == other.oracle.n_traj && oracle.seed == other.oracle.seed &&
           oracle.t_max == other.oracle.t_max && oracle.epsilon_sq == other.oracle.epsilon_sq &&
           output.trajectory == other.output.trajectory && output.states == other.output.states;
}

double parse_double(std::string_view text, int line, const std::string& key) {
    const auto t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(value)) {
        throw ConfigError(line, key, "expected a finite number, got '" + std::string(text) + "'");
    }
    return value;
}

std::vector<double> parse_double_list(std::string_view text, int line, const std::string& key) {
    std::vector<double> values;
    for (const auto part : split(text, ',')) {
        values.push_back(parse_double(part, line, key));
    }
    return values;
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) {
        throw std::logic_error("format_double: buffer too small");
    }
    return std::string(buf.data(), ptr);
}

RunConfig parse_run_config(const KeyValueFile& file) {
    RunConfig cfg;
    const auto* omega_entry = file.find("chain.omega");
    if (omega_entry == nullptr) {
        throw ConfigError(0, "chain.omega", "missing required key");
    }
    const auto omega = parse_double_list(omega_entry->value, omega_entry->line, omega_entry->key);
    const int n = static_cast<int>(omega.size());
    if (n < 2) {
        throw ConfigError(omega_entry->line, omega_entry->key, "at least two sites are required");
    }

    auto scalar = [&](const char* key, double fallback) {
        const auto* e = file.find(key);
        return e == nullptr ? fallback : parse_double(e->value, e->line, e->key);
    };

    cfg.chain.omega = Eigen::Map<const RealVector>(omega.data(), n);
    cfg.chain.kappa = scalar("chain.kappa", 0.0);
    cfg.chain.v = RealMatrix::Zero(n, n);
    const double v_fill = scalar("chain.v", 0.0);
    for (int a = 0; a + 1 < n; ++a) {
        cfg.chain.v(a, a + 1) = cfg.chain.v(a + 1, a) = v_fill;
    }
    const double c_fill = scalar("noise.c", 0.0);
    cfg.noise.c = RealMatrix::Constant(n, n, c_fill);
    cfg.noise.c.diagonal().setOnes();
    cfg.noise.delta = RealMatrix::Constant(n, n, scalar("noise.delta", 1.0));
    cfg.noise.tau_c = RealMatrix::Constant(n, n, scalar("noise.tau_c", 1.0));
    cfg.noise.epsilon_sq = scalar("noise.epsilon_sq", 0.0);

    for (const auto& e : file.entries()) {
        if (known_scalar(e.key) || e.key.rfind("sweep.", 0) == 0 || e.key.rfind("plot.", 0) == 0) {
            continue;
        }
        std::pair<int, int> idx;
        if (matrix_entry(e.key, "chain.v", n, e.line, idx)) {
            if (idx.first == idx.second) {
                throw ConfigError(e.line, e.key, "couplings must have a zero diagonal");
            }
            cfg.chain.v(idx.first, idx.second) = cfg.chain.v(idx.second, idx.first) =
                parse_double(e.value, e.line, e.key);
        } else if (matrix_entry(e.key, "noise.c", n, e.line, idx)) {
            if (idx.first == idx.second) {
                throw ConfigError(e.line, e.key, "spatial correlation has a unit diagonal");
            }
            cfg.noise.set_correlation(idx.first, idx.second, parse_double(e.value, e.line, e.key));
        } else if (matrix_entry(e.key, "noise.delta", n, e.line, idx)) {
            cfg.noise.delta(idx.first, idx.second) = cfg.noise.delta(idx.second, idx.first) =
                parse_double(e.value, e.line, e.key);
        } else if (matrix_entry(e.key, "noise.tau_c", n, e.line, idx)) {
            cfg.noise.tau_c(idx.first, idx.second) = cfg.noise.tau_c(idx.second, idx.first) =
                parse_double(e.value, e.line, e.key);
        } else {
            throw ConfigError(e.line, e.key, "unknown key");
        }
    }

    if (const auto* e = file.find("engine")) {
        if (e->value == "tcl2") {
            cfg.engine = Engine::tcl2;
        } else if (e->value == "lindblad") {
            cfg.engine = Engine::lindblad;
        } else {
            throw ConfigError(e->line, e->key, "expected tcl2 or lindblad");
        }
    }
    if (const auto* e = file.find("trap_mode")) {
        try {
            cfg.trap = trap_mode_from_string(e->value);
        } catch (const SpecError& err) {
            throw ConfigError(e->line, e->key, err.what());
        }
    }
    if (const auto* e = file.find("lindblad.gamma"); e != nullptr && e->value != "auto") {
        cfg.lindblad_gamma = parse_double(e->value, e->line, e->key);
        if (*cfg.lindblad_gamma < 0.0) {
            throw ConfigError(e->line, e->key, "must be >= 0");
        }
    }
    if (const auto* e = file.find("integrator.step"); e != nullptr && e->value != "auto") {
        cfg.auto_step = false;
        cfg.integrator.step = parse_double(e->value, e->line, e->key);
    }
    cfg.integrator.t_max = scalar("integrator.t_max", cfg.integrator.t_max);
    cfg.integrator.stop_trace = scalar("integrator.stop_trace", cfg.integrator.stop_trace);
    if (const auto* e = file.find("integrator.snapshot_stride")) {
        const auto stride = parse_integer(e->value, e->line, e->key);
        if (stride < 1 || stride > std::numeric_limits<int>::max()) {
            throw ConfigError(e->line, e->key, "must be a positive integer");
        }
        cfg.integrator.snapshot_stride = static_cast<int>(stride);
    }
    if (const auto* e = file.find("integrator.dense_stationary")) {
        cfg.integrator.dense_stationary = parse_bool(e->value, e->line, e->key);
    }
    if (const auto* e = file.find("initial.site")) {
        const auto site = parse_integer(e->value, e->line, e->key);
        if (site < 1 || site > n) {
            throw ConfigError(e->line, e->key, "site out of range 1.." + std::to_string(n));
        }
        cfg.initial_site = static_cast<int>(site - 1);
    }
    cfg.measures.t_u = scalar("measures.t_u", cfg.measures.t_u);
    cfg.measures.k_d = scalar("measures.k_d", cfg.measures.k_d);
    cfg.measures.stop_trace = cfg.integrator.stop_trace;

    if (const auto* e = file.find("oracle.n_traj")) {
        const auto count = parse_integer(e->value, e->line, e->key);
        if (count < 2 || count > std::numeric_limits<int>::max()) {
            throw ConfigError(e->line, e->key, "must be an integer >= 2");
        }
        cfg.oracle.n_traj = static_cast<int>(count);
    }
    if (const auto* e = file.find("oracle.seed")) {
        cfg.oracle.seed = parse_unsigned(e->value, e->line, e->key);
    }
    cfg.oracle.t_max = scalar("oracle.t_max", cfg.oracle.t_max);
    if (const auto* e = file.find("oracle.epsilon_sq")) {
        cfg.oracle.epsilon_sq = parse_double(e->value, e->line, e->key);
    }
    if (const auto* e = file.find("output.trajectory")) {
        cfg.output.trajectory = parse_bool(e->value, e->line, e->key);
    }
    if (const auto* e = file.find("output.states")) {
        cfg.output.states = parse_bool(e->value, e->line, e->key);
    }

    // Model-level invariants, reported against the config as a whole.
    try {
        cfg.chain.validate();
        cfg.noise.validate(n);
        cfg.integrator.validate();
        if (!(cfg.measures.t_u >= 0.0) || !(cfg.measures.k_d >= 0.0)) {
            throw SpecError("measures.t_u and measures.k_d must be >= 0");
        }
        if (!(cfg.oracle.t_max > 0.0)) {
            throw SpecError("oracle.t_max must be > 0");
        }
        if (cfg.oracle.epsilon_sq && *cfg.oracle.epsilon_sq < 0.0) {
            throw SpecError("oracle.epsilon_sq must be >= 0");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const SpecError& err) {
        throw ConfigError(0, "", err.what());
    }
    return cfg;
}

RunConfig parse_run_config(std::string_view text) {
    return parse_run_config(KeyValueFile::parse(text));
}

std::string echo(const RunConfig& cfg) {
    std::ostringstream os;
    const int n = cfg.chain.n_sites();
    std::string omega;
    for (int a = 0; a < n; ++a) {
        omega += (a == 0 ? "" : ", ") + format_double(cfg.chain.omega(a));
    }
    emit(os, "chain.omega", omega);
    emit(os, "chain.kappa", format_double(cfg.chain.kappa));
    emit(os, "chain.v", "0");
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (cfg.chain.v(a, b) != 0.0) {
                emit(os, matrix_key("chain.v", a, b), format_double(cfg.chain.v(a, b)));
            }
        }
    }
    emit(os, "noise.c", "0");
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (cfg.noise.c(a, b) != 0.0) {
                emit(os, matrix_key("noise.c", a, b), format_double(cfg.noise.c(a, b)));
            }
        }
    }
    const auto filled = [&](const char* prefix, const RealMatrix& m) {
        const double fill = m(0, 0);
        emit(os, prefix, format_double(fill));
        for (int a = 0; a < n; ++a) {
            for (int b = a; b < n; ++b) {
                if (m(a, b) != fill) {
                    emit(os, matrix_key(prefix, a, b), format_double(m(a, b)));
                }
            }
        }
    };
    filled("noise.delta", cfg.noise.delta);
    filled("noise.tau_c", cfg.noise.tau_c);
    emit(os, "noise.epsilon_sq", format_double(cfg.noise.epsilon_sq));
    emit(os, "engine", to_string(cfg.engine));
    emit(os, "trap_mode", to_string(cfg.trap));
    emit(os, "lindblad.gamma", cfg.lindblad_gamma ? format_double(*cfg.lindblad_gamma) : "auto");
    emit(os, "integrator.step", cfg.auto_step ? "auto" : format_double(cfg.integrator.step));
    emit(os, "integrator.t_max", format_double(cfg.integrator.t_max));
    emit(os, "integrator.stop_trace", format_double(cfg.integrator.stop_trace));
    emit(os, "integrator.snapshot_stride", std::to_string(cfg.integrator.snapshot_stride));
    emit(os, "integrator.dense_stationary", cfg.integrator.dense_stationary ? "true" : "false");
    emit(os, "initial.site", std::to_string(cfg.initial_site + 1));
    emit(os, "measures.t_u", format_double(cfg.measures.t_u));
    emit(os, "measures.k_d", format_double(cfg.measures.k_d));
    emit(os, "oracle.n_traj", std::to_string(cfg.oracle.n_traj));
    emit(os, "oracle.seed", std::to_string(cfg.oracle.seed));
    emit(os, "oracle.t_max", format_double(cfg.oracle.t_max));
    if (cfg.oracle.epsilon_sq) {
        emit(os, "oracle.epsilon_sq", format_double(*cfg.oracle.epsilon_sq));
    }
    emit(os, "output.trajectory", cfg.output.trajectory ? "true" : "false");
    emit(os, "output.states", cfg.output.states ? "true" : "false");
    return os.str();
}

double memory_time(const RunConfig& cfg) {
    if (cfg.engine == Engine::lindblad) {
        return std::numeric_limits<double>::infinity();
    }
    return cfg.noise.tau_c.minCoeff();
}

double resolved_step(const RunConfig& cfg) {
    if (!cfg.auto_step) {
        return cfg.integrator.step;
    }
    return std::min(0.01, max_stable_step(cfg.chain, memory_time(cfg)));
}

} // namespace qet
