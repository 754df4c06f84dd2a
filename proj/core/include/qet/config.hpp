// config.hpp — Flat dotted key = value run configuration with canonical echo
//
// Site indices in keys are 1-based. Matrices start from a fill value and
// accept per-entry overrides, e.g.
//
//   chain.omega = 1.5, 1.2, 1.0
//   chain.v = 0.1              # nearest-neighbour fill
//   chain.v.2.3 = 0.15         # one entry, mirrored
//   noise.c = 0                # off-diagonal fill
//   noise.c.1.3 = 1
//   integrator.step = auto

#pragma once

#include "qet/generator.hpp"
#include "qet/integrator.hpp"
#include "qet/measures.hpp"
#include "qet/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qet {

// Malformed configuration; carries the offending line (0 if not tied to a
// line) and key.
class ConfigError : public SpecError {
public:
    ConfigError(int line, std::string key, const std::string& message);

    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

struct ConfigEntry {
    std::string key;
    std::string value;
    int line{0};
};

// Ordered key/value pairs; '#' starts a comment. Duplicate keys are errors.
class KeyValueFile {
public:
    static KeyValueFile parse(std::string_view text);
    static KeyValueFile load(const std::string& path);

    const std::vector<ConfigEntry>& entries() const noexcept { return entries_; }
    const ConfigEntry* find(std::string_view key) const;

    // Replaces the value of an existing key or appends a new entry.
    void set(const std::string& key, const std::string& value);

private:
    std::vector<ConfigEntry> entries_;
};

enum class Engine { tcl2, lindblad };

const char* to_string(Engine engine) noexcept;

struct OracleSettings {
    int n_traj{10000};
    std::uint64_t seed{1};
    double t_max{500.0};
    std::optional<double> epsilon_sq; // overrides noise.epsilon_sq in the oracle only
};

struct OutputSettings {
    bool trajectory{true};
    bool states{true}; // rho_re/rho_im columns in trajectory.csv
};

struct RunConfig {
    ChainSpec chain;
    NoiseSpec noise;
    Engine engine{Engine::tcl2};
    TrapMode trap{TrapMode::population_only};
    std::optional<double> lindblad_gamma; // empty: white_noise_rate(noise)
    IntegratorConfig integrator;
    bool auto_step{true};                 // step = min(0.01, max_stable_step)
    int initial_site{0};                  // 0-based
    MeasureConfig measures;
    OracleSettings oracle;
    OutputSettings output;

    bool operator==(const RunConfig& other) const;
};

// Keys under sweep.* and plot.* are ignored here.
RunConfig parse_run_config(const KeyValueFile& file);
RunConfig parse_run_config(std::string_view text);

// Canonical text that parses back to an identical RunConfig.
std::string echo(const RunConfig& cfg);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

double parse_double(std::string_view text, int line, const std::string& key);
std::vector<double> parse_double_list(std::string_view text, int line, const std::string& key);

// Step used by the run: the configured one, or min(0.01, max_stable_step).
double resolved_step(const RunConfig& cfg);

// Smallest correlation time of the noise, or infinity for the Lindblad engine.
double memory_time(const RunConfig& cfg);

} // namespace qet
