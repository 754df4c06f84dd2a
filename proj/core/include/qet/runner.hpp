// runner.hpp — Single runs, oracle runs and TCL2-vs-oracle comparison from a RunConfig

#pragma once

#include "qet/config.hpp"
#include "qet/integrator.hpp"
#include "qet/mc_oracle.hpp"
#include "qet/measures.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qet {

inline constexpr const char* kVersion = "0.1.0";

std::unique_ptr<Generator> make_generator(const RunConfig& cfg);

// Dephasing rate used by the Lindblad engine.
double lindblad_rate(const RunConfig& cfg);

// Integrator settings with the resolved step; throws SpecError if the step
// exceeds the stable limit.
IntegratorConfig integrator_settings(const RunConfig& cfg);

struct SimulationResult {
    Trajectory trajectory;
    std::optional<TransportMeasures> measures;
    std::string measures_error; // set when the measures could not be computed
    CovarianceReport covariance;
    std::vector<std::string> warnings;
};

// Throws NumericalError on a propagation abort. A run that does not
// converge still returns its trajectory, with measures_error set.
SimulationResult simulate(const RunConfig& cfg);

McConfig oracle_settings(const RunConfig& cfg, int jobs);
NoiseSpec oracle_noise(const RunConfig& cfg);
McEstimate run_oracle(const RunConfig& cfg, int jobs);

struct CompareReport {
    std::vector<double> max_deviation;    // per site, max_t |engine - MC|
    std::vector<double> time_of_max;
    std::vector<double> envelope_at_max;  // max(3 stderr, 0.01) where the deviation peaks
    std::vector<double> max_ratio;        // max_t deviation / envelope
    bool pass{false};
    Trajectory engine;
    McEstimate oracle;
};

// Populations of the configured engine against the oracle on t in [0, oracle.t_max].
CompareReport run_compare(const RunConfig& cfg, int jobs);

void write_measures_json(std::ostream& os, const RunConfig& cfg, const SimulationResult& result);
void write_compare_json(std::ostream& os, const RunConfig& cfg, const CompareReport& report);
void write_compare_csv(std::ostream& os, const CompareReport& report);

} // namespace qet
