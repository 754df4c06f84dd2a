// sweep.hpp — Grid sweeps over up to two configuration keys with product constraints
//
//   sweep.axis.1 = noise.c.1.2
//   sweep.axis.1.values = -1, 0, 1        # or
//   sweep.axis.1.range = -1, 1, 17        # start, stop, count
//   sweep.constraint.1 = noise.c.1.3 = noise.c.1.2 * noise.c.2.3
//   sweep.columns = avg_minus_offset, eta
//
// `alpha` as a target sets noise.tau_c = alpha / noise.delta.

#pragma once

#include "qet/config.hpp"
#include "qet/measures.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qet {

struct SweepAxis {
    std::string target;
    std::vector<double> values;
};

// target = coefficient * product of the referenced keys.
struct SweepConstraint {
    std::string target;
    double coefficient{1.0};
    std::vector<std::string> factors;
};

inline constexpr std::size_t kMaxSweepPoints = 10000;

struct SweepSpec {
    std::vector<SweepAxis> axes;
    std::vector<SweepConstraint> constraints;
    std::vector<std::string> columns; // measure columns, in output order

    std::size_t size() const;
};

// Names accepted by sweep.columns, in default order.
const std::vector<std::string>& sweep_measure_columns();

SweepSpec parse_sweep(const KeyValueFile& file);

struct SweepPoint {
    std::vector<double> axis_values;
    std::vector<double> derived_values;
    std::optional<TransportMeasures> measures;
    double kappa{0.0};
    bool propagated{false}; // the run finished; diagnostics are valid
    double end_trace{0.0};
    double min_eigenvalue{0.0};
    double max_hermiticity_error{0.0};
    double max_trace_increase{0.0};
    std::string error;
};

// Configuration of grid point `index` (row-major over axes).
KeyValueFile sweep_point_file(const KeyValueFile& base, const SweepSpec& spec, std::size_t index,
                              std::vector<double>* axis_values = nullptr,
                              std::vector<double>* derived_values = nullptr);

// Throws ConfigError when the grid exceeds kMaxSweepPoints and !force.
std::vector<SweepPoint> run_sweep(const KeyValueFile& base, const SweepSpec& spec, int jobs, bool force);

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepPoint>& points);

} // namespace qet
