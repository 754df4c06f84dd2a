// csv.hpp — Trajectory and oracle CSV writers, generic numeric CSV reader
//
// Trajectory columns, in order: t, rho_re_n_m and rho_im_n_m for n <= m
// (row-major, 1-based), pop_1..pop_N, trace. Oracle output appends
// stderr_1..stderr_N. Numbers use the shortest round-trip form.

#pragma once

#include "qet/integrator.hpp"
#include "qet/mc_oracle.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qet {

std::vector<std::string> trajectory_columns(int n_sites, bool with_states);

// Writes rho columns only when the trajectory stored states and
// `with_states` is set.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, bool with_states = true);

void write_oracle_csv(std::ostream& os, const McEstimate& est);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows; // raw cells

    // Index of a column; -1 if absent.
    int column(const std::string& name) const;

    // Cell as a number; NaN when empty or not numeric.
    double number(std::size_t row, int column) const;
};

// Lines starting with '#' are skipped. Throws SpecError on ragged rows.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

// Quotes a cell when it contains a separator, quote or newline.
std::string csv_escape(const std::string& cell);

} // namespace qet
