// plot.hpp — Deterministic SVG line and contour plots from CSV tables
//
//   plot.type = line | contour
//   plot.input = a.csv, b.csv     # one series per input and y column
//   plot.x = t
//   plot.y = pop_2
//   plot.z = avg_minus_offset     # contour only
//   plot.labels = alpha=0.1, alpha=1
//   plot.title = ...
//   plot.levels = 10
//   plot.output = figure.svg

#pragma once

#include "qet/config.hpp"
#include "qet/csv.hpp"

#include <string>
#include <vector>

namespace qet {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotLabels {
    std::string title;
    std::string x;
    std::string y;
};

// Four dash styles cycle over the series. Empty input draws the axes only.
std::string line_plot_svg(const std::vector<Series>& series, const PlotLabels& labels);

// z is indexed [iy][ix]; non-finite cells are left blank.
std::string contour_plot_svg(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<std::vector<double>>& z, const PlotLabels& labels,
                             int levels);

struct PlotSpec {
    std::string type{"line"};
    std::vector<std::string> inputs;
    std::string x{"t"};
    std::vector<std::string> y;
    std::string z;
    std::vector<std::string> labels;
    std::string title;
    int levels{10};
    std::string output{"plot.svg"};
};

PlotSpec parse_plot(const KeyValueFile& file);

// Throws SpecError for unknown columns.
std::string render_plot(const PlotSpec& spec, const std::vector<CsvTable>& tables);

} // namespace qet
