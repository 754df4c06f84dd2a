#include "qet/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace qet {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 24.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 56.0;

constexpr std::array<const char*, 4> kDashes{"", "7,4", "2,3", "9,3,2,3"};
constexpr std::array<const char*, 4> kColors{"#1f3b73", "#b2182b", "#1b7837", "#6a3d9a"};

std::string num(double v, const char* fmt = "%.2f") {
    std::array<char, 48> buf{};
    std::snprintf(buf.data(), buf.size(), fmt, v);
    return buf.data();
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (const char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

struct Range {
    double lo{std::numeric_limits<double>::infinity()};
    double hi{-std::numeric_limits<double>::infinity()};

    void add(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    void settle() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        } else if (lo == hi) {
            const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
            lo -= pad;
            hi += pad;
        }
    }
};

std::vector<double> nice_ticks(const Range& r) {
    const double span = r.hi - r.lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (const double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        step = m * mag;
        if (span / step <= 6.0) {
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(r.lo / step - 1e-9) * step; t <= r.hi + 1e-9 * span; t += step) {
        ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    }
    return ticks;
}

class Canvas {
public:
    Canvas(Range xr, Range yr) : xr_(xr), yr_(yr) {}

    double px(double x) const { return kLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - yr_.lo) / (yr_.hi - yr_.lo) * (kHeight - kTop - kBottom); }

    void header(std::ostringstream& os) const {
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
           << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    void axes(std::ostringstream& os, const PlotLabels& labels) const {
        const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
        os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
           << num(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (const double t : nice_ticks(xr_)) {
            const double x = px(t);
            os << "<line x1=\"" << num(x) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x) << "\" y2=\""
               << num(y0 + 5) << "\" stroke=\"black\"/>\n";
            os << "<text x=\"" << num(x) << "\" y=\"" << num(y0 + 19) << "\" text-anchor=\"middle\">"
               << num(t, "%g") << "</text>\n";
        }
        for (const double t : nice_ticks(yr_)) {
            const double y = py(t);
            os << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x0) << "\" y2=\""
               << num(y) << "\" stroke=\"black\"/>\n";
            os << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
               << num(t, "%g") << "</text>\n";
        }
        os << "<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"" << num(kHeight - 14)
           << "\" text-anchor=\"middle\">" << escape_xml(labels.x) << "</text>\n";
        os << "<text x=\"18\" y=\"" << num(0.5 * (y0 + y1)) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
           << num(0.5 * (y0 + y1)) << ")\">" << escape_xml(labels.y) << "</text>\n";
        if (!labels.title.empty()) {
            os << "<text x=\"" << num(0.5 * kWidth) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
               << escape_xml(labels.title) << "</text>\n";
        }
    }

private:
    Range xr_;
    Range yr_;
};

// Grey level for a normalized value in [0, 1]: light for small, dark for large.
std::string shade(double u) {
    const int g = static_cast<int>(std::lround(235.0 - 175.0 * std::clamp(u, 0.0, 1.0)));
    std::array<char, 8> buf{};
    std::snprintf(buf.data(), buf.size(), "#%02x%02x%02x", g, g, std::min(255, g + 10));
    return buf.data();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::istringstream in(s);
    std::string part;
    while (std::getline(in, part, ',')) {
        const auto a = part.find_first_not_of(" \t");
        const auto b = part.find_last_not_of(" \t");
        parts.push_back(a == std::string::npos ? std::string() : part.substr(a, b - a + 1));
    }
    return parts;
}

int require_column(const CsvTable& table, const std::string& name) {
    const int c = table.column(name);
    if (c < 0) {
        throw SpecError("plot: unknown column '" + name + "'");
    }
    return c;
}

} // namespace

std::string line_plot_svg(const std::vector<Series>& series, const PlotLabels& labels) {
    Range xr, yr;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                xr.add(s.x[i]);
                yr.add(s.y[i]);
            }
        }
    }
    xr.settle();
    yr.settle();
    const Canvas canvas(xr, yr);
    std::ostringstream os;
    canvas.header(os);
    canvas.axes(os, labels);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        os << "<polyline fill=\"none\" stroke=\"" << kColors[k % kColors.size()] << "\" stroke-width=\"1.5\"";
        if (*kDashes[k % kDashes.size()] != '\0') {
            os << " stroke-dasharray=\"" << kDashes[k % kDashes.size()] << '"';
        }
        os << " points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                continue;
            }
            os << (first ? "" : " ") << num(canvas.px(s.x[i])) << ',' << num(canvas.py(s.y[i]));
            first = false;
        }
        os << "\"/>\n";
        if (!s.label.empty()) {
            const double ly = kTop + 18.0 + 16.0 * static_cast<double>(k);
            const double lx = kWidth - kRight - 150.0;
            os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 30) << "\" y2=\""
               << num(ly - 4) << "\" stroke=\"" << kColors[k % kColors.size()] << "\" stroke-width=\"1.5\"";
            if (*kDashes[k % kDashes.size()] != '\0') {
                os << " stroke-dasharray=\"" << kDashes[k % kDashes.size()] << '"';
            }
            os << "/>\n<text x=\"" << num(lx + 36) << "\" y=\"" << num(ly) << "\">" << escape_xml(s.label)
               << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string contour_plot_svg(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<std::vector<double>>& z, const PlotLabels& labels,
                             int levels) {
    Range xr, yr, zr;
    for (const double v : x) {
        xr.add(v);
    }
    for (const double v : y) {
        yr.add(v);
    }
    for (const auto& row : z) {
        for (const double v : row) {
            zr.add(v);
        }
    }
    xr.settle();
    yr.settle();
    const bool have_z = zr.lo <= zr.hi;
    zr.settle();
    const Canvas canvas(xr, yr);
    std::ostringstream os;
    canvas.header(os);

    const std::size_t nx = x.size(), ny = y.size();
    const auto at = [&](std::size_t ix, std::size_t iy) {
        return iy < z.size() && ix < z[iy].size() ? z[iy][ix] : std::numeric_limits<double>::quiet_NaN();
    };
    // Cell shading: each grid value fills the rectangle halfway to its neighbours.
    const auto edge = [](const std::vector<double>& g, std::size_t i, bool upper) {
        if (g.size() == 1) {
            return g[0] + (upper ? 0.5 : -0.5);
        }
        if (upper) {
            return i + 1 < g.size() ? 0.5 * (g[i] + g[i + 1]) : g[i] + 0.5 * (g[i] - g[i - 1]);
        }
        return i > 0 ? 0.5 * (g[i - 1] + g[i]) : g[i] - 0.5 * (g[i + 1] - g[i]);
    };
    if (have_z) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const double v = at(ix, iy);
                if (!std::isfinite(v)) {
                    continue;
                }
                const double x0 = std::max(canvas.px(edge(x, ix, false)), kLeft);
                const double x1 = std::min(canvas.px(edge(x, ix, true)), kWidth - kRight);
                const double y0 = std::min(canvas.py(edge(y, iy, false)), kHeight - kBottom);
                const double y1 = std::max(canvas.py(edge(y, iy, true)), kTop);
                os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0)
                   << "\" height=\"" << num(y0 - y1) << "\" fill=\"" << shade((v - zr.lo) / (zr.hi - zr.lo))
                   << "\"/>\n";
            }
        }
        // Marching squares over the grid cells.
        for (int l = 1; l <= levels; ++l) {
            const double level = zr.lo + (zr.hi - zr.lo) * l / (levels + 1);
            os << "<path fill=\"none\" stroke=\"black\" stroke-width=\"0.8\" d=\"";
            for (std::size_t iy = 0; iy + 1 < ny; ++iy) {
                for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
                    const std::array<double, 4> v{at(ix, iy), at(ix + 1, iy), at(ix + 1, iy + 1), at(ix, iy + 1)};
                    if (!std::all_of(v.begin(), v.end(), [](double w) { return std::isfinite(w); })) {
                        continue;
                    }
                    const std::array<std::pair<double, double>, 4> corner{
                        std::pair{x[ix], y[iy]}, std::pair{x[ix + 1], y[iy]},
                        std::pair{x[ix + 1], y[iy + 1]}, std::pair{x[ix], y[iy + 1]}};
                    std::vector<std::pair<double, double>> hits;
                    for (int e = 0; e < 4; ++e) {
                        const int f = (e + 1) % 4;
                        const double a = v[e] - level, b = v[f] - level;
                        if ((a < 0.0) != (b < 0.0)) {
                            const double s = a / (a - b);
                            hits.emplace_back(corner[e].first + s * (corner[f].first - corner[e].first),
                                              corner[e].second + s * (corner[f].second - corner[e].second));
                        }
                    }
                    for (std::size_t h = 0; h + 1 < hits.size(); h += 2) {
                        os << 'M' << num(canvas.px(hits[h].first)) << ',' << num(canvas.py(hits[h].second)) << 'L'
                           << num(canvas.px(hits[h + 1].first)) << ',' << num(canvas.py(hits[h + 1].second));
                    }
                }
            }
            os << "\"/>\n";
        }
        // Marker on the grid minimum.
        double best = std::numeric_limits<double>::infinity();
        std::size_t bx = 0, by = 0;
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                if (std::isfinite(at(ix, iy)) && at(ix, iy) < best) {
                    best = at(ix, iy);
                    bx = ix;
                    by = iy;
                }
            }
        }
        if (std::isfinite(best)) {
            os << "<circle cx=\"" << num(canvas.px(x[bx])) << "\" cy=\"" << num(canvas.py(y[by]))
               << "\" r=\"5\" fill=\"none\" stroke=\"#b2182b\" stroke-width=\"2\"/>\n";
        }
    }
    canvas.axes(os, labels);
    os << "</svg>\n";
    return os.str();
}

PlotSpec parse_plot(const KeyValueFile& file) {
    PlotSpec spec;
    for (const auto& e : file.entries()) {
        if (e.key.rfind("plot.", 0) != 0) {
            continue;
        }
        if (e.key == "plot.type") {
            if (e.value != "line" && e.value != "contour") {
                throw ConfigError(e.line, e.key, "expected line or contour");
            }
            spec.type = e.value;
        } else if (e.key == "plot.input") {
            spec.inputs = split_list(e.value);
        } else if (e.key == "plot.x") {
            spec.x = e.value;
        } else if (e.key == "plot.y") {
            spec.y = split_list(e.value);
        } else if (e.key == "plot.z") {
            spec.z = e.value;
        } else if (e.key == "plot.labels") {
            spec.labels = split_list(e.value);
        } else if (e.key == "plot.title") {
            spec.title = e.value;
        } else if (e.key == "plot.levels") {
            const double v = parse_double(e.value, e.line, e.key);
            if (v < 1 || v > 100 || v != std::floor(v)) {
                throw ConfigError(e.line, e.key, "expected an integer in 1..100");
            }
            spec.levels = static_cast<int>(v);
        } else if (e.key == "plot.output") {
            spec.output = e.value;
        } else {
            throw ConfigError(e.line, e.key, "unknown plot key");
        }
    }
    if (spec.inputs.empty()) {
        throw ConfigError(0, "plot.input", "missing required key");
    }
    if (spec.y.empty()) {
        throw ConfigError(0, "plot.y", "missing required key");
    }
    if (spec.type == "contour" && (spec.z.empty() || spec.y.size() != 1 || spec.inputs.size() != 1)) {
        throw ConfigError(0, "plot.z", "contour plots need one input, one y column and a z column");
    }
    return spec;
}

std::string render_plot(const PlotSpec& spec, const std::vector<CsvTable>& tables) {
    if (spec.type == "contour") {
        const auto& table = tables.at(0);
        const int cx = require_column(table, spec.x);
        const int cy = require_column(table, spec.y[0]);
        const int cz = require_column(table, spec.z);
        std::vector<double> xs, ys;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            xs.push_back(table.number(r, cx));
            ys.push_back(table.number(r, cy));
        }
        auto grid_x = xs, grid_y = ys;
        for (auto* g : {&grid_x, &grid_y}) {
            std::sort(g->begin(), g->end());
            g->erase(std::unique(g->begin(), g->end()), g->end());
        }
        std::vector<std::vector<double>> z(grid_y.size(),
                                           std::vector<double>(grid_x.size(), std::numeric_limits<double>::quiet_NaN()));
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto ix = static_cast<std::size_t>(std::lower_bound(grid_x.begin(), grid_x.end(), xs[r]) - grid_x.begin());
            const auto iy = static_cast<std::size_t>(std::lower_bound(grid_y.begin(), grid_y.end(), ys[r]) - grid_y.begin());
            if (ix < grid_x.size() && iy < grid_y.size()) {
                z[iy][ix] = table.number(r, cz);
            }
        }
        return contour_plot_svg(grid_x, grid_y, z, {spec.title, spec.x, spec.y[0]}, spec.levels);
    }
    std::vector<Series> series;
    for (std::size_t t = 0; t < tables.size(); ++t) {
        const int cx = require_column(tables[t], spec.x);
        for (const auto& name : spec.y) {
            const int cy = require_column(tables[t], name);
            Series s;
            const std::size_t k = series.size();
            s.label = k < spec.labels.size() ? spec.labels[k] : (tables.size() > 1 ? name + " #" + std::to_string(t + 1) : name);
            for (std::size_t r = 0; r < tables[t].rows.size(); ++r) {
                s.x.push_back(tables[t].number(r, cx));
                s.y.push_back(tables[t].number(r, cy));
            }
            series.push_back(std::move(s));
        }
    }
    std::string y_label = spec.y.size() == 1 ? spec.y[0] : "value";
    return line_plot_svg(series, {spec.title, spec.x, y_label});
}

} // namespace qet
