#include "qet/csv.hpp"

#include "qet/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace qet {

namespace {

std::string site_pair(int a, int b) {
    return std::to_string(a + 1) + "_" + std::to_string(b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

} // namespace

std::vector<std::string> trajectory_columns(int n_sites, bool with_states) {
    std::vector<std::string> cols{"t"};
    if (with_states) {
        for (int a = 0; a < n_sites; ++a) {
            for (int b = a; b < n_sites; ++b) {
                cols.push_back("rho_re_" + site_pair(a, b));
                cols.push_back("rho_im_" + site_pair(a, b));
            }
        }
    }
    for (int a = 0; a < n_sites; ++a) {
        cols.push_back("pop_" + std::to_string(a + 1));
    }
    cols.push_back("trace");
    return cols;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, bool with_states) {
    const int n = traj.n_sites();
    const bool states = with_states && traj.states.size() == traj.size();
    const auto cols = trajectory_columns(n, states);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        os << (i == 0 ? "" : ",") << cols[i];
    }
    os << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << format_double(traj.times[k]);
        if (states) {
            const auto& rho = traj.states[k];
            for (int a = 0; a < n; ++a) {
                for (int b = a; b < n; ++b) {
                    os << ',' << format_double(rho(a, b).real()) << ',' << format_double(rho(a, b).imag());
                }
            }
        }
        for (int a = 0; a < n; ++a) {
            os << ',' << format_double(traj.populations[static_cast<std::size_t>(a)][k]);
        }
        os << ',' << format_double(traj.traces[k]) << '\n';
    }
}

void write_oracle_csv(std::ostream& os, const McEstimate& est) {
    const int n = static_cast<int>(est.mean_populations.size());
    const bool states = est.mean_states.size() == est.times.size();
    auto cols = trajectory_columns(n, states);
    for (int a = 0; a < n; ++a) {
        cols.push_back("stderr_" + std::to_string(a + 1));
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
        os << (i == 0 ? "" : ",") << cols[i];
    }
    os << '\n';
    for (std::size_t k = 0; k < est.times.size(); ++k) {
        os << format_double(est.times[k]);
        if (states) {
            const auto& rho = est.mean_states[k];
            for (int a = 0; a < n; ++a) {
                for (int b = a; b < n; ++b) {
                    os << ',' << format_double(rho(a, b).real()) << ',' << format_double(rho(a, b).imag());
                }
            }
        }
        double trace = 0.0;
        for (int a = 0; a < n; ++a) {
            const double p = est.mean_populations[static_cast<std::size_t>(a)][k];
            trace += p;
            os << ',' << format_double(p);
        }
        os << ',' << format_double(trace);
        for (int a = 0; a < n; ++a) {
            os << ',' << format_double(est.stderr_populations[static_cast<std::size_t>(a)][k]);
        }
        os << '\n';
    }
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

double CsvTable::number(std::size_t row, int column) const {
    const auto& cell = rows.at(row).at(static_cast<std::size_t>(column));
    if (cell == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return value;
}

CsvTable read_csv(std::istream& is) {
    CsvTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto cells = split_csv_line(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw SpecError("csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SpecError("cannot open '" + path + "'");
    }
    return read_csv(in);
}

std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) {
        return cell;
    }
    std::string out = "\"";
    for (const char ch : cell) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    out += '"';
    return out;
}

} // namespace qet
