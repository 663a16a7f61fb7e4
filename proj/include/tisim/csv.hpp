#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tisim/behavior.hpp"
#include "tisim/calibration.hpp"
#include "tisim/catalog.hpp"
#include "tisim/common.hpp"
#include "tisim/dynamics.hpp"
#include "tisim/emissions.hpp"
#include "tisim/modes.hpp"

namespace tisim::csv {

/// All numeric cells use 9 significant digits (format_number); years are
/// plain integers. Fields are quoted only when they contain a comma,
/// quote, or newline, so identifier-like names round-trip byte-identical.
inline std::string escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += '"';
    return out;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open())
        throw IoError("cannot open '" + path + "' for writing");
    return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out.good()) throw IoError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------- reading

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // excludes the header
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line,
                                           const std::string& path,
                                           std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            if (!cur.empty())
                throw IoError(path + ":" + std::to_string(line_no) +
                              ": quote inside unquoted field");
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (in_quotes)
        throw IoError(path + ":" + std::to_string(line_no) +
                      ": unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace detail

inline Table read_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw IoError("cannot open '" + path + "' for reading");
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_line(line, path, line_no);
        if (line_no == 1) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size())
                throw IoError(path + ":" + std::to_string(line_no) + ": has " +
                              std::to_string(fields.size()) +
                              " fields, header has " +
                              std::to_string(table.header.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    if (table.header.empty())
        throw IoError("'" + path + "' is empty or has no header");
    return table;
}

namespace detail {

inline int parse_int(const std::string& s, const std::string& what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError(what + ": '" + s + "' is not an integer");
    return value;
}

inline double parse_double(const std::string& s, const std::string& what) {
    if (s.empty()) throw IoError(what + ": empty numeric field");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError(what + ": '" + s + "' is not a number");
    return value;
}

inline void require_header(const Table& table,
                           const std::vector<std::string>& expected,
                           const std::string& path) {
    if (table.header != expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i)
            want += (i ? "," : "") + expected[i];
        std::string got;
        for (std::size_t i = 0; i < table.header.size(); ++i)
            got += (i ? "," : "") + table.header[i];
        throw IoError("'" + path + "': header is '" + got + "', expected '" +
                      want + "'");
    }
}

inline std::size_t index_or_throw(const std::vector<std::string>& names,
                                  const std::string& name,
                                  const std::string& what,
                                  const std::string& where) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    std::string msg = where + ": unknown " + what + " '" + name + "'";
    std::string near = nearest_name(name, names);
    if (!near.empty()) msg += " (did you mean '" + near + "'?)";
    throw IoError(msg);
}

}  // namespace detail

// ------------------------------------------------------------- trajectory

inline void write_trajectory_csv(const std::string& path,
                                 const Trajectory& traj,
                                 const std::vector<std::string>& tech_names,
                                 const std::vector<std::string>& sub_names) {
    if (tech_names.size() != traj.n_tech || sub_names.size() != traj.n_sub)
        throw ValidationError("trajectory name lists do not match shape");
    auto out = open_output(path);
    out << "year,technology,sub_dimension,level\n";
    int y0 = traj.year_start();
    for (std::size_t k = 0; k < traj.annual.size(); ++k) {
        int year = y0 + static_cast<int>(k);
        for (std::size_t i = 0; i < traj.n_tech; ++i)
            for (std::size_t d = 0; d < traj.n_sub; ++d)
                out << year << ',' << escape(tech_names[i]) << ','
                    << escape(sub_names[d]) << ','
                    << format_number(traj.annual[k].x[i * traj.n_sub + d])
                    << '\n';
    }
    finish_output(out, path);
}

/// Reads a long-format level series. Years must form a contiguous range;
/// any (year, technology, sub-dimension) cell that never appears stays NaN
/// (a gap). Duplicate cells are rejected.
inline ObservedSeries read_observed_csv(
    const std::string& path, const std::vector<std::string>& tech_names,
    const std::vector<std::string>& sub_names) {
    Table table = read_table(path);
    detail::require_header(table, {"year", "technology", "sub_dimension",
                                   "level"},
                           path);
    if (table.rows.empty()) throw IoError("'" + path + "' has no data rows");

    struct Cell {
        int year;
        std::size_t tech, sub;
        double level;
    };
    std::vector<Cell> cells;
    cells.reserve(table.rows.size());
    int y_min = std::numeric_limits<int>::max();
    int y_max = std::numeric_limits<int>::min();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        std::string where = path + ":" + std::to_string(r + 2);
        Cell c;
        c.year = detail::parse_int(row[0], where + " year");
        c.tech = detail::index_or_throw(tech_names, row[1], "technology",
                                        where);
        c.sub = detail::index_or_throw(sub_names, row[2], "sub-dimension",
                                       where);
        c.level = detail::parse_double(row[3], where + " level");
        y_min = std::min(y_min, c.year);
        y_max = std::max(y_max, c.year);
        cells.push_back(c);
    }

    ObservedSeries series;
    series.year_start = y_min;
    series.n_tech = tech_names.size();
    series.n_sub = sub_names.size();
    std::size_t n_years = static_cast<std::size_t>(y_max - y_min) + 1;
    series.levels.assign(n_years * series.n_tech * series.n_sub,
                         std::numeric_limits<double>::quiet_NaN());
    for (const auto& c : cells) {
        std::size_t idx =
            (static_cast<std::size_t>(c.year - y_min) * series.n_tech +
             c.tech) *
                series.n_sub +
            c.sub;
        if (!std::isnan(series.levels[idx]))
            throw IoError("'" + path + "': duplicate cell (year " +
                          std::to_string(c.year) + ", " + tech_names[c.tech] +
                          ", " + sub_names[c.sub] + ")");
        series.levels[idx] = c.level;
    }
    return series;
}

// ------------------------------------------------------------------ modes

inline void write_modes_csv(const std::string& path, const ModeSeries& series,
                            const std::vector<std::string>& tech_names,
                            const std::vector<std::string>& sub_names) {
    auto out = open_output(path);
    out << "window_start,window_end,pair,scope,mode,beneficiary,victim\n";
    for (const auto& rec : series.records) {
        std::string pair = tech_names.at(rec.tech_i) + "|" +
                           tech_names.at(rec.tech_j);
        std::string scope =
            rec.side_scope
                ? std::string("side:") + std::string(to_string(rec.scope_side))
                : sub_names.at(rec.scope_sub);
        std::string mode = rec.gap ? std::string("unavailable")
                                   : std::string(to_string(rec.label.mode));
        std::string beneficiary, victim;
        if (!rec.gap) {
            if (rec.label.beneficiary == PairMember::first)
                beneficiary = tech_names.at(rec.tech_i);
            else if (rec.label.beneficiary == PairMember::second)
                beneficiary = tech_names.at(rec.tech_j);
            if (rec.label.victim == PairMember::first)
                victim = tech_names.at(rec.tech_i);
            else if (rec.label.victim == PairMember::second)
                victim = tech_names.at(rec.tech_j);
        }
        out << rec.window_start << ',' << rec.window_end << ','
            << escape(pair) << ',' << escape(scope) << ',' << mode << ','
            << escape(beneficiary) << ',' << escape(victim) << '\n';
    }
    finish_output(out, path);
}

// ------------------------------------------------------------- parameters

/// One c_<technology> column per configured technology, in technology
/// order; the self column of each row is left empty.
inline void write_parameters_csv(const std::string& path,
                                 const FitResult& fit,
                                 const std::vector<std::string>& tech_names,
                                 const std::vector<std::string>& sub_names) {
    if (tech_names.size() != fit.n_tech || sub_names.size() != fit.n_sub)
        throw ValidationError("parameter name lists do not match fit shape");
    auto out = open_output(path);
    out << "window_start,technology,sub_dimension,a,b";
    for (const auto& name : tech_names) out << ",c_" << escape(name);
    out << ",r2,filled\n";
    for (const auto& window : fit.windows) {
        for (std::size_t i = 0; i < fit.n_tech; ++i) {
            for (std::size_t d = 0; d < fit.n_sub; ++d) {
                const CellFit& cell = window.cells[i * fit.n_sub + d];
                out << window.window_start << ',' << escape(tech_names[i])
                    << ',' << escape(sub_names[d]) << ','
                    << format_number(cell.a) << ',' << format_number(cell.b);
                for (std::size_t j = 0; j < fit.n_tech; ++j) {
                    out << ',';
                    if (j != i) out << format_number(cell.c.at(j));
                }
                out << ',' << format_number(cell.r2) << ','
                    << (cell.filled ? 1 : 0) << '\n';
            }
        }
    }
    finish_output(out, path);
}

/// Parameter snapshots reconstructed from a parameters CSV: technology
/// names come from the c_ columns, sub-dimension names from row order of
/// first appearance, one ParameterBlock per distinct window_start.
struct ParameterImport {
    std::vector<std::string> tech_names;
    std::vector<std::string> sub_names;
    std::vector<WindowBlock> windows;  // window_end == window_start
};

inline ParameterImport read_parameters_csv(const std::string& path) {
    Table table = read_table(path);
    if (table.header.size() < 7)
        throw IoError("'" + path + "': expected at least 7 columns");
    std::vector<std::string> fixed_front = {"window_start", "technology",
                                            "sub_dimension", "a", "b"};
    for (std::size_t i = 0; i < fixed_front.size(); ++i)
        if (table.header[i] != fixed_front[i])
            throw IoError("'" + path + "': column " + std::to_string(i + 1) +
                          " is '" + table.header[i] + "', expected '" +
                          fixed_front[i] + "'");
    std::size_t n_cols = table.header.size();
    if (table.header[n_cols - 2] != "r2" || table.header[n_cols - 1] !=
                                                "filled")
        throw IoError("'" + path + "': last two columns must be r2,filled");

    ParameterImport import;
    for (std::size_t col = 5; col + 2 < n_cols; ++col) {
        const std::string& h = table.header[col];
        if (h.rfind("c_", 0) != 0)
            throw IoError("'" + path + "': column '" + h +
                          "' does not look like c_<technology>");
        import.tech_names.push_back(h.substr(2));
    }
    std::size_t n_tech = import.tech_names.size();
    if (n_tech < 2)
        throw IoError("'" + path + "': needs at least two c_ columns");

    // first pass: collect sub-dimension names in order of first appearance
    for (const auto& row : table.rows) {
        const std::string& sub = row[2];
        bool seen = false;
        for (const auto& s : import.sub_names)
            if (s == sub) { seen = true; break; }
        if (!seen) import.sub_names.push_back(sub);
    }
    std::size_t n_sub = import.sub_names.size();
    if (table.rows.empty()) throw IoError("'" + path + "' has no data rows");

    std::map<int, ParameterBlock> blocks;
    std::map<int, std::vector<char>> seen_cells;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        std::string where = path + ":" + std::to_string(r + 2);
        int w = detail::parse_int(row[0], where + " window_start");
        std::size_t i = detail::index_or_throw(import.tech_names, row[1],
                                               "technology", where);
        std::size_t d = detail::index_or_throw(import.sub_names, row[2],
                                               "sub-dimension", where);
        auto [it, inserted] =
            blocks.try_emplace(w, n_tech, n_sub);
        if (inserted)
            seen_cells[w].assign(n_tech * n_sub, 0);
        if (seen_cells[w][i * n_sub + d])
            throw IoError(where + ": duplicate cell for window " +
                          std::to_string(w));
        seen_cells[w][i * n_sub + d] = 1;
        ParameterBlock& block = it->second;
        block.a_at(i, d) = detail::parse_double(row[3], where + " a");
        block.b_at(i, d) = detail::parse_double(row[4], where + " b");
        for (std::size_t j = 0; j < n_tech; ++j) {
            const std::string& cell = row[5 + j];
            if (j == i) {
                if (!cell.empty())
                    throw IoError(where + ": self interaction column c_" +
                                  import.tech_names[j] + " must be empty");
                continue;
            }
            block.c_at(i, j, d) =
                detail::parse_double(cell, where + " c_" +
                                     import.tech_names[j]);
        }
    }
    for (const auto& [w, seen] : seen_cells)
        for (std::size_t q = 0; q < seen.size(); ++q)
            if (!seen[q])
                throw IoError(
                    "'" + path + "': window " + std::to_string(w) +
                    " is missing cell (" + import.tech_names[q / n_sub] +
                    ", " + import.sub_names[q % n_sub] + ")");
    for (auto& [w, block] : blocks) {
        WindowBlock wb;
        wb.window_start = w;
        wb.window_end = w;  // imported snapshots carry no window span
        wb.available = true;
        wb.block = std::move(block);
        import.windows.push_back(std::move(wb));
    }
    return import;
}

// -------------------------------------------------------------- emissions

inline void write_emissions_csv(const std::string& path,
                                const std::string& scenario,
                                const EmissionReport& report,
                                const std::vector<std::string>& tech_names) {
    if (tech_names.size() != report.n_tech)
        throw ValidationError("emission name list does not match report");
    auto out = open_output(path);
    out << "scenario,year,technology,annual_mt,cumulative_mt\n";
    for (int y = report.year_start; y <= report.year_end(); ++y) {
        for (std::size_t i = 0; i < report.n_tech; ++i)
            out << escape(scenario) << ',' << y << ','
                << escape(tech_names[i]) << ','
                << format_number(report.annual_at(y, i)) << ','
                << format_number(report.cumulative_at(y, i)) << '\n';
        std::size_t k = static_cast<std::size_t>(y - report.year_start);
        out << escape(scenario) << ',' << y << ",total,"
            << format_number(report.total_annual[k]) << ','
            << format_number(report.total_cumulative[k]) << '\n';
    }
    finish_output(out, path);
}

// ------------------------------------------------------------- comparison

struct ComparisonRow {
    std::string scenario;
    int year = 0;
    std::string technology;
    double share = 0.0;
    double sales = 0.0;
    double cumulative_ghg = 0.0;
};

inline void write_comparison_csv(const std::string& path,
                                 const std::vector<ComparisonRow>& rows) {
    auto out = open_output(path);
    out << "scenario,year,technology,share,sales,cumulative_ghg\n";
    for (const auto& row : rows)
        out << escape(row.scenario) << ',' << row.year << ','
            << escape(row.technology) << ',' << format_number(row.share)
            << ',' << format_number(row.sales) << ','
            << format_number(row.cumulative_ghg) << '\n';
    finish_output(out, path);
}

// -------------------------------------------------------------- plot data

/// Long-format plot tables. Schemas (documented, stable):
///   behavior:  window_start,technology,side,sum_a,sum_b,creativity,orientation
///   modes:     window_start,window_end,pair,scope,mode
///   dimensions: scenario,year,technology,dimension,level (levels summed
///               over the sub-dimensions of each dimension)
///   ghg:       scenario,year,technology,annual_mt,cumulative_mt sorted by
///              (scenario, year, technology order as given)
inline void write_behavior_plot_csv(
    const std::string& path,
    const std::vector<std::tuple<int, std::string, Side, BehaviorLabel>>&
        rows) {
    auto out = open_output(path);
    out << "window_start,technology,side,sum_a,sum_b,creativity,orientation\n";
    for (const auto& [window_start, tech, side, label] : rows)
        out << window_start << ',' << escape(tech) << ',' << to_string(side)
            << ',' << format_number(label.sum_a) << ','
            << format_number(label.sum_b) << ','
            << to_string(label.creativity) << ','
            << to_string(label.orientation) << '\n';
    finish_output(out, path);
}

inline void write_modes_plot_csv(const std::string& path,
                                 const ModeSeries& series,
                                 const std::vector<std::string>& tech_names,
                                 const std::vector<std::string>& sub_names) {
    auto out = open_output(path);
    out << "window_start,window_end,pair,scope,mode\n";
    for (const auto& rec : series.records) {
        std::string pair = tech_names.at(rec.tech_i) + "|" +
                           tech_names.at(rec.tech_j);
        std::string scope =
            rec.side_scope
                ? std::string("side:") + std::string(to_string(rec.scope_side))
                : sub_names.at(rec.scope_sub);
        std::string mode = rec.gap ? std::string("unavailable")
                                   : std::string(to_string(rec.label.mode));
        out << rec.window_start << ',' << rec.window_end << ','
            << escape(pair) << ',' << escape(scope) << ',' << mode << '\n';
    }
    finish_output(out, path);
}

inline void write_dimensions_plot_csv(
    const std::string& path, const std::string& scenario,
    const Trajectory& traj, const std::vector<std::string>& tech_names,
    const DimensionCatalog& catalog) {
    if (tech_names.size() != traj.n_tech ||
        catalog.size() != traj.n_sub)
        throw ValidationError("plot name lists do not match trajectory");
    // distinct dimensions in catalog order of first appearance
    std::vector<std::string> dims;
    for (std::size_t d = 0; d < catalog.size(); ++d) {
        const std::string& dim = catalog.sub_dimensions()[d].dimension;
        bool seen = false;
        for (const auto& s : dims)
            if (s == dim) { seen = true; break; }
        if (!seen) dims.push_back(dim);
    }
    auto out = open_output(path);
    out << "scenario,year,technology,dimension,level\n";
    int y0 = traj.year_start();
    for (std::size_t k = 0; k < traj.annual.size(); ++k) {
        int year = y0 + static_cast<int>(k);
        for (std::size_t i = 0; i < traj.n_tech; ++i) {
            for (const auto& dim : dims) {
                double sum = 0.0;
                for (std::size_t d = 0; d < catalog.size(); ++d)
                    if (catalog.sub_dimensions()[d].dimension == dim)
                        sum += traj.annual[k].x[i * traj.n_sub + d];
                out << escape(scenario) << ',' << year << ','
                    << escape(tech_names[i]) << ',' << escape(dim) << ','
                    << format_number(sum) << '\n';
            }
        }
    }
    finish_output(out, path);
}

}  // namespace tisim::csv
