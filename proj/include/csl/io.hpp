#pragma once

// Plain-text data files: '#' key=value provenance lines, one column-name line,
// then comma-separated rows. Numbers are written in shortest round-trip form,
// so reading a file back reproduces every double bit for bit.

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "csl/errors.hpp"
#include "csl/inference.hpp"

namespace csl::io {

using Header = std::vector<std::pair<std::string, std::string>>;

inline const std::vector<std::string> kFringeColumns{"alpha_rad_s2", "population"};
inline const std::vector<std::string> kContrastColumns{"t_s", "contrast", "sigma_c"};
inline const std::vector<std::string> kExclusionColumns{"r_c_m", "lambda_s", "source"};

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string format_number(std::int64_t x) { return std::to_string(x); }

inline std::optional<double> try_parse_number(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

struct DataFile {
    Header header;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::string> get(std::string_view key) const {
        for (const auto& [k, v] : header)
            if (k == key) return v;
        return std::nullopt;
    }

    void set(const std::string& key, std::string value) {
        for (auto& [k, v] : header) {
            if (k == key) {
                v = std::move(value);
                return;
            }
        }
        header.emplace_back(key, std::move(value));
    }
};

inline std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline void write_data_file(std::ostream& os, const DataFile& file) {
    for (const auto& [k, v] : file.header) os << "# " << k << '=' << v << '\n';
    for (std::size_t i = 0; i < file.columns.size(); ++i) os << (i ? "," : "") << file.columns[i];
    os << '\n';
    for (const auto& row : file.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

inline DataFile read_data_file(std::istream& is, const std::string& name) {
    DataFile file;
    std::string line;
    int lineno = 0;
    bool have_columns = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto where = [&] { return name + ":" + std::to_string(lineno) + ": "; };
        if (line.front() == '#') {
            if (have_columns) throw SchemaError(where() + "header line after the column line");
            std::string_view body(line);
            body.remove_prefix(1);
            while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
            if (body.empty()) continue;
            const auto eq = body.find('=');
            if (eq == std::string_view::npos || eq == 0) throw SchemaError(where() + "expected '# key=value'");
            file.header.emplace_back(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
            continue;
        }
        auto cells = split(line, ',');
        if (!have_columns) {
            file.columns = std::move(cells);
            have_columns = true;
            continue;
        }
        if (cells.size() != file.columns.size()) {
            throw SchemaError(where() + "expected " + std::to_string(file.columns.size()) + " columns, got " +
                              std::to_string(cells.size()));
        }
        file.rows.push_back(std::move(cells));
    }
    if (!have_columns) throw SchemaError(name + ": empty file (no column line)");
    return file;
}

namespace detail {

inline void expect_columns(const DataFile& f, const std::vector<std::string>& cols, const std::string& name,
                           const char* kind) {
    if (f.columns != cols) {
        std::string want;
        for (const auto& c : cols) want += (want.empty() ? "" : ",") + c;
        throw SchemaError(name + ": not a " + kind + " file (expected columns " + want + ")");
    }
    if (auto k = f.get("kind"); k && *k != kind)
        throw SchemaError(name + ": header kind=" + *k + ", expected " + kind);
}

inline double cell_number(const DataFile& f, std::size_t row, std::size_t col, const std::string& name) {
    const auto v = try_parse_number(f.rows[row][col]);
    if (!v) {
        throw SchemaError(name + ": row " + std::to_string(row + 1) + ", column '" + f.columns[col] +
                          "': not a number: '" + f.rows[row][col] + "'");
    }
    return *v;
}

inline double header_number(const DataFile& f, const std::string& key, const std::string& name) {
    const auto v = f.get(key);
    if (!v) throw SchemaError(name + ": missing header field '" + key + "'");
    const auto x = try_parse_number(*v);
    if (!x) throw SchemaError(name + ": header field '" + key + "' is not a number");
    return *x;
}

}  // namespace detail

// -- fringe ---------------------------------------------------------------

inline DataFile make_fringe_file(Header header, const inference::FringeScan& scan) {
    DataFile f;
    f.header = std::move(header);
    f.set("kind", "fringe");
    f.set("t_s", format_number(scan.t_sep));
    f.columns = kFringeColumns;
    for (const auto& p : scan.points) f.rows.push_back({format_number(p.alpha), format_number(p.population)});
    return f;
}

inline inference::FringeScan parse_fringe_file(const DataFile& f, const std::string& name) {
    detail::expect_columns(f, kFringeColumns, name, "fringe");
    inference::FringeScan scan;
    scan.t_sep = detail::header_number(f, "t_s", name);
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        scan.points.push_back({detail::cell_number(f, i, 0, name), detail::cell_number(f, i, 1, name), std::nullopt});
    }
    return scan;
}

// -- contrast -------------------------------------------------------------

inline DataFile make_contrast_file(Header header, const inference::ContrastSeries& series) {
    DataFile f;
    f.header = std::move(header);
    f.set("kind", "contrast");
    f.columns = kContrastColumns;
    for (const auto& p : series.points)
        f.rows.push_back({format_number(p.t_sep), format_number(p.contrast), format_number(p.sigma_c)});
    return f;
}

inline inference::ContrastSeries parse_contrast_file(const DataFile& f, const std::string& name) {
    detail::expect_columns(f, kContrastColumns, name, "contrast");
    inference::ContrastSeries s;
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        s.points.push_back({detail::cell_number(f, i, 0, name), detail::cell_number(f, i, 1, name),
                            detail::cell_number(f, i, 2, name)});
    }
    return s;
}

// -- exclusion ------------------------------------------------------------

inline DataFile make_exclusion_file(Header header, const inference::ExclusionCurve& curve) {
    DataFile f;
    f.header = std::move(header);
    f.set("kind", "exclusion");
    f.set("overlap_slope_m2_s", format_number(curve.overlap_slope));
    if (curve.crossover_rc) f.set("crossover_rc_m", format_number(*curve.crossover_rc));
    f.columns = kExclusionColumns;
    for (const auto& s : curve.samples)
        f.rows.push_back({format_number(s.r_c), format_number(s.lambda_bound), inference::to_string(s.source)});
    return f;
}

inline inference::ExclusionCurve parse_exclusion_file(const DataFile& f, const std::string& name) {
    detail::expect_columns(f, kExclusionColumns, name, "exclusion");
    inference::ExclusionCurve c;
    if (f.get("overlap_slope_m2_s")) c.overlap_slope = detail::header_number(f, "overlap_slope_m2_s", name);
    if (f.get("crossover_rc_m")) c.crossover_rc = detail::header_number(f, "crossover_rc_m", name);
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        const auto& src = f.rows[i][2];
        inference::BoundSource s;
        if (src == "overlap") s = inference::BoundSource::overlap;
        else if (src == "interferometric") s = inference::BoundSource::interferometric;
        else throw SchemaError(name + ": row " + std::to_string(i + 1) + ": unknown source '" + src + "'");
        c.samples.push_back({detail::cell_number(f, i, 0, name), detail::cell_number(f, i, 1, name), s});
    }
    return c;
}

}  // namespace csl::io
