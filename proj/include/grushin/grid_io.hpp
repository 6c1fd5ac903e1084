#pragma once

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "grushin/common.hpp"
#include "grushin/geometry.hpp"

namespace grushin::io {

/// %.17g: enough digits for an exact double round trip.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Columnar text: "# key: value" header lines, one line of column names,
/// then whitespace-separated rows. LF line endings.
class ColumnarWriter {
public:
    explicit ColumnarWriter(std::ostream& os) : os_(os) {}

    ColumnarWriter& header(const std::string& key, const std::string& value) {
        os_ << "# " << key << ": " << value << '\n';
        return *this;
    }

    ColumnarWriter& columns(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            os_ << (i ? " " : "") << names[i];
        }
        os_ << '\n';
        return *this;
    }

    ColumnarWriter& row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            os_ << (i ? " " : "") << cells[i];
        }
        os_ << '\n';
        return *this;
    }

private:
    std::ostream& os_;
};

struct ColumnarTable {
    std::map<std::string, std::string> headers;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    const std::string& header(const std::string& key) const {
        auto it = headers.find(key);
        if (it == headers.end()) {
            throw FormatError("missing header '" + key + "'");
        }
        return it->second;
    }
};

inline ColumnarTable read_columnar(std::istream& is) {
    ColumnarTable t;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            std::string key = line.substr(1, colon - 1);
            std::string value = line.substr(colon + 1);
            auto trim = [](std::string& s) {
                const auto b = s.find_first_not_of(" \t");
                const auto e = s.find_last_not_of(" \t\r");
                s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            trim(key);
            trim(value);
            t.headers[key] = value;
            continue;
        }
        std::istringstream ss(line);
        std::vector<std::string> cells;
        for (std::string c; ss >> c;) cells.push_back(c);
        if (t.columns.empty()) {
            t.columns = std::move(cells);
        } else {
            if (cells.size() != t.columns.size()) {
                throw FormatError("row has " + std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(t.columns.size()));
            }
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

inline double parse_real(const std::string& s) {
    // strtod rather than stod: subnormals set ERANGE but are exact values.
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (s.empty() || std::isspace(static_cast<unsigned char>(s[0])) || end != begin + s.size()) {
        throw FormatError("not a number: '" + s + "'");
    }
    return v;
}

inline std::size_t parse_count(const std::string& s) {
    const double v = parse_real(s);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw FormatError("not a count: '" + s + "'");
    }
    return static_cast<std::size_t>(v);
}

// ---------------------------------------------------------------------------
// GridFunction
// ---------------------------------------------------------------------------

inline constexpr const char* kGridFormatTag = "grushin-grid-function v1";

inline void write_grid_function(std::ostream& os, const geometry::GrushinModel& model,
                                const geometry::GridFunction& gf) {
    ColumnarWriter w(os);
    w.header("format", kGridFormatTag)
        .header("alpha", format_real(model.alpha))
        .header("topology", std::string(to_string(model.topology)))
        .header("weight_exponent", format_real(gf.weight_exponent()))
        .header("y_axis", gf.y_axis() == geometry::YAxis::Position ? "position" : "mode")
        .header("nx", std::to_string(gf.nx()))
        .header("ny", std::to_string(gf.ny()))
        .header("valid_rows", std::to_string(gf.valid_lo()) + " " + std::to_string(gf.valid_hi()))
        .columns({"x", "y", "re", "im"});
    for (std::size_t i = 0; i < gf.nx(); ++i) {
        for (std::size_t j = 0; j < gf.ny(); ++j) {
            const auto v = gf.at(i, j);
            w.row({format_real(gf.x()[i]), format_real(gf.y()[j]), format_real(v.real()),
                   format_real(v.imag())});
        }
    }
}

struct GridFile {
    geometry::GrushinModel model;
    geometry::GridFunction function;
};

inline GridFile read_grid_function(std::istream& is) {
    const ColumnarTable t = read_columnar(is);
    if (t.header("format") != kGridFormatTag) {
        throw FormatError("unsupported grid format '" + t.header("format") + "'");
    }
    if (t.columns != std::vector<std::string>{"x", "y", "re", "im"}) {
        throw FormatError("grid body must have columns: x y re im");
    }
    const std::string& topo = t.header("topology");
    if (topo != "plane" && topo != "cylinder") {
        throw FormatError("unknown topology '" + topo + "'");
    }
    const geometry::GrushinModel model(parse_real(t.header("alpha")),
                                       topo == "plane" ? Topology::Plane : Topology::Cylinder);
    const std::size_t nx = parse_count(t.header("nx"));
    const std::size_t ny = parse_count(t.header("ny"));
    if (t.rows.size() != nx * ny) {
        throw FormatError("expected " + std::to_string(nx * ny) + " rows, found " + std::to_string(t.rows.size()));
    }
    std::istringstream vr(t.header("valid_rows"));
    std::size_t lo = 0, hi = 0;
    if (!(vr >> lo >> hi)) {
        throw FormatError("malformed valid_rows header");
    }
    const std::string& axis = t.header("y_axis");
    if (axis != "position" && axis != "mode") {
        throw FormatError("unknown y_axis '" + axis + "'");
    }
    std::vector<double> x(nx), y(ny);
    std::vector<std::complex<double>> v(nx * ny);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const auto& r = t.rows[i * ny + j];
            if (j == 0) x[i] = parse_real(r[0]);
            if (i == 0) y[j] = parse_real(r[1]);
            v[i * ny + j] = {parse_real(r[2]), parse_real(r[3])};
        }
    }
    geometry::GridFunction gf(std::move(x), std::move(y), std::move(v), parse_real(t.header("weight_exponent")),
                              axis == "position" ? geometry::YAxis::Position : geometry::YAxis::Mode, lo, hi);
    return {model, std::move(gf)};
}

}  // namespace grushin::io
