#include "rkhsfar/series.hpp"

#include "rkhsfar/errors.hpp"
#include "rkhsfar/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string_view>

namespace rkhsfar {

std::string to_string(GridKind kind) {
    switch (kind) {
        case GridKind::midpoint_equispaced:
            return "midpoint";
        case GridKind::uniform_random:
            return "uniform_random";
        case GridKind::explicit_points:
            return "explicit";
    }
    return "unknown";
}

GridKind grid_kind_from_string(const std::string& name) {
    if (name == "midpoint" || name == "midpoint_equispaced") return GridKind::midpoint_equispaced;
    if (name == "uniform_random" || name == "random") return GridKind::uniform_random;
    if (name == "explicit") return GridKind::explicit_points;
    throw InputError("unknown grid kind '" + name + "'");
}

Grid::Grid(std::vector<double> points, GridKind kind) : points_(std::move(points)), kind_(kind) {}

Grid Grid::midpoint(std::size_t n) {
    if (n == 0) throw InputError("grid size must be positive");
    std::vector<double> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    }
    return Grid(std::move(pts), GridKind::midpoint_equispaced);
}

Grid Grid::uniform_random(std::size_t n, Rng& rng) {
    if (n == 0) throw InputError("grid size must be positive");
    std::vector<double> pts(n);
    for (auto& p : pts) p = rng.uniform01();
    std::sort(pts.begin(), pts.end());
    if (std::adjacent_find(pts.begin(), pts.end()) != pts.end()) {
        throw InputError("uniform_random grid drew a repeated point");
    }
    return Grid(std::move(pts), GridKind::uniform_random);
}

Grid Grid::from_points(std::vector<double> points) {
    if (points.empty()) throw InputError("grid must contain at least one point");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i] >= 0.0 && points[i] <= 1.0)) {
            throw InputError("grid point " + format_double(points[i]) + " lies outside [0,1]");
        }
        if (i > 0 && !(points[i] > points[i - 1])) {
            throw InputError("grid points must be strictly increasing (index " + std::to_string(i) +
                             ")");
        }
    }
    return Grid(std::move(points), GridKind::explicit_points);
}

SampledSeries::SampledSeries(Grid g, Eigen::MatrixXd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.cols() != static_cast<Eigen::Index>(grid.size())) {
        throw InputError("series has " + std::to_string(values.cols()) +
                         " columns but the grid has " + std::to_string(grid.size()) + " points");
    }
    if (!values.allFinite()) throw InputError("series contains non-finite values");
}

SampledSeries SampledSeries::slice(Eigen::Index begin, Eigen::Index end) const {
    if (begin < 0 || end > length() || begin > end) throw InputError("series slice out of range");
    return SampledSeries(grid, values.middleRows(begin, end - begin));
}

double quad_inner(std::span<const double> f, std::span<const double> g) {
    if (f.size() != g.size()) {
        throw InputError("quad_inner: length mismatch (" + std::to_string(f.size()) + " vs " +
                         std::to_string(g.size()) + ")");
    }
    if (f.empty()) throw InputError("quad_inner: empty vectors");
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += f[j] * g[j];
    return acc / static_cast<double>(f.size());
}

double quad_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
    return quad_inner(std::span<const double>(f.data(), static_cast<std::size_t>(f.size())),
                      std::span<const double>(g.data(), static_cast<std::size_t>(g.size())));
}

Eigen::RowVectorXd eval_cosine_basis(const CosineBasis& basis, double s) {
    if (basis.q < 1) throw InputError("cosine basis dimension must be at least 1");
    Eigen::RowVectorXd row(basis.q);
    row(0) = 1.0;
    for (int i = 1; i < basis.q; ++i) {
        row(i) = std::numbers::sqrt2 * std::cos(static_cast<double>(i) * std::numbers::pi * s);
    }
    return row;
}

Eigen::MatrixXd eval_cosine_basis(const CosineBasis& basis, std::span<const double> points) {
    if (basis.q < 1) throw InputError("cosine basis dimension must be at least 1");
    Eigen::MatrixXd U(static_cast<Eigen::Index>(points.size()), basis.q);
    for (std::size_t r = 0; r < points.size(); ++r) {
        U.row(static_cast<Eigen::Index>(r)) = eval_cosine_basis(basis, points[r]);
    }
    return U;
}

SampledSeries difference(const SampledSeries& series) {
    const Eigen::Index T = series.length();
    if (T < 2) throw InputError("difference requires at least two time points");
    Eigen::MatrixXd d = series.values.bottomRows(T - 1) - series.values.topRows(T - 1);
    return SampledSeries(series.grid, std::move(d));
}

SampledSeries cumulative_sum(const SampledSeries& increments, const Eigen::RowVectorXd& origin) {
    if (origin.size() != static_cast<Eigen::Index>(increments.grid.size())) {
        throw InputError("cumulative_sum: origin length does not match the grid");
    }
    Eigen::MatrixXd out(increments.length() + 1, origin.size());
    out.row(0) = origin;
    for (Eigen::Index t = 0; t < increments.length(); ++t) {
        out.row(t + 1) = out.row(t) + increments.values.row(t);
    }
    return SampledSeries(increments.grid, std::move(out));
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<double> parse_row(std::string_view line, std::size_t row) {
    std::vector<double> out;
    std::size_t column = 1;
    while (true) {
        const auto comma = line.find(',');
        const std::string_view cell = trim(line.substr(0, comma));
        double v = 0.0;
        const char* first = cell.data();
        const char* last = cell.data() + cell.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (cell.empty() || ec != std::errc() || ptr != last) {
            throw ParseError("non-numeric cell '" + std::string(cell) + "'", row, column);
        }
        if (!std::isfinite(v)) throw ParseError("non-finite cell", row, column);
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
        ++column;
    }
    return out;
}

}  // namespace

SampledSeries parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    std::vector<double> header;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cells = parse_row(line, row);
        if (header.empty()) {
            header = std::move(cells);
            for (std::size_t c = 0; c < header.size(); ++c) {
                if (!(header[c] >= 0.0 && header[c] <= 1.0)) {
                    throw ParseError("grid point outside [0,1]", row, c + 1);
                }
                if (c > 0 && !(header[c] > header[c - 1])) {
                    throw ParseError("grid header is not strictly increasing", row, c + 1);
                }
            }
            continue;
        }
        if (cells.size() != header.size()) {
            throw ParseError("ragged row: expected " + std::to_string(header.size()) +
                                 " cells, found " + std::to_string(cells.size()),
                             row, std::min(cells.size(), header.size()) + 1);
        }
        rows.push_back(std::move(cells));
    }
    if (header.empty()) throw ParseError("missing grid header", 0, 0);

    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(header.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = rows[t][i];
        }
    }
    return SampledSeries(Grid::from_points(std::move(header)), std::move(values));
}

SampledSeries load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

std::string to_csv(const SampledSeries& series) {
    std::string out;
    const auto pts = series.grid.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out += ',';
        out += format_double(pts[i]);
    }
    out += '\n';
    for (Eigen::Index t = 0; t < series.values.rows(); ++t) {
        for (Eigen::Index i = 0; i < series.values.cols(); ++i) {
            if (i) out += ',';
            out += format_double(series.values(t, i));
        }
        out += '\n';
    }
    return out;
}

void save_csv(const SampledSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << to_csv(series);
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace rkhsfar
