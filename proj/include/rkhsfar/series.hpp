#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rkhsfar {

class Rng;

enum class GridKind { midpoint_equispaced, uniform_random, explicit_points };

std::string to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& name);

/// Strictly increasing sampling points in [0,1], shared by every curve of a series.
class Grid {
public:
    Grid() = default;

    /// s_i = (i + 0.5) / n.
    static Grid midpoint(std::size_t n);
    /// n sorted U(0,1) draws; throws if two draws coincide.
    static Grid uniform_random(std::size_t n, Rng& rng);
    /// Validates ordering and range.
    static Grid from_points(std::vector<double> points);

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    GridKind kind() const noexcept { return kind_; }
    std::span<const double> points() const noexcept { return points_; }
    double operator[](std::size_t i) const { return points_[i]; }

    friend bool operator==(const Grid& a, const Grid& b) { return a.points_ == b.points_; }

private:
    Grid(std::vector<double> points, GridKind kind);

    std::vector<double> points_;
    GridKind kind_ = GridKind::explicit_points;
};

/// Discretely observed functional time series: values(t, i) = X_t(s_i).
struct SampledSeries {
    Grid grid;
    Eigen::MatrixXd values;  // T x n

    SampledSeries() = default;
    SampledSeries(Grid g, Eigen::MatrixXd v);

    Eigen::Index length() const noexcept { return values.rows(); }

    /// Rows [begin, end).
    SampledSeries slice(Eigen::Index begin, Eigen::Index end) const;
};

/// u_1 = 1, u_i(s) = sqrt(2) cos((i - 1) pi s); orthonormal in L2[0,1].
struct CosineBasis {
    int q = 1;
};

/// (1/n) sum_j f_j g_j. The weight is 1/n for every grid kind.
double quad_inner(std::span<const double> f, std::span<const double> g);
double quad_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g);

/// Row vector (u_1(s), ..., u_q(s)).
Eigen::RowVectorXd eval_cosine_basis(const CosineBasis& basis, double s);
/// n x q matrix; column i holds u_{i+1} on the grid.
Eigen::MatrixXd eval_cosine_basis(const CosineBasis& basis, std::span<const double> points);

/// Row t of the result is X_{t+1} - X_t.
SampledSeries difference(const SampledSeries& series);

/// Running sum starting from `origin`; inverse of `difference`.
SampledSeries cumulative_sum(const SampledSeries& increments, const Eigen::RowVectorXd& origin);

SampledSeries load_csv(const std::filesystem::path& path);
SampledSeries parse_csv(const std::string& text);
void save_csv(const SampledSeries& series, const std::filesystem::path& path);
std::string to_csv(const SampledSeries& series);

/// Shortest-safe decimal form for doubles: 17 significant digits, "nan"/"inf" for non-finite.
std::string format_double(double v);

}  // namespace rkhsfar
