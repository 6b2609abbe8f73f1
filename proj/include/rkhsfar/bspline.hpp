#pragma once

#include "rkhsfar/series.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace rkhsfar {

/// Clamped B-spline basis on [0,1] with equally spaced interior knots
/// (boundary knots repeated degree + 1 times).
class BSplineBasis {
public:
    explicit BSplineBasis(int num_basis, int degree = 3);

    int size() const noexcept { return num_basis_; }
    int degree() const noexcept { return degree_; }
    const std::vector<double>& knots() const noexcept { return knots_; }

    Eigen::RowVectorXd eval(double s) const;
    /// points.size() x size() design matrix.
    Eigen::MatrixXd design(std::span<const double> points) const;

private:
    int num_basis_;
    int degree_;
    std::vector<double> knots_;
};

/// Least-squares projection of curves sampled on a fixed grid onto a spline basis.
class SplineSmoother {
public:
    SplineSmoother(const Grid& grid, int num_basis);

    const BSplineBasis& basis() const noexcept { return basis_; }
    const Grid& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& design() const noexcept { return design_; }

    /// rows x n samples -> rows x num_basis coefficients.
    Eigen::MatrixXd coefficients(const Eigen::MatrixXd& samples) const;

private:
    Grid grid_;
    BSplineBasis basis_;
    Eigen::MatrixXd design_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

inline constexpr int kDefaultFineGrid = 101;

struct SmoothedCurves {
    int num_basis = 0;
    Eigen::MatrixXd coeffs;          ///< T x num_basis
    std::vector<double> fine_grid;   ///< m uniform points on [0,1]
    Eigen::MatrixXd fine_design;     ///< m x num_basis
    Eigen::MatrixXd values;          ///< T x m, coeffs * fine_design^T
};

/// Per-curve cubic B-spline least squares, reconstructed on an m-point uniform grid.
SmoothedCurves smooth_bsplines(const SampledSeries& series, int num_basis,
                               int fine_grid_size = kDefaultFineGrid);

}  // namespace rkhsfar
