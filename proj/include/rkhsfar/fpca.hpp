#pragma once

#include "rkhsfar/bspline.hpp"

#include <Eigen/Dense>

#include <span>

namespace rkhsfar {

/// Eigen-decomposition of the (uncentred) sample covariance C(s,r) = (1/T) sum_t X_t(s) X_t(r)
/// on the fine grid, with quadrature weight 1/m.
struct FpcaResult {
    Eigen::VectorXd eigenvalues;     ///< all m, descending, clamped at 0
    Eigen::MatrixXd eigenfunctions;  ///< m x p_max, unit norm under the fine-grid quadrature
    Eigen::MatrixXd spline_coeffs;   ///< num_basis x p_max, eigenfunctions in the smoothing basis
    Eigen::MatrixXd scores;          ///< T x p_max, <X_t, f_i>
    int num_basis = 0;

    int max_components() const noexcept { return static_cast<int>(eigenfunctions.cols()); }
};

FpcaResult fpca(const SmoothedCurves& smoothed);

/// n x p matrix of the leading p eigenfunctions evaluated at arbitrary points.
Eigen::MatrixXd eval_eigenfunctions(const FpcaResult& f, int p, std::span<const double> points);

/// Smallest p with cumulative explained variance >= tau.
int select_p_threshold(const Eigen::VectorXd& eigenvalues, double tau = 0.8);

}  // namespace rkhsfar
