#include "rkhsfar/bspline.hpp"

#include "rkhsfar/errors.hpp"
#include "rkhsfar/rkhs_estimator.hpp"

#include <algorithm>

namespace rkhsfar {

BSplineBasis::BSplineBasis(int num_basis, int degree) : num_basis_(num_basis), degree_(degree) {
    if (degree < 0) throw InputError("spline degree must be non-negative");
    if (num_basis < degree + 1) {
        throw InputError("need at least " + std::to_string(degree + 1) + " basis functions for degree " +
                         std::to_string(degree));
    }
    const int interior = num_basis - degree - 1;
    knots_.assign(static_cast<std::size_t>(degree + 1), 0.0);
    for (int i = 1; i <= interior; ++i) {
        knots_.push_back(static_cast<double>(i) / static_cast<double>(interior + 1));
    }
    knots_.insert(knots_.end(), static_cast<std::size_t>(degree + 1), 1.0);
}

Eigen::RowVectorXd BSplineBasis::eval(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) throw InputError("spline argument outside [0,1]");
    const int p = degree_;
    const auto& t = knots_;
    // Knot span mu with t[mu] <= s < t[mu+1]; s = 1 belongs to the last non-empty span.
    int mu = num_basis_ - 1;
    if (s < 1.0) {
        mu = static_cast<int>(std::upper_bound(t.begin(), t.end(), s) - t.begin()) - 1;
        mu = std::clamp(mu, p, num_basis_ - 1);
    }

    // de Boor's triangular recursion for the p + 1 non-zero basis functions.
    std::vector<double> N(static_cast<std::size_t>(p + 1), 0.0);
    std::vector<double> left(static_cast<std::size_t>(p + 1)), right(static_cast<std::size_t>(p + 1));
    N[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = s - t[mu + 1 - j];
        right[j] = t[mu + j] - s;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double temp = denom != 0.0 ? N[r] / denom : 0.0;
            N[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        N[j] = saved;
    }

    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(num_basis_);
    for (int r = 0; r <= p; ++r) row(mu - p + r) = N[r];
    return row;
}

Eigen::MatrixXd BSplineBasis::design(std::span<const double> points) const {
    Eigen::MatrixXd B(static_cast<Eigen::Index>(points.size()), num_basis_);
    for (std::size_t i = 0; i < points.size(); ++i) B.row(static_cast<Eigen::Index>(i)) = eval(points[i]);
    return B;
}

SplineSmoother::SplineSmoother(const Grid& grid, int num_basis)
    : grid_(grid), basis_(num_basis), design_() {
    if (num_basis < 4) throw InputError("cubic smoothing needs at least 4 basis functions");
    if (grid.size() < static_cast<std::size_t>(num_basis)) {
        throw InputError("spline smoothing with " + std::to_string(num_basis) + " basis functions needs at least " +
                         std::to_string(num_basis) + " grid points, got " + std::to_string(grid.size()));
    }
    design_ = basis_.design(grid.points());
    qr_.compute(design_);
    if (qr_.rank() < num_basis) {
        throw InputError("spline design is rank deficient on this grid (rank " + std::to_string(qr_.rank()) +
                         " < " + std::to_string(num_basis) + ")");
    }
}

Eigen::MatrixXd SplineSmoother::coefficients(const Eigen::MatrixXd& samples) const {
    if (samples.cols() != design_.rows()) throw InputError("sample rows do not match the smoothing grid");
    return qr_.solve(samples.transpose()).transpose();
}

SmoothedCurves smooth_bsplines(const SampledSeries& series, int num_basis, int fine_grid_size) {
    const SplineSmoother smoother(series.grid, num_basis);
    SmoothedCurves out;
    out.num_basis = num_basis;
    out.coeffs = smoother.coefficients(series.values);
    out.fine_grid = uniform_points(fine_grid_size);
    out.fine_design = smoother.basis().design(out.fine_grid);
    out.values = out.coeffs * out.fine_design.transpose();
    return out;
}

}  // namespace rkhsfar
