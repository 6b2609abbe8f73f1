#include "rkhsfar/fpca.hpp"

#include "rkhsfar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rkhsfar {

FpcaResult fpca(const SmoothedCurves& smoothed) {
    const Eigen::Index T = smoothed.values.rows();
    const Eigen::Index m = smoothed.values.cols();
    if (T < 2) throw InputError("fpca needs at least 2 curves");
    if (m < 2) throw InputError("fpca needs at least 2 fine-grid points");

    const double md = static_cast<double>(m);
    Eigen::MatrixXd weighted = smoothed.values.transpose() * smoothed.values / (static_cast<double>(T) * md);
    weighted = 0.5 * (weighted + weighted.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(weighted);
    if (eig.info() != Eigen::Success) throw NumericalError("fpca: eigen-decomposition failed");

    FpcaResult out;
    out.num_basis = smoothed.num_basis;
    out.eigenvalues = eig.eigenvalues().reverse().cwiseMax(0.0);

    // The covariance has rank at most min(T, num_basis); later columns are noise.
    const Eigen::Index p_max = std::min<Eigen::Index>({T, static_cast<Eigen::Index>(smoothed.num_basis), m});
    out.eigenfunctions.resize(m, p_max);
    for (Eigen::Index i = 0; i < p_max; ++i) {
        Eigen::VectorXd e = eig.eigenvectors().col(m - 1 - i);
        Eigen::Index arg = 0;
        e.cwiseAbs().maxCoeff(&arg);
        if (e(arg) < 0.0) e = -e;
        out.eigenfunctions.col(i) = std::sqrt(md) * e;
    }
    out.spline_coeffs = smoothed.fine_design.colPivHouseholderQr().solve(out.eigenfunctions);
    out.scores = smoothed.values * out.eigenfunctions / md;
    return out;
}

Eigen::MatrixXd eval_eigenfunctions(const FpcaResult& f, int p, std::span<const double> points) {
    if (p < 0 || p > f.max_components()) {
        throw InputError("requested " + std::to_string(p) + " eigenfunctions, only " +
                         std::to_string(f.max_components()) + " available");
    }
    const BSplineBasis basis(f.num_basis);
    return basis.design(points) * f.spline_coeffs.leftCols(p);
}

int select_p_threshold(const Eigen::VectorXd& eigenvalues, double tau) {
    if (eigenvalues.size() == 0) throw InputError("select_p_threshold: no eigenvalues");
    if (!(tau > 0.0 && tau <= 1.0)) throw InputError("select_p_threshold: tau must lie in (0, 1]");
    if ((eigenvalues.array() < 0.0).any()) throw InputError("select_p_threshold: negative eigenvalue");
    const double total = eigenvalues.sum();
    if (!(total > 0.0)) throw UndefinedMetricError("select_p_threshold: all eigenvalues are zero");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        acc += eigenvalues(i);
        // Relative slack so that e.g. (0.5 + 0.3) / 1.0 counts as reaching 0.8.
        if (acc / total >= tau - 1e-12) return static_cast<int>(i + 1);
    }
    return static_cast<int>(eigenvalues.size());
}

}  // namespace rkhsfar
