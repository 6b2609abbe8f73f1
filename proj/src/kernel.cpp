#include "rkhsfar/kernel.hpp"

#include "rkhsfar/errors.hpp"

#include <cmath>
#include <string>

namespace rkhsfar {

namespace {

double k1(double x) { return x - 0.5; }

double k2(double x) {
    const double a = k1(x);
    return 0.5 * (a * a - 1.0 / 12.0);
}

double k4(double x) {
    const double a = k1(x);
    const double a2 = a * a;
    return (a2 * a2 - a2 / 2.0 + 7.0 / 240.0) / 24.0;
}

void check_unit_interval(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw InputError(std::string("kernel argument ") + name + " = " + std::to_string(x) +
                         " lies outside [0,1]");
    }
}

}  // namespace

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::sobolev_bernoulli:
            return "sobolev_bernoulli";
    }
    return "unknown";
}

KernelKind kernel_kind_from_string(std::string_view name) {
    if (name == "sobolev_bernoulli") return KernelKind::sobolev_bernoulli;
    throw InputError("unknown kernel '" + std::string(name) + "'");
}

double eval_kernel(const KernelSpec& spec, double x, double y) {
    check_unit_interval(x, "x");
    check_unit_interval(y, "y");
    switch (spec.kind) {
        case KernelKind::sobolev_bernoulli:
            // k4 is evaluated at |x - y| so the expression is symmetric in its arguments.
            return 1.0 + k1(x) * k1(y) + k2(x) * k2(y) - k4(std::abs(x - y));
    }
    throw InputError("unsupported kernel kind");
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const double> grid) {
    if (grid.empty()) throw InputError("gram_matrix: empty grid");
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) K(i, j) = eval_kernel(spec, grid[i], grid[j]);
    }
    Eigen::MatrixXd sym = 0.5 * (K + K.transpose());
    return sym;
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, std::span<const double> points,
                           std::span<const double> grid) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()),
                        static_cast<Eigen::Index>(grid.size()));
    for (std::size_t r = 0; r < points.size(); ++r) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                eval_kernel(spec, points[r], grid[j]);
        }
    }
    return out;
}

SpectralFactor spectral_sqrt(const Eigen::MatrixXd& K, double floor_ratio) {
    if (K.rows() != K.cols() || K.rows() == 0) {
        throw InputError("spectral_sqrt: matrix must be square and non-empty");
    }
    if (!(floor_ratio > 0.0)) throw InputError("spectral_sqrt: floor_ratio must be positive");
    const double asym = (K - K.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= 1e-10)) {
        throw InputError("spectral_sqrt: input is not symmetric (max |K - K^T| = " +
                         std::to_string(asym) + ")");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (K + K.transpose()));
    if (eig.info() != Eigen::Success) throw NumericalError("spectral_sqrt: eigendecomposition failed");

    const Eigen::VectorXd& e = eig.eigenvalues();
    const Eigen::MatrixXd& U = eig.eigenvectors();
    const double floor = floor_ratio * std::max(e.maxCoeff(), 0.0);

    Eigen::VectorXd root(e.size());
    Eigen::VectorXd inv_root(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (e(i) < floor || e(i) <= 0.0) {
            root(i) = std::sqrt(floor);
            inv_root(i) = 0.0;
        } else {
            root(i) = std::sqrt(e(i));
            inv_root(i) = 1.0 / root(i);
        }
    }

    SpectralFactor f;
    f.eigen_floor = floor;
    f.sqrt = U * root.asDiagonal() * U.transpose();
    f.inv_sqrt = U * inv_root.asDiagonal() * U.transpose();
    // Exact symmetry keeps the downstream products symmetric where they should be.
    f.sqrt = (0.5 * (f.sqrt + f.sqrt.transpose())).eval();
    f.inv_sqrt = (0.5 * (f.inv_sqrt + f.inv_sqrt.transpose())).eval();
    return f;
}

double nuclear_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues().sum();
}

double operator_nuclear_norm(const Eigen::MatrixXd& R, const SpectralFactor& factor) {
    if (R.rows() != factor.sqrt.rows() || R.cols() != factor.sqrt.cols()) {
        throw InputError("operator_nuclear_norm: coefficient matrix is " + std::to_string(R.rows()) +
                         "x" + std::to_string(R.cols()) + " but the kernel factor is " +
                         std::to_string(factor.sqrt.rows()) + "x" +
                         std::to_string(factor.sqrt.cols()));
    }
    return nuclear_norm(factor.sqrt * R * factor.sqrt);
}

}  // namespace rkhsfar
