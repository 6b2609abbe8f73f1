#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>

namespace rkhsfar {

enum class KernelKind {
    /// Reproducing kernel of W^{2,2}[0,1] built from scaled Bernoulli polynomials.
    sobolev_bernoulli,
};

struct KernelSpec {
    KernelKind kind = KernelKind::sobolev_bernoulli;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(std::string_view name);

/// Pointwise kernel value. Both arguments must lie in [0,1].
double eval_kernel(const KernelSpec& spec, double x, double y);

/// K[i][j] = k(s_i, s_j), symmetrised after fill so that K == K^T bit for bit.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const double> grid);

/// Rows are kernel sections k(x_r) = (k(x_r, s_1), ..., k(x_r, s_n)).
Eigen::MatrixXd cross_gram(const KernelSpec& spec, std::span<const double> points,
                           std::span<const double> grid);

/// Symmetric square root of a PSD matrix together with its pseudo-inverse.
///
/// Eigenvalues below `eigen_floor` are raised to the floor in `sqrt` and treated
/// as exact zeros in `inv_sqrt`, so `sqrt * inv_sqrt` is the projector onto the
/// numerical range of K.
struct SpectralFactor {
    Eigen::MatrixXd sqrt;
    Eigen::MatrixXd inv_sqrt;
    double eigen_floor = 0.0;
};

inline constexpr double kDefaultFloorRatio = 1e-12;

SpectralFactor spectral_sqrt(const Eigen::MatrixXd& K, double floor_ratio = kDefaultFloorRatio);

/// Sum of singular values of an n x n matrix.
double nuclear_norm(const Eigen::MatrixXd& M);

/// RKHS trace norm of the operator with coefficient matrix R, i.e. ||K^{1/2} R K^{1/2}||_*.
double operator_nuclear_norm(const Eigen::MatrixXd& R, const SpectralFactor& factor);

}  // namespace rkhsfar
