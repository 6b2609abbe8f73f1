#pragma once

#include "rkhsfar/series.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace rkhsfar {

enum class NoiseKind { uniform, gaussian };

/// Distribution of the basis-coordinate innovations z_t.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::uniform;
    double half_width = 0.1;      ///< uniform: z_ti ~ U(-a, a), shared a
    Eigen::VectorXd sigmas;       ///< gaussian: z_ti ~ N(0, sigma_i^2)

    static NoiseSpec uniform(double a);
    static NoiseSpec gaussian(Eigen::VectorXd sigmas);
};

/// Finite-rank FAR(D) model: A_d(r, s) = u(r)^T Lambda_d u(s) over a cosine basis.
struct FarGroundTruth {
    CosineBasis basis;
    std::vector<Eigen::MatrixXd> lags;  ///< Lambda_1 .. Lambda_D, each q x q
    NoiseSpec noise;

    int order() const noexcept { return static_cast<int>(lags.size()); }
    int q() const noexcept { return basis.q; }
};

enum class Scenario { A, B, Ca, Cb };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

/// Builds a ground truth for one of the simulation settings.
///
///  A       Lambda_d = diag(kappa_d), uniform noise a = 0.1
///  B       Lambda_d = kappa_d Lambda* / sigma_max(Lambda*), Lambda*_ij ~ N(0,1), a = 0.1
///  Ca, Cb  Lambda*_ij ~ N(0, sigma_i sigma_j), same rescaling; Gaussian noise with
///          sigma_i = 1/i (Ca) or 1.2^{-i} (Cb)
///
/// kappa_d = 0 gives the zero matrix for every scenario.
FarGroundTruth make_scenario(Scenario scenario, int q, int D, const std::vector<double>& kappas,
                             std::uint64_t seed);

/// Spectral radius of the qD x qD companion matrix [Lambda_1 ... Lambda_D; I 0].
double companion_spectral_radius(const FarGroundTruth& truth);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& M);

struct SimOutput {
    SampledSeries series;
    Eigen::MatrixXd scores;        ///< T x q, x_t
    Eigen::MatrixXd noise_scores;  ///< T x q, z_t
    double spectral_radius = 0.0;
};

inline constexpr int kDefaultBurnIn = 200;

/// Exact simulation through the score recursion x_t = sum_d Lambda_d x_{t-d} + z_t,
/// started from zero scores and run for burn_in + T steps; the last T are kept and
/// synthesised as X_t(s_i) = u(s_i)^T x_t.
///
/// Throws RefusalError when the companion spectral radius is >= 1 and warns on
/// stderr when it is >= 0.99.
SimOutput simulate(const FarGroundTruth& truth, int T, const Grid& grid, int burn_in,
                   std::uint64_t seed);
SimOutput simulate(const FarGroundTruth& truth, int T, int n, GridKind grid_kind, int burn_in,
                   std::uint64_t seed);

/// sum_d Lambda_d history.row(D - d): the recursion's conditional mean in score space.
/// `history` holds D rows in chronological order (last row is x_{t-1}).
Eigen::VectorXd propagate_scores(const FarGroundTruth& truth, const Eigen::MatrixXd& history);

/// Infeasible oracle prediction u(s_i)^T sum_d Lambda_d x_{t-d} on the grid.
Eigen::VectorXd oracle_predict(const FarGroundTruth& truth, const Eigen::MatrixXd& history_scores,
                               const Grid& grid);

/// A_d(r, s) for 1 <= d <= D.
double eval_true_operator(const FarGroundTruth& truth, int d, double r, double s);

/// A_d on the tensor grid points x points (rows indexed by r).
Eigen::MatrixXd true_operator_surface(const FarGroundTruth& truth, int d,
                                      std::span<const double> points);

}  // namespace rkhsfar
