#pragma once

#include "rkhsfar/bspline.hpp"
#include "rkhsfar/fpca.hpp"
#include "rkhsfar/series.hpp"
#include "rkhsfar/simulator.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace rkhsfar {

enum class BaselineKind { bosq, anh };

std::string to_string(BaselineKind k);

inline constexpr double kVarConditionLimit = 1e12;

struct VarFit {
    std::vector<Eigen::MatrixXd> coeff;  ///< B_1 .. B_D, each p x p
    Eigen::MatrixXd residual_cov;        ///< SSE / (T - D)
    double condition = 0.0;              ///< of the stacked lag design
};

/// Multivariate least squares x_t = sum_d B_d x_{t-d} + e_t (no intercept) over t = D+1..T.
/// Throws NumericalError when the lag design's condition number exceeds kVarConditionLimit.
VarFit fit_var(const Eigen::MatrixXd& scores, int D);

/// ((T + pD)/(T - pD)) tr(Sigma_e) + sum_{i>p} lambda_i with T = scores.rows(); p = 0 gives
/// the sum of all eigenvalues. The VAR is fitted to the leading p columns of `scores`.
double ffpe(const Eigen::MatrixXd& scores, const Eigen::VectorXd& eigenvalues, int p, int D);

struct AnhCandidate {
    int p = 0;
    int order = 0;
    double criterion = 0.0;
    bool failed = false;
    std::string reason;
};

struct OrderChoice {
    int p = 0;
    int order = 0;
    double criterion = 0.0;
    std::vector<AnhCandidate> candidates;
};

/// Minimises fFPE over 1 <= p <= p_max, 1 <= D <= D_max. Candidates violating
/// T > pD + 1 are not considered; ill-conditioned ones are recorded as failed and skipped.
/// Ties keep the earlier candidate (smaller D, then smaller p).
OrderChoice select_anh_order(const Eigen::MatrixXd& scores, const Eigen::VectorXd& eigenvalues,
                             int p_max, int D_max);

struct BaselineFit {
    BaselineKind kind = BaselineKind::bosq;
    int p = 0;
    int order = 0;
    std::vector<Eigen::MatrixXd> coeff_matrices;  ///< D blocks, p x p
    FpcaResult fpca;
    SplineSmoother smoother;
    Eigen::MatrixXd score_projection;  ///< num_basis x p: spline coefficients -> scores
    Eigen::MatrixXd grid_functions;    ///< n x p: leading eigenfunctions on the original grid
    std::vector<AnhCandidate> candidates;
    double criterion = 0.0;            ///< fFPE of the selected cell (ANH)
};

inline constexpr int kDefaultBaselineBasis = 10;

/// Yule-Walker estimator on the leading FPC scores, p chosen by explained variance tau.
/// D > 1 uses the stacked order-1 form with a block-Toeplitz autocovariance.
BaselineFit bosq_fit(const SampledSeries& series, int D, double tau = 0.8,
                     int num_basis = kDefaultBaselineBasis);

/// FPCA-VAR with (p, D) chosen by fFPE.
BaselineFit anh_fit(const SampledSeries& series, int D_max, int num_basis = kDefaultBaselineBasis);

/// f(s)^T sum_d B_d x_{t+1-d} on the original grid; `history` has at least D rows in
/// chronological order and the smoothing grid's width.
Eigen::VectorXd baseline_predict(const BaselineFit& fit, const Eigen::MatrixXd& history);

/// Scores of curves sampled on the original grid (rows x p).
Eigen::MatrixXd baseline_scores(const BaselineFit& fit, const Eigen::MatrixXd& samples);

/// A_d(s, r) = f(s)^T B_d f(r) on points x points.
Eigen::MatrixXd baseline_operator_surface(const BaselineFit& fit, int d, std::span<const double> points);

double baseline_mise(const BaselineFit& fit, const FarGroundTruth& truth, int d,
                     int fine_grid_size = 201);

}  // namespace rkhsfar
