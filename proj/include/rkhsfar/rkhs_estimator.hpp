#pragma once

#include "rkhsfar/kernel.hpp"
#include "rkhsfar/series.hpp"
#include "rkhsfar/simulator.hpp"
#include "rkhsfar/tracenorm.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace rkhsfar {

/// Kernel quantities that depend only on the sampling grid.
struct RkhsDesign {
    Grid grid;
    KernelSpec kernel;
    Eigen::MatrixXd gram;  ///< K
    SpectralFactor factor; ///< K^{1/2}, K^{-1/2}

    static RkhsDesign build(const Grid& grid, const KernelSpec& kernel,
                            double floor_ratio = kDefaultFloorRatio);
};

/// Regression columns as in the stacked formulation: X = [X_T, ..., X_{D+1}],
/// X^{(d)} = [X_{T-d}, ..., X_{D+1-d}], K_d = K^{1/2} / lambda_d, Z_d = K^{1/2} X^{(d)} / n.
TraceNormProblem assemble_problem(const SampledSeries& series, int D,
                                  const std::vector<double>& lambdas, const KernelSpec& kernel);

/// Same, restricted to the given target times (0-based rows of `series`, each >= D).
/// Column j of X is series row targets[j].
TraceNormProblem assemble_problem(const SampledSeries& series, const RkhsDesign& design, int D,
                                  const std::vector<double>& lambdas,
                                  std::span<const Eigen::Index> targets);

enum class SolverKind {
    agm,       ///< accelerated proximal gradient from W = 0
    admm_agm,  ///< ADMM to the minimiser, then the gradient scheme's stopping rule from there
};

std::string to_string(SolverKind k);
SolverKind solver_kind_from_string(const std::string& name);

struct FitOptions {
    SolverKind solver = SolverKind::admm_agm;
    AgmOptions agm;
    AdmmOptions admm;
};

struct FitReport {
    SolverKind solver = SolverKind::admm_agm;
    int iterations = 0;        ///< gradient-scheme iterations
    int restarts = 0;
    int admm_iterations = 0;
    bool admm_converged = false;
    double objective = 0.0;
    double objective_at_zero = 0.0;
    bool converged = false;
};

/// Estimated transition operators A_d(r, s) = k(r)^T R_d k(s) over the kernel sections
/// at the sampling grid.
struct OperatorEstimate {
    RkhsDesign design;
    std::vector<Eigen::MatrixXd> coeff;    ///< R_d
    std::vector<Eigen::MatrixXd> solution; ///< W_d = lambda_d K^{1/2} R_d K^{1/2}
    std::vector<double> lambdas;
    FitReport report;

    int order() const noexcept { return static_cast<int>(coeff.size()); }
    const Grid& grid() const noexcept { return design.grid; }
};

/// Solves the penalised problem and recovers R_d = K^{-1/2} W_d K^{-1/2} / lambda_d.
OperatorEstimate fit(const SampledSeries& series, int D, const std::vector<double>& lambdas,
                     const KernelSpec& kernel, const FitOptions& options = {});
/// `warm`, when given, seeds the ADMM stage; `warm_out` receives its final state (with the
/// primal blocks rescaled to unit penalty weight so they can seed a different lambda).
OperatorEstimate fit(const SampledSeries& series, const RkhsDesign& design, int D,
                     const std::vector<double>& lambdas, std::span<const Eigen::Index> targets,
                     const FitOptions& options = {}, const AdmmWarmStart* warm = nullptr,
                     AdmmWarmStart* warm_out = nullptr);

/// Rebuilds an estimate from stored coefficient matrices (solution blocks are derived).
OperatorEstimate estimate_from_coefficients(const Grid& grid, const KernelSpec& kernel,
                                            std::vector<Eigen::MatrixXd> coeff,
                                            std::vector<double> lambdas);

/// k(r)^T R_d k(s); d is 1-based.
double evaluate_operator(const OperatorEstimate& est, int d, double r, double s);

/// Surface of A_d on points x points.
Eigen::MatrixXd operator_surface(const OperatorEstimate& est, int d, std::span<const double> points);

/// sum_d (1/n) sum_j A_d(s_i, s_j) X_{T+1-d}(s_j) at the grid points, via the representer
/// coefficients. `history` is D x n in chronological order (last row is X_T).
Eigen::VectorXd predict_next(const OperatorEstimate& est, const Eigen::MatrixXd& history);

/// The same prediction through (1/n) sum_d lambda_d^{-1} k(r)^T K^{-1/2} W_d K^{1/2} X_{T+1-d}.
Eigen::VectorXd predict_next_factored(const OperatorEstimate& est, const Eigen::MatrixXd& history);

/// Prediction at an arbitrary point r in [0,1].
double predict_at(const OperatorEstimate& est, const Eigen::MatrixXd& history, double r);

/// Grid transition matrices M_d = K R_d K / n, so the prediction is sum_d M_d X_{T+1-d}.
std::vector<Eigen::MatrixXd> grid_transitions(const OperatorEstimate& est);

struct CvCell {
    int order = 0;
    double lambda = 0.0;
    double score = 0.0;  ///< pooled mean squared held-out prediction error
    bool failed = false;
};

struct TuningChoice {
    int order = 0;
    std::vector<double> lambdas;  ///< shared value repeated per lag
    std::vector<CvCell> cv_table;
};

struct CvOptions {
    int folds = 5;
    FitOptions fit;
    bool warm_start = true;  ///< reuse the previous lambda's solution along each fold's path
};

inline constexpr double kLambdaGridLow = 1e-8;
inline constexpr double kLambdaGridHigh = 1e2;
inline constexpr int kLambdaGridCount = 11;

/// `count` log-spaced values over [kLambdaGridLow, kLambdaGridHigh] * ||X||_F^2 / (T - D_max),
/// where X holds the targets D_max+1..T.
std::vector<double> default_lambda_grid(const SampledSeries& series, int D_max,
                                        int count = kLambdaGridCount);

/// Blocked K-fold cross-validation over (D, lambda). Target times D_max+1..T are split
/// into contiguous folds; each fold's targets are held out of the fit (lagged inputs may
/// still come from held-out times). Ties go to the smaller D, then the larger lambda.
TuningChoice cross_validate(const SampledSeries& series, int D_max,
                            const std::vector<double>& lambda_grid, const KernelSpec& kernel,
                            const CvOptions& options = {});

/// Contiguous fold boundaries over `count` items: fold f covers [edges[f], edges[f+1]).
std::vector<Eigen::Index> fold_edges(Eigen::Index count, int folds);

inline constexpr int kDefaultMiseGrid = 201;

/// Trapezoid weights for `m` equispaced points on [0,1].
Eigen::VectorXd trapezoid_weights(int m);
/// m equispaced points i / (m - 1).
std::vector<double> uniform_points(int m);

/// int int (A - Ahat)^2 / int int A^2 by the tensor trapezoid rule on surfaces sampled on
/// a uniform grid. Throws UndefinedMetricError when the true surface has zero norm.
double mise_from_surfaces(const Eigen::MatrixXd& truth_surface,
                          const Eigen::MatrixXd& estimate_surface);

double mise(const OperatorEstimate& est, const FarGroundTruth& truth, int d,
            int fine_grid_size = kDefaultMiseGrid);

}  // namespace rkhsfar
