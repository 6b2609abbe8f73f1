#pragma once

#include "rkhsfar/baselines.hpp"
#include "rkhsfar/config.hpp"
#include "rkhsfar/rkhs_estimator.hpp"
#include "rkhsfar/series.hpp"
#include "rkhsfar/simulator.hpp"

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace rkhsfar {

/// One (replication, method) outcome.
struct MethodRecord {
    int replication = 0;
    Method method = Method::rkhs;
    int d_sel = 0;                  ///< 0 when not applicable
    int p_sel = 0;                  ///< 0 when not applicable
    double lambda_sel = std::numeric_limits<double>::quiet_NaN();  ///< NaN when not applicable
    std::vector<double> mise;       ///< per true lag; NaN when undefined or not applicable
    double pe = 0.0;                ///< NaN when the method failed to run
    bool failed = false;
    std::string note;               ///< failure reason, if any
};

/// Aggregates over replications for one method. `_ok` variants exclude failed replications.
struct MethodAggregate {
    Method method = Method::rkhs;
    int runs = 0;
    int failures = 0;
    double pe_avg = 0.0;
    double pe_avg_ok = 0.0;
    std::vector<double> mise_avg;     ///< mean over replications where defined
    std::vector<double> mise_avg_ok;
    double d_true_pct = 0.0;          ///< share of runs selecting the true order, in %
};

struct ExperimentAggregates {
    std::vector<MethodAggregate> methods;
    /// RKHS against ANH; NaN when either is missing.
    double r_avg = 0.0;
    double r_w = 0.0;
    double r_avg_ok = 0.0;
    double r_w_ok = 0.0;
    double oracle_pe = 0.0;
    double mean_zero_pe = 0.0;

    const MethodAggregate* find(Method m) const;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<MethodRecord> records;  ///< sorted by replication, then method
    ExperimentAggregates aggregates;
};

/// A method whose PE exceeds this multiple of the replication's Mean-Zero PE is flagged
/// as a numerical failure.
inline constexpr double kFailurePeRatio = 10.0;

/// Data of one replication: the ground truth, the full simulated path, and its split.
struct ReplicationData {
    FarGroundTruth truth;
    SimOutput sim;            ///< T + test_length curves
    SampledSeries train;      ///< first T curves
    Eigen::MatrixXd test;     ///< remaining curves
};

/// Deterministic in (config, replication); independent of execution order.
ReplicationData simulate_replication(const ExperimentConfig& config, int replication);

/// Runs every replication on `threads` workers. Results depend only on the configuration.
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1);

/// Recomputes the aggregates from records (also used after reading results back).
ExperimentAggregates aggregate(const std::vector<MethodRecord>& records, int true_order);

struct ForecastOptions {
    int d_max = 1;
    std::vector<double> lambda_grid;  ///< empty: default grid
    int folds = 5;
    int anh_d_max = 1;
    int anh_basis = 10;
    int bosq_order = 1;
    int bosq_basis = 10;
    double bosq_tau = 0.8;
    bool difference = false;          ///< forecast first differences instead of levels
    FitOptions fit;
};

struct ForecastMethodReport {
    Method method = Method::rkhs;
    Eigen::VectorXd rmse;
    Eigen::VectorXd mae;
    double mean_rmse = 0.0;
    double mean_mae = 0.0;
    bool failed = false;
    std::string note;
};

struct ForecastReport {
    std::vector<ForecastMethodReport> methods;
    /// Share of test steps on which RKHS has strictly the lowest RMSE_t / MAE_t, in %.
    double rkhs_win_rmse = 0.0;
    double rkhs_win_mae = 0.0;
};

/// Fits each method on `train` once and predicts every test curve one step ahead from the
/// actual preceding curves.
ForecastReport forecast_eval(const SampledSeries& train, const SampledSeries& test,
                             const std::vector<Method>& methods, const ForecastOptions& options = {});

}  // namespace rkhsfar
