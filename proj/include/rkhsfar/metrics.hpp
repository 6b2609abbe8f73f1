#pragma once

#include <Eigen/Dense>

namespace rkhsfar {

/// Grand mean of squared residuals over test targets (rows) and grid points (columns).
double prediction_error(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals);

/// Per-row RMSE_t = sqrt(mean_i e_ti^2) and MAE_t = mean_i |e_ti|.
struct StepErrors {
    Eigen::VectorXd rmse;
    Eigen::VectorXd mae;
};

StepErrors step_errors(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals);

}  // namespace rkhsfar
