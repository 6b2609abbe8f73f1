#pragma once

#include "rkhsfar/baselines.hpp"
#include "rkhsfar/config.hpp"
#include "rkhsfar/rkhs_estimator.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace rkhsfar {

/// A fitted one-step predictor reduced to its grid form: every supported method predicts
/// X_{T+1} = sum_d M_d X_{T+1-d} on the training grid.
///
/// RKHS models also keep the representer coefficients so the operator can be evaluated
/// off the grid after reloading.
struct FittedModel {
    Method method = Method::rkhs;
    Grid grid;
    std::vector<Eigen::MatrixXd> transitions;  ///< M_1 .. M_D, each n x n
    int p = 0;                                 ///< FPC count for the baselines

    // RKHS only.
    KernelSpec kernel;
    std::vector<Eigen::MatrixXd> coeff;
    std::vector<double> lambdas;

    int order() const noexcept { return static_cast<int>(transitions.size()); }
};

FittedModel model_from_estimate(const OperatorEstimate& est);
FittedModel model_from_baseline(const BaselineFit& fit);
FittedModel naive_model(const Grid& grid);

/// `history` holds at least D rows in chronological order; the last D are used.
Eigen::VectorXd predict_next(const FittedModel& model, const Eigen::MatrixXd& history);

/// Rebuilds the RKHS estimate; throws InputError for other methods.
OperatorEstimate to_estimate(const FittedModel& model);

std::string model_json(const FittedModel& model);
FittedModel parse_model_json(const std::string& text);

void save_model(const FittedModel& model, const std::filesystem::path& path);
FittedModel load_model(const std::filesystem::path& path);

}  // namespace rkhsfar
