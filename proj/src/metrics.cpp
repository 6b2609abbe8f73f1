#include "rkhsfar/metrics.hpp"

#include "rkhsfar/errors.hpp"

#include <string>

namespace rkhsfar {

namespace {

void check_shapes(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals) {
    if (predictions.rows() != actuals.rows() || predictions.cols() != actuals.cols()) {
        throw InputError("predictions are " + std::to_string(predictions.rows()) + "x" +
                         std::to_string(predictions.cols()) + " but actuals are " +
                         std::to_string(actuals.rows()) + "x" + std::to_string(actuals.cols()));
    }
    if (actuals.size() == 0) throw InputError("empty test set");
}

}  // namespace

double prediction_error(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals) {
    check_shapes(predictions, actuals);
    return (predictions - actuals).squaredNorm() / static_cast<double>(actuals.size());
}

StepErrors step_errors(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals) {
    check_shapes(predictions, actuals);
    const Eigen::MatrixXd e = actuals - predictions;
    const double n = static_cast<double>(e.cols());
    StepErrors out;
    out.rmse = (e.rowwise().squaredNorm() / n).cwiseSqrt();
    out.mae = e.cwiseAbs().rowwise().sum() / n;
    return out;
}

}  // namespace rkhsfar
