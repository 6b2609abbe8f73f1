#include "rkhsfar/model_io.hpp"

#include "rkhsfar/errors.hpp"
#include "rkhsfar/results_io.hpp"

#include <json.hpp>

namespace rkhsfar {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

json matrix_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index n) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) throw InputError("model: matrix has the wrong shape");
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            throw InputError("model: matrix has the wrong shape");
        }
        for (Eigen::Index k = 0; k < n; ++k) M(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return M;
}

}  // namespace

FittedModel model_from_estimate(const OperatorEstimate& est) {
    FittedModel m;
    m.method = Method::rkhs;
    m.grid = est.grid();
    m.transitions = grid_transitions(est);
    m.kernel = est.design.kernel;
    m.coeff = est.coeff;
    m.lambdas = est.lambdas;
    return m;
}

FittedModel model_from_baseline(const BaselineFit& fit) {
    FittedModel m;
    m.method = fit.kind == BaselineKind::bosq ? Method::bosq : Method::anh;
    m.grid = fit.smoother.grid();
    m.p = fit.p;
    const auto n = static_cast<Eigen::Index>(m.grid.size());
    // Scores are linear in the samples: x = X L P with L the smoothing map.
    const Eigen::MatrixXd score_map = fit.smoother.coefficients(Eigen::MatrixXd::Identity(n, n)) * fit.score_projection;
    for (int d = 0; d < fit.order; ++d) {
        m.transitions.push_back(fit.grid_functions * fit.coeff_matrices[static_cast<std::size_t>(d)] *
                                score_map.transpose());
    }
    return m;
}

FittedModel naive_model(const Grid& grid) {
    FittedModel m;
    m.method = Method::naive;
    m.grid = grid;
    const auto n = static_cast<Eigen::Index>(grid.size());
    m.transitions.push_back(Eigen::MatrixXd::Identity(n, n));
    return m;
}

Eigen::VectorXd predict_next(const FittedModel& model, const Eigen::MatrixXd& history) {
    const int D = model.order();
    const auto n = static_cast<Eigen::Index>(model.grid.size());
    if (history.cols() != n) {
        throw InputError("predict: history has " + std::to_string(history.cols()) + " grid values, model has " +
                         std::to_string(n));
    }
    if (history.rows() < D) {
        throw InputError("predict: need " + std::to_string(D) + " history rows, got " + std::to_string(history.rows()));
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int d = 1; d <= D; ++d) {
        out.noalias() += model.transitions[static_cast<std::size_t>(d - 1)] * history.row(history.rows() - d).transpose();
    }
    return out;
}

OperatorEstimate to_estimate(const FittedModel& model) {
    if (model.method != Method::rkhs) throw InputError("model: only RKHS models carry representer coefficients");
    return estimate_from_coefficients(model.grid, model.kernel, model.coeff, model.lambdas);
}

std::string model_json(const FittedModel& model) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["method"] = to_string(model.method);
    j["grid"] = std::vector<double>(model.grid.points().begin(), model.grid.points().end());
    j["order"] = model.order();
    json tr = json::array();
    for (const auto& M : model.transitions) tr.push_back(matrix_json(M));
    j["transitions"] = tr;
    if (model.method == Method::rkhs) {
        j["kernel"] = to_string(model.kernel.kind);
        j["lambdas"] = model.lambdas;
        json c = json::array();
        for (const auto& R : model.coeff) c.push_back(matrix_json(R));
        j["coeff"] = c;
    } else if (model.p > 0) {
        j["p"] = model.p;
    }
    return j.dump(1) + "\n";
}

FittedModel parse_model_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model: ") + e.what(), 0, e.byte);
    }
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion) {
            throw InputError("model: unsupported format_version");
        }
        FittedModel m;
        m.method = method_from_string(j.at("method").get<std::string>());
        m.grid = Grid::from_points(j.at("grid").get<std::vector<double>>());
        const auto n = static_cast<Eigen::Index>(m.grid.size());
        const int D = j.at("order").get<int>();
        const auto& tr = j.at("transitions");
        if (D < 1 || static_cast<int>(tr.size()) != D) throw InputError("model: order does not match the transitions");
        for (const auto& M : tr) m.transitions.push_back(matrix_from_json(M, n));
        if (m.method == Method::rkhs) {
            m.kernel.kind = kernel_kind_from_string(j.at("kernel").get<std::string>());
            m.lambdas = j.at("lambdas").get<std::vector<double>>();
            for (const auto& R : j.at("coeff")) m.coeff.push_back(matrix_from_json(R, n));
            if (static_cast<int>(m.coeff.size()) != D || static_cast<int>(m.lambdas.size()) != D) {
                throw InputError("model: RKHS coefficients do not match the order");
            }
        }
        if (j.contains("p")) m.p = j.at("p").get<int>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: ") + e.what(), 0, 0);
    }
}

void save_model(const FittedModel& model, const std::filesystem::path& path) { write_text(path, model_json(model)); }

FittedModel load_model(const std::filesystem::path& path) { return parse_model_json(read_text(path)); }

}  // namespace rkhsfar
