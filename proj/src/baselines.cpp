#include "rkhsfar/baselines.hpp"

#include "rkhsfar/errors.hpp"
#include "rkhsfar/rkhs_estimator.hpp"

#include <cmath>
#include <limits>

namespace rkhsfar {

std::string to_string(BaselineKind k) {
    return k == BaselineKind::bosq ? "bosq" : "anh";
}

VarFit fit_var(const Eigen::MatrixXd& scores, int D) {
    if (D < 1) throw InputError("fit_var: order must be at least 1");
    const Eigen::Index T = scores.rows();
    const Eigen::Index p = scores.cols();
    if (p < 1) throw InputError("fit_var: no score columns");
    if (T <= D) throw InputError("fit_var: need more than D observations");
    const Eigen::Index rows = T - D;

    Eigen::MatrixXd Y = scores.bottomRows(rows);
    Eigen::MatrixXd Z(rows, p * D);
    for (int d = 1; d <= D; ++d) Z.middleCols((d - 1) * p, p) = scores.middleRows(D - d, rows);

    VarFit out;
    if (rows < p * D) {
        out.condition = std::numeric_limits<double>::infinity();
    } else {
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(Z).singularValues();
        const double smin = sv(sv.size() - 1);
        out.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    }
    if (!(out.condition <= kVarConditionLimit)) {
        throw NumericalError("VAR(" + std::to_string(D) + ") design on " + std::to_string(p) +
                             " scores is ill-conditioned (condition " + std::to_string(out.condition) + ")");
    }

    const Eigen::MatrixXd stacked = Z.colPivHouseholderQr().solve(Y);  // (pD) x p
    for (int d = 0; d < D; ++d) out.coeff.push_back(stacked.middleRows(d * p, p).transpose());
    const Eigen::MatrixXd E = Y - Z * stacked;
    out.residual_cov = E.transpose() * E / static_cast<double>(rows);
    return out;
}

double ffpe(const Eigen::MatrixXd& scores, const Eigen::VectorXd& eigenvalues, int p, int D) {
    if (p < 0 || D < 1) throw InputError("ffpe: need p >= 0 and D >= 1");
    if (p > scores.cols() || p > eigenvalues.size()) throw InputError("ffpe: p exceeds available components");
    if (p == 0) return eigenvalues.sum();
    const double T = static_cast<double>(scores.rows());
    const double pd = static_cast<double>(p) * D;
    if (!(T > pd + 1.0)) {
        throw InputError("ffpe: requires T > pD + 1 (T=" + std::to_string(scores.rows()) +
                         ", p=" + std::to_string(p) + ", D=" + std::to_string(D) + ")");
    }
    const VarFit v = fit_var(scores.leftCols(p), D);
    return (T + pd) / (T - pd) * v.residual_cov.trace() + eigenvalues.tail(eigenvalues.size() - p).sum();
}

OrderChoice select_anh_order(const Eigen::MatrixXd& scores, const Eigen::VectorXd& eigenvalues,
                             int p_max, int D_max) {
    if (D_max < 1) throw InputError("ANH: D_max must be at least 1");
    if (p_max < 1) throw InputError("ANH: need at least one component");
    const Eigen::Index T = scores.rows();
    OrderChoice out;
    bool found = false;
    for (int D = 1; D <= D_max; ++D) {
        for (int p = 1; p <= p_max; ++p) {
            if (!(T > static_cast<Eigen::Index>(p) * D + 1)) continue;
            AnhCandidate c;
            c.p = p;
            c.order = D;
            try {
                c.criterion = ffpe(scores, eigenvalues, p, D);
            } catch (const NumericalError& e) {
                c.failed = true;
                c.reason = e.what();
                c.criterion = std::numeric_limits<double>::quiet_NaN();
            }
            if (!c.failed && std::isfinite(c.criterion) && (!found || c.criterion < out.criterion)) {
                found = true;
                out.p = p;
                out.order = D;
                out.criterion = c.criterion;
            }
            out.candidates.push_back(std::move(c));
        }
    }
    if (!found) throw NumericalError("ANH: no admissible (p, D) candidate");
    return out;
}

namespace {

BaselineFit prepare(BaselineKind kind, const SampledSeries& series, int num_basis) {
    SplineSmoother smoother(series.grid, num_basis);
    SmoothedCurves smoothed;
    smoothed.num_basis = num_basis;
    smoothed.coeffs = smoother.coefficients(series.values);
    smoothed.fine_grid = uniform_points(kDefaultFineGrid);
    smoothed.fine_design = smoother.basis().design(smoothed.fine_grid);
    smoothed.values = smoothed.coeffs * smoothed.fine_design.transpose();

    BaselineFit fit{kind, 0, 0, {}, fpca(smoothed), std::move(smoother), {}, {}, {}, 0.0};
    // Spline coefficients of a curve map to its fine-grid values through fine_design; the
    // score projection folds in the quadrature against the eigenfunctions.
    fit.score_projection = smoothed.fine_design.transpose() * fit.fpca.eigenfunctions /
                           static_cast<double>(smoothed.fine_grid.size());
    return fit;
}

void finish(BaselineFit& fit) {
    fit.score_projection = fit.score_projection.leftCols(fit.p).eval();
    fit.grid_functions = eval_eigenfunctions(fit.fpca, fit.p, fit.smoother.grid().points());
}

}  // namespace

BaselineFit bosq_fit(const SampledSeries& series, int D, double tau, int num_basis) {
    if (D < 1) throw InputError("bosq: order must be at least 1");
    const Eigen::Index T = series.length();
    if (T < D + 2) throw InputError("bosq: need at least D + 2 curves");
    BaselineFit fit = prepare(BaselineKind::bosq, series, num_basis);
    fit.order = D;
    fit.p = std::min(select_p_threshold(fit.fpca.eigenvalues, tau), fit.fpca.max_components());

    const int p = fit.p;
    const Eigen::VectorXd lam = fit.fpca.eigenvalues.head(p);
    if (!(lam(p - 1) > 1e-12 * lam(0))) {
        throw NumericalError("bosq: retained eigenvalue " + std::to_string(lam(p - 1)) +
                             " is numerically zero relative to " + std::to_string(lam(0)));
    }
    const Eigen::MatrixXd d = fit.fpca.scores.leftCols(p);

    // Gamma(h) = (1/(T-h)) sum_t d_t d_{t-h}^T, with Gamma(0) the diagonal of eigenvalues.
    auto gamma = [&](int h) -> Eigen::MatrixXd {
        if (h == 0) return lam.asDiagonal();
        const Eigen::Index rows = T - h;
        return d.bottomRows(rows).transpose() * d.topRows(rows) / static_cast<double>(rows);
    };

    if (D == 1) {
        fit.coeff_matrices.push_back(gamma(1) * lam.cwiseInverse().asDiagonal());
    } else {
        std::vector<Eigen::MatrixXd> G;
        for (int h = 0; h <= D; ++h) G.push_back(gamma(h));
        Eigen::MatrixXd toeplitz(p * D, p * D);
        for (int i = 0; i < D; ++i) {
            for (int j = 0; j < D; ++j) {
                toeplitz.block(i * p, j * p, p, p) = j >= i ? G[j - i] : G[i - j].transpose();
            }
        }
        Eigen::MatrixXd rhs(p, p * D);
        for (int j = 0; j < D; ++j) rhs.middleCols(j * p, p) = G[j + 1];
        Eigen::LDLT<Eigen::MatrixXd> ldlt(toeplitz);
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().cwiseAbs().minCoeff() > 1e-12 * lam(0))) {
            throw NumericalError("bosq: stacked autocovariance is singular");
        }
        const Eigen::MatrixXd B = ldlt.solve(rhs.transpose()).transpose();
        for (int j = 0; j < D; ++j) fit.coeff_matrices.push_back(B.middleCols(j * p, p));
    }
    finish(fit);
    return fit;
}

BaselineFit anh_fit(const SampledSeries& series, int D_max, int num_basis) {
    if (D_max < 1) throw InputError("ANH: D_max must be at least 1");
    BaselineFit fit = prepare(BaselineKind::anh, series, num_basis);
    OrderChoice choice = select_anh_order(fit.fpca.scores, fit.fpca.eigenvalues, fit.fpca.max_components(), D_max);
    fit.p = choice.p;
    fit.order = choice.order;
    fit.criterion = choice.criterion;
    fit.candidates = std::move(choice.candidates);
    fit.coeff_matrices = fit_var(fit.fpca.scores.leftCols(fit.p), fit.order).coeff;
    finish(fit);
    return fit;
}

Eigen::MatrixXd baseline_scores(const BaselineFit& fit, const Eigen::MatrixXd& samples) {
    if (samples.cols() != static_cast<Eigen::Index>(fit.smoother.grid().size())) {
        throw InputError("baseline: curves have " + std::to_string(samples.cols()) + " samples, grid has " +
                         std::to_string(fit.smoother.grid().size()));
    }
    return fit.smoother.coefficients(samples) * fit.score_projection;
}

Eigen::VectorXd baseline_predict(const BaselineFit& fit, const Eigen::MatrixXd& history) {
    if (history.rows() < fit.order) {
        throw InputError("baseline_predict: need " + std::to_string(fit.order) + " history rows, got " +
                         std::to_string(history.rows()));
    }
    const Eigen::MatrixXd x = baseline_scores(fit, history.bottomRows(fit.order));
    Eigen::VectorXd next = Eigen::VectorXd::Zero(fit.p);
    for (int d = 1; d <= fit.order; ++d) {
        next.noalias() += fit.coeff_matrices[d - 1] * x.row(fit.order - d).transpose();
    }
    return fit.grid_functions * next;
}

Eigen::MatrixXd baseline_operator_surface(const BaselineFit& fit, int d, std::span<const double> points) {
    if (d < 1 || d > fit.order) {
        throw InputError("lag " + std::to_string(d) + " outside 1.." + std::to_string(fit.order));
    }
    const Eigen::MatrixXd F = eval_eigenfunctions(fit.fpca, fit.p, points);
    return F * fit.coeff_matrices[d - 1] * F.transpose();
}

double baseline_mise(const BaselineFit& fit, const FarGroundTruth& truth, int d, int fine_grid_size) {
    const std::vector<double> pts = uniform_points(fine_grid_size);
    return mise_from_surfaces(true_operator_surface(truth, d, pts), baseline_operator_surface(fit, d, pts));
}

}  // namespace rkhsfar
