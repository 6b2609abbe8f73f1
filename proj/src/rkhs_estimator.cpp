#include "rkhsfar/rkhs_estimator.hpp"

#include "rkhsfar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rkhsfar {

RkhsDesign RkhsDesign::build(const Grid& grid, const KernelSpec& kernel, double floor_ratio) {
    RkhsDesign d;
    d.grid = grid;
    d.kernel = kernel;
    d.gram = gram_matrix(kernel, grid.points());
    d.factor = spectral_sqrt(d.gram, floor_ratio);
    return d;
}

namespace {

void check_order_and_lambdas(int D, const std::vector<double>& lambdas) {
    if (D < 1) throw InputError("model order must be at least 1");
    if (static_cast<int>(lambdas.size()) != D) {
        throw InputError("expected " + std::to_string(D) + " penalty weights, got " +
                         std::to_string(lambdas.size()));
    }
    for (double l : lambdas) {
        if (!(l > 0.0) || !std::isfinite(l)) throw InputError("penalty weights must be positive");
    }
}

std::vector<Eigen::Index> all_targets(Eigen::Index T, int D) {
    std::vector<Eigen::Index> t;
    for (Eigen::Index i = T - 1; i >= D; --i) t.push_back(i);
    return t;
}

void check_history(const OperatorEstimate& est, const Eigen::MatrixXd& history) {
    if (history.rows() != est.order() ||
        history.cols() != static_cast<Eigen::Index>(est.grid().size())) {
        throw InputError("history must be " + std::to_string(est.order()) + " x " +
                         std::to_string(est.grid().size()) + ", got " +
                         std::to_string(history.rows()) + " x " + std::to_string(history.cols()));
    }
}

}  // namespace

TraceNormProblem assemble_problem(const SampledSeries& series, const RkhsDesign& design, int D,
                                  const std::vector<double>& lambdas,
                                  std::span<const Eigen::Index> targets) {
    check_order_and_lambdas(D, lambdas);
    const Eigen::Index T = series.length();
    if (targets.empty()) throw InputError("assemble_problem: no regression equations");
    if (!(series.grid == design.grid)) throw InputError("assemble_problem: grid mismatch");

    const auto n = static_cast<Eigen::Index>(design.grid.size());
    const auto m = static_cast<Eigen::Index>(targets.size());
    Eigen::MatrixXd X(n, m);
    std::vector<Eigen::MatrixXd> lagged(static_cast<std::size_t>(D), Eigen::MatrixXd(n, m));
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index t = targets[static_cast<std::size_t>(j)];
        if (t < D || t >= T) throw InputError("assemble_problem: target index out of range");
        X.col(j) = series.values.row(t).transpose();
        for (int d = 1; d <= D; ++d) lagged[d - 1].col(j) = series.values.row(t - d).transpose();
    }

    std::vector<Eigen::MatrixXd> left;
    std::vector<Eigen::MatrixXd> right;
    for (int d = 0; d < D; ++d) {
        left.push_back(design.factor.sqrt / lambdas[d]);
        right.push_back(design.factor.sqrt * lagged[d] / static_cast<double>(n));
    }
    return TraceNormProblem(std::move(X), std::move(left), std::move(right));
}

TraceNormProblem assemble_problem(const SampledSeries& series, int D,
                                  const std::vector<double>& lambdas, const KernelSpec& kernel) {
    check_order_and_lambdas(D, lambdas);
    if (series.length() <= D + 1) {
        throw InputError("assemble_problem: need T > D + 1 observations (T = " +
                         std::to_string(series.length()) + ", D = " + std::to_string(D) + ")");
    }
    const RkhsDesign design = RkhsDesign::build(series.grid, kernel);
    const auto targets = all_targets(series.length(), D);
    return assemble_problem(series, design, D, lambdas, targets);
}

namespace {

OperatorEstimate recover(const RkhsDesign& design, const BlockSet& W, std::vector<double> lambdas) {
    OperatorEstimate est;
    est.design = design;
    est.lambdas = std::move(lambdas);
    est.solution = W;
    for (std::size_t d = 0; d < W.size(); ++d) {
        est.coeff.push_back(design.factor.inv_sqrt * W[d] * design.factor.inv_sqrt / est.lambdas[d]);
    }
    return est;
}

}  // namespace

std::string to_string(SolverKind k) {
    return k == SolverKind::agm ? "agm" : "admm+agm";
}

SolverKind solver_kind_from_string(const std::string& name) {
    if (name == "agm") return SolverKind::agm;
    if (name == "admm+agm" || name == "admm_agm" || name == "admm") return SolverKind::admm_agm;
    throw InputError("unknown solver '" + name + "' (expected agm or admm+agm)");
}

OperatorEstimate fit(const SampledSeries& series, const RkhsDesign& design, int D,
                     const std::vector<double>& lambdas, std::span<const Eigen::Index> targets,
                     const FitOptions& options, const AdmmWarmStart* warm, AdmmWarmStart* warm_out) {
    const TraceNormProblem problem = assemble_problem(series, design, D, lambdas, targets);
    FitReport report;
    report.solver = options.solver;
    report.objective_at_zero = problem.target().squaredNorm();
    AgmState state;
    try {
        if (options.solver == SolverKind::agm) {
            state = agm_minimize(problem, options.agm);
        } else {
            // Warm starts are stored at unit penalty weight: W scales with lambda, the
            // multiplier does not, and the useful rho scales like lambda^-2.
            const double lam = lambdas.front();
            AdmmWarmStart seed;
            if (warm != nullptr) {
                for (const auto& b : warm->primal) seed.primal.push_back(b * lam);
                seed.multiplier = warm->multiplier;
                seed.rho = warm->rho / (lam * lam);
            }
            const AdmmResult admm = admm_minimize(problem, options.admm, warm != nullptr ? &seed : nullptr);
            report.admm_iterations = admm.iterations;
            report.admm_converged = admm.converged;
            if (warm_out != nullptr) {
                warm_out->primal.clear();
                for (const auto& b : admm.blocks) warm_out->primal.push_back(b / lam);
                warm_out->multiplier = admm.multiplier;
                warm_out->rho = admm.rho * lam * lam;
            }
            state = agm_minimize(problem, options.agm, admm.blocks);
        }
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("RKHS fit (D = ") + std::to_string(D) + "): " + e.what(),
                             e.iteration());
    }
    OperatorEstimate est = recover(design, state.blocks, lambdas);
    report.iterations = state.iteration;
    report.restarts = state.restarts;
    report.converged = state.converged;
    report.objective = state.objective_trace.back();
    est.report = report;
    return est;
}

OperatorEstimate fit(const SampledSeries& series, int D, const std::vector<double>& lambdas,
                     const KernelSpec& kernel, const FitOptions& options) {
    check_order_and_lambdas(D, lambdas);
    if (series.length() <= D + 1) {
        throw InputError("fit: need T > D + 1 observations (T = " + std::to_string(series.length()) +
                         ", D = " + std::to_string(D) + ")");
    }
    const RkhsDesign design = RkhsDesign::build(series.grid, kernel);
    const auto targets = all_targets(series.length(), D);
    return fit(series, design, D, lambdas, targets, options);
}

OperatorEstimate estimate_from_coefficients(const Grid& grid, const KernelSpec& kernel,
                                            std::vector<Eigen::MatrixXd> coeff,
                                            std::vector<double> lambdas) {
    check_order_and_lambdas(static_cast<int>(coeff.size()), lambdas);
    OperatorEstimate est;
    est.design = RkhsDesign::build(grid, kernel);
    const auto n = static_cast<Eigen::Index>(grid.size());
    for (std::size_t d = 0; d < coeff.size(); ++d) {
        if (coeff[d].rows() != n || coeff[d].cols() != n) {
            throw InputError("coefficient matrix " + std::to_string(d + 1) + " has the wrong shape");
        }
        est.solution.push_back(lambdas[d] * est.design.factor.sqrt * coeff[d] * est.design.factor.sqrt);
    }
    est.coeff = std::move(coeff);
    est.lambdas = std::move(lambdas);
    return est;
}

double evaluate_operator(const OperatorEstimate& est, int d, double r, double s) {
    if (d < 1 || d > est.order()) {
        throw InputError("lag " + std::to_string(d) + " outside 1.." + std::to_string(est.order()));
    }
    const double rs[] = {r};
    const double ss[] = {s};
    const Eigen::MatrixXd kr = cross_gram(est.design.kernel, rs, est.grid().points());
    const Eigen::MatrixXd ks = cross_gram(est.design.kernel, ss, est.grid().points());
    return (kr * est.coeff[d - 1] * ks.transpose())(0, 0);
}

Eigen::MatrixXd operator_surface(const OperatorEstimate& est, int d, std::span<const double> points) {
    if (d < 1 || d > est.order()) {
        throw InputError("lag " + std::to_string(d) + " outside 1.." + std::to_string(est.order()));
    }
    const Eigen::MatrixXd Kp = cross_gram(est.design.kernel, points, est.grid().points());
    return Kp * est.coeff[d - 1] * Kp.transpose();
}

std::vector<Eigen::MatrixXd> grid_transitions(const OperatorEstimate& est) {
    const double n = static_cast<double>(est.grid().size());
    std::vector<Eigen::MatrixXd> out;
    for (const auto& R : est.coeff) out.push_back(est.design.gram * R * est.design.gram / n);
    return out;
}

Eigen::VectorXd predict_next(const OperatorEstimate& est, const Eigen::MatrixXd& history) {
    check_history(est, history);
    const int D = est.order();
    const double n = static_cast<double>(est.grid().size());
    const Eigen::MatrixXd& K = est.design.gram;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(history.cols());
    for (int d = 1; d <= D; ++d) {
        const Eigen::VectorXd x = history.row(D - d).transpose();
        out.noalias() += K * (est.coeff[d - 1] * (K * x)) / n;
    }
    return out;
}

Eigen::VectorXd predict_next_factored(const OperatorEstimate& est, const Eigen::MatrixXd& history) {
    check_history(est, history);
    const int D = est.order();
    const double n = static_cast<double>(est.grid().size());
    const Eigen::MatrixXd left = est.design.gram * est.design.factor.inv_sqrt;  // rows k(s_i)^T K^{-1/2}
    Eigen::VectorXd out = Eigen::VectorXd::Zero(history.cols());
    for (int d = 1; d <= D; ++d) {
        const Eigen::VectorXd x = history.row(D - d).transpose();
        out.noalias() +=
            left * (est.solution[d - 1] * (est.design.factor.sqrt * x)) / (n * est.lambdas[d - 1]);
    }
    return out;
}

double predict_at(const OperatorEstimate& est, const Eigen::MatrixXd& history, double r) {
    check_history(est, history);
    const int D = est.order();
    const double n = static_cast<double>(est.grid().size());
    const double rs[] = {r};
    const Eigen::RowVectorXd kr = cross_gram(est.design.kernel, rs, est.grid().points());
    double acc = 0.0;
    for (int d = 1; d <= D; ++d) {
        const Eigen::VectorXd x = history.row(D - d).transpose();
        acc += kr.dot(est.coeff[d - 1] * (est.design.gram * x)) / n;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Cross-validation

std::vector<double> default_lambda_grid(const SampledSeries& series, int D_max, int count) {
    if (D_max < 1) throw InputError("default_lambda_grid: D_max must be at least 1");
    if (count < 1) throw InputError("default_lambda_grid: count must be positive");
    const Eigen::Index T = series.length();
    if (T <= D_max) throw InputError("default_lambda_grid: series too short");
    const double scale = series.values.bottomRows(T - D_max).squaredNorm() / static_cast<double>(T - D_max);
    if (!(scale > 0.0)) throw InputError("default_lambda_grid: series is identically zero");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double lo = std::log10(kLambdaGridLow);
        const double hi = std::log10(kLambdaGridHigh);
        const double e = count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
        grid[static_cast<std::size_t>(i)] = std::pow(10.0, e) * scale;
    }
    return grid;
}

std::vector<Eigen::Index> fold_edges(Eigen::Index count, int folds) {
    if (folds < 1 || count < folds) throw InputError("fold_edges: need at least one item per fold");
    std::vector<Eigen::Index> edges(static_cast<std::size_t>(folds) + 1);
    for (int f = 0; f <= folds; ++f) edges[static_cast<std::size_t>(f)] = (count * f) / folds;
    return edges;
}

TuningChoice cross_validate(const SampledSeries& series, int D_max,
                            const std::vector<double>& lambda_grid, const KernelSpec& kernel,
                            const CvOptions& options) {
    if (D_max < 1) throw InputError("cross_validate: D_max must be at least 1");
    if (lambda_grid.empty()) throw InputError("cross_validate: empty lambda grid");
    for (double l : lambda_grid) {
        if (!(l > 0.0)) throw InputError("cross_validate: lambda values must be positive");
    }
    if (options.folds < 2) throw InputError("cross_validate: need at least two folds");
    const Eigen::Index T = series.length();
    const Eigen::Index usable = T - D_max;
    if (usable < options.folds) {
        throw InputError("cross_validate: " + std::to_string(std::max<Eigen::Index>(usable, 0)) +
                         " usable targets for " + std::to_string(options.folds) + " folds");
    }

    const RkhsDesign design = RkhsDesign::build(series.grid, kernel);
    // Targets in chronological order: rows D_max .. T-1.
    std::vector<Eigen::Index> targets(static_cast<std::size_t>(usable));
    std::iota(targets.begin(), targets.end(), static_cast<Eigen::Index>(D_max));
    const auto edges = fold_edges(usable, options.folds);

    // Each fold walks the lambda grid from the largest value down so that warm starts
    // move from sparse to dense solutions.
    std::vector<std::size_t> order(lambda_grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lambda_grid[a] > lambda_grid[b]; });

    TuningChoice choice;
    for (int D = 1; D <= D_max; ++D) {
        const std::size_t L = lambda_grid.size();
        std::vector<double> sse(L, 0.0);
        std::vector<Eigen::Index> count(L, 0);
        std::vector<bool> failed(L, false);
        for (int f = 0; f < options.folds; ++f) {
            const auto lo = edges[static_cast<std::size_t>(f)];
            const auto hi = edges[static_cast<std::size_t>(f) + 1];
            std::vector<Eigen::Index> train;
            for (Eigen::Index j = usable - 1; j >= 0; --j) {
                if (j < lo || j >= hi) train.push_back(targets[static_cast<std::size_t>(j)]);
            }
            AdmmWarmStart warm;
            bool have_warm = false;
            for (std::size_t li : order) {
                if (failed[li]) continue;
                const std::vector<double> lambdas(static_cast<std::size_t>(D), lambda_grid[li]);
                try {
                    AdmmWarmStart next;
                    const OperatorEstimate est =
                        fit(series, design, D, lambdas, train, options.fit,
                            options.warm_start && have_warm ? &warm : nullptr, &next);
                    if (options.warm_start && options.fit.solver == SolverKind::admm_agm) {
                        warm = std::move(next);
                        have_warm = true;
                    }
                    const auto M = grid_transitions(est);
                    for (Eigen::Index j = lo; j < hi; ++j) {
                        const Eigen::Index t = targets[static_cast<std::size_t>(j)];
                        Eigen::VectorXd pred = Eigen::VectorXd::Zero(series.values.cols());
                        for (int d = 1; d <= D; ++d) pred.noalias() += M[d - 1] * series.values.row(t - d).transpose();
                        sse[li] += (series.values.row(t).transpose() - pred).squaredNorm();
                        count[li] += series.values.cols();
                    }
                } catch (const NumericalError&) {
                    failed[li] = true;
                    have_warm = false;
                }
            }
        }
        for (std::size_t li = 0; li < L; ++li) {
            CvCell cell;
            cell.order = D;
            cell.lambda = lambda_grid[li];
            cell.failed = failed[li];
            if (!cell.failed) {
                cell.score = sse[li] / static_cast<double>(count[li]);
                if (!std::isfinite(cell.score)) cell.failed = true;
            }
            if (cell.failed) cell.score = std::numeric_limits<double>::infinity();
            choice.cv_table.push_back(cell);
        }
    }

    // Strict improvement only: D ascending keeps the smaller order on ties; lambdas are
    // visited from largest to smallest so the larger penalty wins ties.
    const CvCell* best = nullptr;
    for (int D = 1; D <= D_max; ++D) {
        std::vector<const CvCell*> row;
        for (const auto& c : choice.cv_table)
            if (c.order == D) row.push_back(&c);
        std::sort(row.begin(), row.end(),
                  [](const CvCell* a, const CvCell* b) { return a->lambda > b->lambda; });
        for (const CvCell* c : row) {
            if (c->failed) continue;
            if (best == nullptr || c->score < best->score) best = c;
        }
    }
    if (best == nullptr) throw NumericalError("cross_validate: every (D, lambda) cell failed");
    choice.order = best->order;
    choice.lambdas.assign(static_cast<std::size_t>(best->order), best->lambda);
    return choice;
}

// ---------------------------------------------------------------------------
// MISE

Eigen::VectorXd trapezoid_weights(int m) {
    if (m < 2) throw InputError("trapezoid rule needs at least two points");
    const double h = 1.0 / static_cast<double>(m - 1);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(m, h);
    w(0) = w(m - 1) = h / 2.0;
    return w;
}

std::vector<double> uniform_points(int m) {
    if (m < 2) throw InputError("uniform_points: need at least two points");
    std::vector<double> p(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) p[static_cast<std::size_t>(i)] = static_cast<double>(i) / (m - 1);
    p.back() = 1.0;
    return p;
}

double mise_from_surfaces(const Eigen::MatrixXd& truth_surface, const Eigen::MatrixXd& estimate_surface) {
    if (truth_surface.rows() != truth_surface.cols() || truth_surface.rows() != estimate_surface.rows() ||
        truth_surface.cols() != estimate_surface.cols()) {
        throw InputError("mise: surfaces must be square and of equal size");
    }
    const Eigen::VectorXd w = trapezoid_weights(static_cast<int>(truth_surface.rows()));
    const double denom = w.transpose() * truth_surface.cwiseAbs2() * w;
    if (!(denom > 0.0)) throw UndefinedMetricError("mise: true operator has zero L2 norm");
    const double numer = w.transpose() * (truth_surface - estimate_surface).cwiseAbs2() * w;
    return numer / denom;
}

double mise(const OperatorEstimate& est, const FarGroundTruth& truth, int d, int fine_grid_size) {
    const auto pts = uniform_points(fine_grid_size);
    return mise_from_surfaces(true_operator_surface(truth, d, pts), operator_surface(est, d, pts));
}

}  // namespace rkhsfar
