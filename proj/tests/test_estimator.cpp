#include "doctest.h"

#include "rkhsfar/errors.hpp"
#include "rkhsfar/rkhs_estimator.hpp"
#include "rkhsfar/simulator.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numeric>

using namespace rkhsfar;
using testutil::random_matrix;

namespace {

SampledSeries sim_series(int q, int n, int T, std::vector<double> kappas, std::uint64_t seed) {
    const FarGroundTruth t = make_scenario(Scenario::A, q, static_cast<int>(kappas.size()), kappas, 1);
    return simulate(t, T, n, GridKind::midpoint_equispaced, 100, seed).series;
}

OperatorEstimate random_estimate(Rng& rng, int n, int D) {
    std::vector<Eigen::MatrixXd> R;
    std::vector<double> l;
    for (int d = 0; d < D; ++d) {
        R.push_back(random_matrix(rng, n, n));
        l.push_back(0.1 * (d + 1));
    }
    return estimate_from_coefficients(Grid::midpoint(static_cast<std::size_t>(n)), KernelSpec{}, R, l);
}

}  // namespace

TEST_CASE("problem assembly") {
    SUBCASE("column order and scaling") {
        Eigen::MatrixXd v(3, 2);
        v << 1, 2, 3, 4, 5, 6;
        const SampledSeries s(Grid::midpoint(2), v);
        const TraceNormProblem p = assemble_problem(s, 1, {0.5}, KernelSpec{});
        REQUIRE(p.target().cols() == 2);
        CHECK(p.target().col(0) == v.row(2).transpose());
        CHECK(p.target().col(1) == v.row(1).transpose());
        const SpectralFactor f = spectral_sqrt(gram_matrix(KernelSpec{}, s.grid.points()));
        Eigen::MatrixXd lagged(2, 2);
        lagged.col(0) = v.row(1).transpose();
        lagged.col(1) = v.row(0).transpose();
        CHECK(testutil::rel_diff(p.right(0), f.sqrt * lagged / 2.0) < 1e-14);
        CHECK(testutil::rel_diff(p.left(0), f.sqrt / 0.5) < 1e-14);
    }
    SUBCASE("doubling lambda halves the left factor") {
        const SampledSeries s = sim_series(3, 6, 20, {0.5}, 2);
        const TraceNormProblem a = assemble_problem(s, 1, {0.3}, KernelSpec{});
        const TraceNormProblem b = assemble_problem(s, 1, {0.6}, KernelSpec{});
        CHECK(testutil::rel_diff(b.left(0), 0.5 * a.left(0)) < 1e-15);
    }
    SUBCASE("too few curves") {
        const SampledSeries s = sim_series(3, 6, 2, {0.5}, 2);
        CHECK_THROWS_AS(assemble_problem(s, 1, {0.3}, KernelSpec{}), InputError);
        const SampledSeries s3 = sim_series(3, 6, 3, {0.5}, 2);
        CHECK_THROWS_AS(assemble_problem(s3, 2, {0.3, 0.3}, KernelSpec{}), InputError);
        CHECK_NOTHROW(assemble_problem(s3, 1, {0.3}, KernelSpec{}));
    }
    SUBCASE("lambda validation") {
        const SampledSeries s = sim_series(3, 6, 20, {0.5}, 2);
        CHECK_THROWS_AS(assemble_problem(s, 1, {0.0}, KernelSpec{}), InputError);
        CHECK_THROWS_AS(assemble_problem(s, 2, {0.1}, KernelSpec{}), InputError);
    }
}

TEST_CASE("fit limits") {
    const SampledSeries s = sim_series(4, 10, 60, {0.6}, 3);
    SUBCASE("dominant penalty crushes the estimate") {
        for (SolverKind k : {SolverKind::agm, SolverKind::admm_agm}) {
            FitOptions o;
            o.solver = k;
            const OperatorEstimate e = fit(s, 1, {1e9}, KernelSpec{}, o);
            CHECK(e.coeff[0].norm() < 1e-6);
        }
    }
    SUBCASE("objective never exceeds the zero point") {
        for (double lam : {1e-4, 1e-2, 1.0}) {
            const OperatorEstimate e = fit(s, 1, {lam}, KernelSpec{});
            CHECK(e.report.objective <= e.report.objective_at_zero);
            const TraceNormProblem p = assemble_problem(s, 1, {lam}, KernelSpec{});
            CHECK(e.report.objective_at_zero == doctest::Approx(p.target().squaredNorm()));
        }
    }
    SUBCASE("noiseless recursion is reproduced") {
        const FarGroundTruth t = make_scenario(Scenario::A, 2, 1, {0.5}, 1);
        const int T = 25, n = 10;
        Eigen::MatrixXd x(T, 2);
        x.row(0) << 1.0, -0.7;
        for (int k = 1; k < T; ++k) x.row(k) = 0.5 * x.row(k - 1);
        const Grid g = Grid::midpoint(n);
        const Eigen::MatrixXd U = eval_cosine_basis(t.basis, g.points());
        const SampledSeries data(g, x * U.transpose());
        const OperatorEstimate e = fit(data, 1, {1e-9}, KernelSpec{});
        double sse = 0.0;
        for (int k = 1; k < T; ++k) {
            sse += (predict_next(e, data.values.middleRows(k - 1, 1)) - data.values.row(k).transpose()).squaredNorm();
        }
        const double rms = std::sqrt(sse / ((T - 1) * n));
        const double scale = std::sqrt(data.values.bottomRows(T - 1).squaredNorm() / ((T - 1) * n));
        CHECK(rms < 1e-3 * std::max(1.0, scale));
    }
    SUBCASE("both solvers reach the same objective") {
        FitOptions agm;
        agm.solver = SolverKind::agm;
        agm.agm.max_iter = 200000;
        agm.agm.rel_tol = 1e-13;
        const OperatorEstimate a = fit(s, 1, {1e-1}, KernelSpec{}, agm);
        const OperatorEstimate b = fit(s, 1, {1e-1}, KernelSpec{});
        CHECK(std::abs(a.report.objective - b.report.objective) <= 1e-6 * a.report.objective);
    }
}

TEST_CASE("operator evaluation") {
    Rng rng(4);
    SUBCASE("zero coefficients") {
        const OperatorEstimate e = estimate_from_coefficients(Grid::midpoint(5), KernelSpec{},
                                                              {Eigen::MatrixXd::Zero(5, 5)}, {1.0});
        CHECK(evaluate_operator(e, 1, 0.2, 0.9) == 0.0);
        CHECK(predict_next(e, random_matrix(rng, 1, 5)).isZero(0.0));
    }
    SUBCASE("grid pairs equal K R K") {
        const OperatorEstimate e = random_estimate(rng, 6, 1);
        const Eigen::MatrixXd KRK = e.design.gram * e.coeff[0] * e.design.gram;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) CHECK(evaluate_operator(e, 1, e.grid()[i], e.grid()[j]) == doctest::Approx(KRK(i, j)));
        const Eigen::MatrixXd S = operator_surface(e, 1, e.grid().points());
        CHECK(testutil::rel_diff(S, KRK) < 1e-12);
    }
    SUBCASE("no symmetry in general") {
        const OperatorEstimate e = random_estimate(rng, 6, 1);
        CHECK(std::abs(evaluate_operator(e, 1, 0.2, 0.7) - evaluate_operator(e, 1, 0.7, 0.2)) > 1e-8);
    }
}

TEST_CASE("prediction routes") {
    Rng rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const int D = 1 + rep % 2;
        const SampledSeries s = sim_series(4, 8 + rep, 50, D == 1 ? std::vector<double>{0.6} : std::vector<double>{0.3, 0.4},
                                           static_cast<std::uint64_t>(rep + 10));
        std::vector<double> lam(static_cast<std::size_t>(D), 1e-3 * (rep + 1));
        const OperatorEstimate e = fit(s, D, lam, KernelSpec{});
        const Eigen::MatrixXd h = s.values.bottomRows(D);
        const Eigen::VectorXd a = predict_next(e, h), b = predict_next_factored(e, h);
        CHECK((a - b).norm() <= 1e-8 * std::max(1.0, a.norm()));

        // Evaluator plus quadrature: (1/n) sum_j A_d(s_i, s_j) X(s_j).
        const Eigen::Index n = s.values.cols();
        Eigen::VectorXd quad = Eigen::VectorXd::Zero(n);
        for (int d = 1; d <= D; ++d) {
            const Eigen::MatrixXd S = operator_surface(e, d, s.grid.points());
            quad += S * h.row(D - d).transpose() / static_cast<double>(n);
        }
        CHECK((a - quad).norm() <= 1e-8 * std::max(1.0, a.norm()));
        CHECK(predict_at(e, h, s.grid[2]) == doctest::Approx(a(2)).epsilon(1e-8));

        const std::vector<Eigen::MatrixXd> M = grid_transitions(e);
        Eigen::VectorXd viaM = Eigen::VectorXd::Zero(n);
        for (int d = 1; d <= D; ++d) viaM += M[d - 1] * h.row(D - d).transpose();
        CHECK((a - viaM).norm() <= 1e-8 * std::max(1.0, a.norm()));
        CHECK(predict_next(e, Eigen::MatrixXd::Zero(D, n)).isZero(0.0));
    }
}

TEST_CASE("penalty path monotonicity") {
    const SampledSeries s = sim_series(4, 10, 60, {0.6}, 8);
    double prev = std::numeric_limits<double>::infinity();
    for (double mult : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
        const OperatorEstimate e = fit(s, 1, {mult}, KernelSpec{});
        const double norm = operator_nuclear_norm(e.coeff[0], e.design.factor);
        CHECK(norm <= prev + 1e-8);
        prev = norm;
    }
}

TEST_CASE("cross-validation") {
    const SampledSeries s = sim_series(3, 8, 60, {0.6}, 4);
    SUBCASE("single candidate") {
        const TuningChoice c = cross_validate(s, 1, {0.01}, KernelSpec{});
        CHECK(c.order == 1);
        CHECK(c.lambdas == std::vector<double>{0.01});
        CHECK(c.cv_table.size() == 1);
    }
    SUBCASE("choice is the table minimum under the tie rule") {
        const std::vector<double> grid = default_lambda_grid(s, 2, 5);
        const TuningChoice c = cross_validate(s, 2, grid, KernelSpec{});
        REQUIRE(c.cv_table.size() == 10);
        const CvCell* best = nullptr;
        for (const auto& cell : c.cv_table) {
            if (cell.failed) continue;
            if (!best || cell.score < best->score ||
                (cell.score == best->score &&
                 (cell.order < best->order || (cell.order == best->order && cell.lambda > best->lambda)))) {
                best = &cell;
            }
        }
        REQUIRE(best != nullptr);
        CHECK(c.order == best->order);
        CHECK(c.lambdas.front() == best->lambda);
        CHECK(c.lambdas.size() == static_cast<std::size_t>(c.order));
    }
    SUBCASE("deterministic") {
        const std::vector<double> grid = default_lambda_grid(s, 1, 4);
        const TuningChoice a = cross_validate(s, 1, grid, KernelSpec{});
        const TuningChoice b = cross_validate(s, 1, grid, KernelSpec{});
        REQUIRE(a.cv_table.size() == b.cv_table.size());
        for (std::size_t i = 0; i < a.cv_table.size(); ++i) CHECK(a.cv_table[i].score == b.cv_table[i].score);
    }
    SUBCASE("bad arguments") {
        CHECK_THROWS_AS(cross_validate(s, 0, {0.1}, KernelSpec{}), InputError);
        CHECK_THROWS_AS(cross_validate(s, 1, {}, KernelSpec{}), InputError);
        CvOptions o;
        o.folds = 1;
        CHECK_THROWS_AS(cross_validate(s, 1, {0.1}, KernelSpec{}, o), InputError);
    }
}

TEST_CASE("fold edges and the default grid") {
    const auto e = fold_edges(23, 5);
    REQUIRE(e.size() == 6);
    CHECK(e.front() == 0);
    CHECK(e.back() == 23);
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] - e[i - 1] >= 4);

    const SampledSeries s = sim_series(3, 8, 40, {0.5}, 1);
    const auto g = default_lambda_grid(s, 1);
    REQUIRE(g.size() == static_cast<std::size_t>(kLambdaGridCount));
    const double scale = s.values.bottomRows(39).squaredNorm() / 39.0;
    CHECK(g.front() == doctest::Approx(kLambdaGridLow * scale));
    CHECK(g.back() == doctest::Approx(kLambdaGridHigh * scale));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(10.0));
}

TEST_CASE("MISE") {
    const std::vector<double> pts = uniform_points(kDefaultMiseGrid);
    SUBCASE("truth against itself") {
        for (Scenario sc : {Scenario::A, Scenario::B, Scenario::Ca, Scenario::Cb}) {
            const FarGroundTruth t = make_scenario(sc, 4, 2, {0.3, 0.4}, 2);
            for (int d = 1; d <= 2; ++d) {
                const Eigen::MatrixXd S = true_operator_surface(t, d, pts);
                CHECK(mise_from_surfaces(S, S) <= 1e-10);
            }
        }
    }
    SUBCASE("zero estimate") {
        const FarGroundTruth t = make_scenario(Scenario::A, 3, 1, {0.5}, 1);
        const OperatorEstimate e = estimate_from_coefficients(Grid::midpoint(6), KernelSpec{},
                                                              {Eigen::MatrixXd::Zero(6, 6)}, {1.0});
        CHECK(mise(e, t, 1) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("half of a constant surface") {
        const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(11, 11, 0.8);
        CHECK(mise_from_surfaces(A, 0.5 * A) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("zero truth is undefined") {
        const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(5, 5);
        CHECK_THROWS_AS(mise_from_surfaces(Z, Z), UndefinedMetricError);
    }
    SUBCASE("trapezoid weights integrate linear functions") {
        const Eigen::VectorXd w = trapezoid_weights(11);
        CHECK(w.sum() == doctest::Approx(1.0));
        const auto p = uniform_points(11);
        double acc = 0.0;
        for (int i = 0; i < 11; ++i) acc += w(i) * p[static_cast<std::size_t>(i)];
        CHECK(acc == doctest::Approx(0.5));
    }
}

TEST_CASE("solver names") {
    CHECK(solver_kind_from_string("agm") == SolverKind::agm);
    CHECK(solver_kind_from_string("admm+agm") == SolverKind::admm_agm);
    CHECK(to_string(SolverKind::admm_agm) == "admm+agm");
    CHECK_THROWS_AS(solver_kind_from_string("newton"), InputError);
}
