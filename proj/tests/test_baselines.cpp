#include "doctest.h"

#include "rkhsfar/baselines.hpp"
#include "rkhsfar/errors.hpp"
#include "rkhsfar/rkhs_estimator.hpp"
#include "test_util.hpp"

#include <cmath>
#include <limits>

using namespace rkhsfar;
using testutil::random_matrix;

namespace {

// X_t(s) = sum_i x_ti u_{i+1}(s) for explicit score rows.
SampledSeries series_from_scores(const Eigen::MatrixXd& x, int n) {
    const Grid g = Grid::midpoint(static_cast<std::size_t>(n));
    Eigen::MatrixXd U = eval_cosine_basis(CosineBasis{static_cast<int>(x.cols()) + 1}, g.points()).rightCols(x.cols());
    return SampledSeries(g, x * U.transpose());
}

Eigen::MatrixXd var1_scores(const Eigen::MatrixXd& B, const Eigen::VectorXd& sd, int T, std::uint64_t seed) {
    Rng rng(seed);
    const Eigen::Index p = B.rows();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(T + 100, p);
    for (int t = 1; t < T + 100; ++t) {
        Eigen::VectorXd e(p);
        for (Eigen::Index i = 0; i < p; ++i) e(i) = sd(i) * rng.normal();
        x.row(t) = (B * x.row(t - 1).transpose() + e).transpose();
    }
    return x.bottomRows(T);
}

}  // namespace

TEST_CASE("B-spline basis") {
    const BSplineBasis b(10);
    CHECK(b.size() == 10);
    CHECK(b.knots().size() == 14);
    for (double s : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        const Eigen::RowVectorXd v = b.eval(s);
        CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(v.minCoeff() >= 0.0);
    }
    CHECK(b.eval(0.0)(0) == doctest::Approx(1.0));
    CHECK(b.eval(1.0)(9) == doctest::Approx(1.0));
    CHECK_THROWS_AS(b.eval(1.2), InputError);
    CHECK_THROWS_AS(BSplineBasis(3), InputError);
}

TEST_CASE("spline smoothing") {
    SUBCASE("constants") {
        const SampledSeries s(Grid::midpoint(20), Eigen::MatrixXd::Constant(3, 20, 1.7));
        const SmoothedCurves c = smooth_bsplines(s, 10);
        CHECK((c.values.array() - 1.7).abs().maxCoeff() < 1e-8);
    }
    SUBCASE("cubic polynomials") {
        const Grid g = Grid::midpoint(20);
        Eigen::MatrixXd v(1, 20);
        auto poly = [](double x) { return 0.3 - 1.2 * x + 2.0 * x * x - 0.7 * x * x * x; };
        for (int i = 0; i < 20; ++i) v(0, i) = poly(g[static_cast<std::size_t>(i)]);
        const SmoothedCurves c = smooth_bsplines(SampledSeries(g, v), 10);
        for (std::size_t k = 0; k < c.fine_grid.size(); ++k) CHECK(std::abs(c.values(0, k) - poly(c.fine_grid[k])) < 1e-8);
    }
    SUBCASE("cosine") {
        const Grid g = Grid::midpoint(40);
        const Eigen::MatrixXd u = eval_cosine_basis(CosineBasis{2}, g.points()).col(1).transpose();
        const SmoothedCurves c = smooth_bsplines(SampledSeries(g, u), 10);
        for (std::size_t k = 0; k < c.fine_grid.size(); ++k) {
            CHECK(std::abs(c.values(0, k) - std::sqrt(2.0) * std::cos(M_PI * c.fine_grid[k])) < 1e-2);
        }
    }
    SUBCASE("values are coefficients times the design") {
        Rng rng(1);
        const SampledSeries s(Grid::midpoint(15), random_matrix(rng, 4, 15));
        const SmoothedCurves c = smooth_bsplines(s, 8);
        CHECK(testutil::rel_diff(c.values, c.coeffs * c.fine_design.transpose()) < 1e-14);
        // Least squares: residuals are orthogonal to the design columns.
        const SplineSmoother sm(s.grid, 8);
        const Eigen::MatrixXd resid = s.values - c.coeffs * sm.design().transpose();
        CHECK((resid * sm.design()).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("too few samples") {
        CHECK_THROWS_AS(SplineSmoother(Grid::midpoint(6), 10), InputError);
    }
}

TEST_CASE("FPCA") {
    Rng rng(2);
    SUBCASE("rank one data") {
        const int T = 40;
        Eigen::MatrixXd x(T, 1);
        for (int t = 0; t < T; ++t) x(t, 0) = rng.normal();
        const SampledSeries s = series_from_scores(x, 30);
        const SmoothedCurves c = smooth_bsplines(s, 10);
        const FpcaResult f = fpca(c);
        CHECK(f.eigenvalues(0) / f.eigenvalues.sum() > 0.999);
        // Compare with u / ||u|| where u is the smoothed curve shape on the fine grid.
        Eigen::VectorXd u = c.values.row(0).transpose();
        u /= std::sqrt(u.squaredNorm() / static_cast<double>(u.size()));
        const Eigen::VectorXd e = f.eigenfunctions.col(0);
        CHECK(std::min((e - u).cwiseAbs().maxCoeff(), (e + u).cwiseAbs().maxCoeff()) < 1e-6);
    }
    SUBCASE("orthonormality, ordering, trace identity and completeness") {
        const Eigen::MatrixXd x = random_matrix(rng, 50, 6);
        const SmoothedCurves c = smooth_bsplines(series_from_scores(x, 25), 10);
        const FpcaResult f = fpca(c);
        const double m = static_cast<double>(c.fine_grid.size());
        const Eigen::MatrixXd G = f.eigenfunctions.transpose() * f.eigenfunctions / m;
        CHECK((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-6);
        for (Eigen::Index i = 1; i < f.eigenvalues.size(); ++i) CHECK(f.eigenvalues(i) <= f.eigenvalues(i - 1));
        CHECK(f.eigenvalues.minCoeff() >= 0.0);
        const double energy = c.values.squaredNorm() / (m * 50.0);
        CHECK(std::abs(f.eigenvalues.sum() - energy) < 1e-6);

        const Eigen::MatrixXd recon = f.scores * f.eigenfunctions.transpose();
        CHECK((recon - c.values).norm() / c.values.norm() < 1e-6);
        const Eigen::MatrixXd partial = f.scores.leftCols(3) * f.eigenfunctions.leftCols(3).transpose();
        CHECK((partial - c.values).norm() > (recon - c.values).norm());

        // Cumulative explained variance is non-decreasing in p.
        double prev = 0.0;
        for (Eigen::Index p = 1; p <= f.eigenvalues.size(); ++p) {
            const double r = f.eigenvalues.head(p).sum() / f.eigenvalues.sum();
            CHECK(r >= prev);
            prev = r;
        }
    }
}

TEST_CASE("explained-variance threshold") {
    CHECK(select_p_threshold(Eigen::Vector3d(1, 0, 0)) == 1);
    CHECK(select_p_threshold(Eigen::Vector3d(0.5, 0.3, 0.2), 0.8) == 2);
    CHECK(select_p_threshold(Eigen::Vector3d(0.5, 0.3, 0.2), 0.81) == 3);
    CHECK_THROWS_AS(select_p_threshold(Eigen::Vector3d(0, 0, 0)), UndefinedMetricError);
    CHECK_THROWS_AS(select_p_threshold(Eigen::Vector3d(0.5, -0.1, 0.2)), InputError);
    CHECK_THROWS_AS(select_p_threshold(Eigen::Vector3d(0.5, 0.3, 0.2), 0.0), InputError);
}

TEST_CASE("Bosq") {
    SUBCASE("scalar Yule-Walker") {
        Eigen::MatrixXd B(1, 1);
        B << 0.6;
        const Eigen::MatrixXd x = var1_scores(B, Eigen::VectorXd::Constant(1, 1.0), 300, 3);
        const BaselineFit fit = bosq_fit(series_from_scores(x, 20), 1);
        REQUIRE(fit.p == 1);
        const Eigen::VectorXd d = fit.fpca.scores.col(0);
        const Eigen::Index T = d.size();
        const double g1 = d.tail(T - 1).dot(d.head(T - 1)) / static_cast<double>(T - 1);
        const double g0 = d.squaredNorm() / static_cast<double>(T);
        CHECK(std::abs(fit.coeff_matrices[0](0, 0) - g1 / g0) < 1e-8);
    }
    SUBCASE("ar(1) recovery at T = 2000") {
        Eigen::MatrixXd B(1, 1);
        B << 0.7;
        const Eigen::MatrixXd x = var1_scores(B, Eigen::VectorXd::Constant(1, 1.0), 2000, 4);
        const BaselineFit fit = bosq_fit(series_from_scores(x, 20), 1);
        CHECK(std::abs(std::abs(fit.coeff_matrices[0](0, 0)) - 0.7) < 0.1);
    }
    SUBCASE("white noise") {
        Rng rng(5);
        const Eigen::MatrixXd x = random_matrix(rng, 2000, 3);
        const BaselineFit fit = bosq_fit(series_from_scores(x, 20), 1);
        CHECK(fit.coeff_matrices[0].norm() < 0.1);
    }
    SUBCASE("operator surface at grid points") {
        Rng rng(6);
        const BaselineFit fit = bosq_fit(series_from_scores(random_matrix(rng, 100, 3), 20), 1);
        const std::vector<double> pts{0.1, 0.5, 0.95};
        const Eigen::MatrixXd S = baseline_operator_surface(fit, 1, pts);
        const Eigen::MatrixXd F = eval_eigenfunctions(fit.fpca, fit.p, pts);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(S(i, j) == doctest::Approx(F.row(i).dot(fit.coeff_matrices[0] * F.row(j).transpose())));
    }
    SUBCASE("order two runs") {
        Eigen::MatrixXd B(2, 2);
        B << 0.5, 0.0, 0.1, 0.3;
        const Eigen::MatrixXd x = var1_scores(B, Eigen::Vector2d(1.0, 0.5), 400, 7);
        const BaselineFit fit = bosq_fit(series_from_scores(x, 20), 2);
        CHECK(fit.coeff_matrices.size() == 2);
        CHECK(fit.order == 2);
    }
    SUBCASE("too short") {
        Rng rng(8);
        CHECK_THROWS_AS(bosq_fit(series_from_scores(random_matrix(rng, 3, 2), 12), 2), InputError);
    }
}

TEST_CASE("VAR least squares") {
    Eigen::MatrixXd B(2, 2);
    // Persistent enough that 0.05 sits well beyond the sampling spread (p95 about 0.033).
    B << 0.9, 0.1, -0.1, 0.85;
    const Eigen::MatrixXd x = var1_scores(B, Eigen::Vector2d(1.0, 1.0), 2000, 9);
    const VarFit v = fit_var(x, 1);
    CHECK((v.coeff[0] - B).norm() < 0.05);
    // Normal equations solved independently.
    const Eigen::MatrixXd Y = x.bottomRows(1999), Xl = x.topRows(1999);
    const Eigen::MatrixXd Bhat = (Xl.transpose() * Xl).ldlt().solve(Xl.transpose() * Y).transpose();
    CHECK(testutil::rel_diff(v.coeff[0], Bhat) < 1e-10);
    const Eigen::MatrixXd E = Y - Xl * Bhat.transpose();
    CHECK(testutil::rel_diff(v.residual_cov, E.transpose() * E / 1999.0) < 1e-10);

    Eigen::MatrixXd collinear(50, 2);
    Rng rng(10);
    for (int t = 0; t < 50; ++t) collinear(t, 0) = collinear(t, 1) = rng.normal();
    CHECK_THROWS_AS(fit_var(collinear, 1), NumericalError);
}

TEST_CASE("fFPE") {
    SUBCASE("perfect fit over the full spectrum is zero") {
        const double c = std::cos(0.3), s = std::sin(0.3);
        Eigen::MatrixXd x(40, 2);
        x.row(0) << 1.0, 0.0;
        for (int t = 1; t < 40; ++t) x.row(t) << c * x(t - 1, 0) - s * x(t - 1, 1), s * x(t - 1, 0) + c * x(t - 1, 1);
        const Eigen::VectorXd eig = Eigen::Vector2d(0.5, 0.5);
        CHECK(std::abs(ffpe(x, eig, 2, 1)) < 1e-20);
    }
    SUBCASE("empty model") {
        Rng rng(11);
        const Eigen::MatrixXd x = random_matrix(rng, 30, 3);
        CHECK(ffpe(x, Eigen::Vector3d(0.6, 0.3, 0.1), 0, 1) == doctest::Approx(1.0));
    }
    SUBCASE("formula and exhaustive minimiser") {
        Rng rng(12);
        Eigen::MatrixXd x = random_matrix(rng, 60, 3);
        x.col(1) *= 0.6;
        x.col(2) *= 0.3;
        Eigen::VectorXd eig(3);
        for (int i = 0; i < 3; ++i) eig(i) = x.col(i).squaredNorm() / 60.0;

        double best = std::numeric_limits<double>::infinity();
        int bp = 0, bd = 0;
        for (int D = 1; D <= 2; ++D) {
            for (int p = 1; p <= 3; ++p) {
                const Eigen::Index rows = 60 - D;
                Eigen::MatrixXd Y = x.bottomRows(rows).leftCols(p), L(rows, p * D);
                for (int d = 1; d <= D; ++d) L.middleCols((d - 1) * p, p) = x.middleRows(D - d, rows).leftCols(p);
                const Eigen::MatrixXd coef = (L.transpose() * L).ldlt().solve(L.transpose() * Y);
                const Eigen::MatrixXd E = Y - L * coef;
                const double tr = (E.transpose() * E / static_cast<double>(rows)).trace();
                const double oracle = (60.0 + p * D) / (60.0 - p * D) * tr + eig.tail(3 - p).sum();
                CHECK(ffpe(x, eig, p, D) == doctest::Approx(oracle).epsilon(1e-10));
                if (oracle < best) {
                    best = oracle;
                    bp = p;
                    bd = D;
                }
            }
        }
        const OrderChoice ch = select_anh_order(x, eig, 3, 2);
        CHECK(ch.p == bp);
        CHECK(ch.order == bd);
        CHECK(ch.criterion == doctest::Approx(best));
        CHECK(ch.candidates.size() == 6);
    }
    SUBCASE("single admissible cell") {
        Rng rng(13);
        const Eigen::MatrixXd x = random_matrix(rng, 30, 1);
        const OrderChoice ch = select_anh_order(x, Eigen::VectorXd::Constant(1, 1.0), 1, 1);
        CHECK(ch.p == 1);
        CHECK(ch.order == 1);
    }
    SUBCASE("inadmissible size") {
        Rng rng(14);
        CHECK_THROWS_AS(ffpe(random_matrix(rng, 5, 3), Eigen::Vector3d(1, 1, 1), 3, 2), InputError);
    }
}

TEST_CASE("ANH") {
    Eigen::MatrixXd B(2, 2);
    B << 0.5, 0.2, -0.3, 0.4;
    const Eigen::MatrixXd x = var1_scores(B, Eigen::Vector2d(1.0, 0.4), 2000, 15);
    const SampledSeries s = series_from_scores(x, 30);
    const BaselineFit fit = anh_fit(s, 1);
    CHECK(fit.kind == BaselineKind::anh);
    CHECK(fit.order == 1);

    SUBCASE("two prediction routes agree") {
        const Eigen::MatrixXd h = s.values.bottomRows(1);
        const Eigen::VectorXd a = baseline_predict(fit, h);
        const SmoothedCurves c = smooth_bsplines(SampledSeries(s.grid, h), fit.fpca.num_basis);
        const double m = static_cast<double>(c.fine_grid.size());
        const Eigen::MatrixXd S = eval_eigenfunctions(fit.fpca, fit.p, s.grid.points()) * fit.coeff_matrices[0] *
                                  eval_eigenfunctions(fit.fpca, fit.p, c.fine_grid).transpose();
        const Eigen::VectorXd b = S * c.values.row(0).transpose() / m;
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
    }
    SUBCASE("recovers the transition when two components are kept") {
        if (fit.p == 2) {
            // Align eigenfunction signs with the generating basis before comparing.
            const Eigen::MatrixXd F = fit.grid_functions;
            const Eigen::MatrixXd U = eval_cosine_basis(CosineBasis{3}, s.grid.points()).rightCols(2);
            Eigen::Vector2d sign;
            for (int i = 0; i < 2; ++i) sign(i) = F.col(i).dot(U.col(i)) >= 0 ? 1.0 : -1.0;
            const Eigen::MatrixXd aligned = sign.asDiagonal() * fit.coeff_matrices[0] * sign.asDiagonal();
            CHECK((aligned - B).norm() < 0.05);
        }
    }
    SUBCASE("zero history and zero coefficients") {
        CHECK(baseline_predict(fit, Eigen::MatrixXd::Zero(1, 30)).cwiseAbs().maxCoeff() < 1e-14);
        BaselineFit z = fit;
        z.coeff_matrices[0].setZero();
        CHECK(baseline_predict(z, s.values.bottomRows(1)).isZero(0.0));
    }
    SUBCASE("identity propagation reconstructs the last curve") {
        BaselineFit id = fit;
        id.coeff_matrices[0] = Eigen::MatrixXd::Identity(fit.p, fit.p);
        const Eigen::MatrixXd h = s.values.bottomRows(1);
        const SmoothedCurves c = smooth_bsplines(SampledSeries(s.grid, h), fit.fpca.num_basis);
        const double m = static_cast<double>(c.fine_grid.size());
        const Eigen::MatrixXd Ffine = eval_eigenfunctions(fit.fpca, fit.p, c.fine_grid);
        const Eigen::VectorXd scores = Ffine.transpose() * c.values.row(0).transpose() / m;
        const Eigen::VectorXd expect = eval_eigenfunctions(fit.fpca, fit.p, s.grid.points()) * scores;
        CHECK((baseline_predict(id, h) - expect).cwiseAbs().maxCoeff() < 1e-6);
    }
    SUBCASE("history checks") {
        CHECK_THROWS_AS(baseline_predict(fit, Eigen::MatrixXd::Zero(0, 30)), InputError);
        CHECK_THROWS_AS(baseline_predict(fit, Eigen::MatrixXd::Zero(1, 29)), InputError);
    }
}
