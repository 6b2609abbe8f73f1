#include "doctest.h"

#include "rkhsfar/errors.hpp"
#include "rkhsfar/tracenorm.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace rkhsfar;
using testutil::random_matrix;

namespace {

TraceNormProblem random_problem(Rng& rng, int n, int m, int D, bool shared_left = false) {
    std::vector<Eigen::MatrixXd> left, right;
    const Eigen::MatrixXd base = random_matrix(rng, n, n) / std::sqrt(static_cast<double>(n));
    for (int d = 0; d < D; ++d) {
        left.push_back(shared_left ? Eigen::MatrixXd((1.0 + d) * base) : Eigen::MatrixXd(random_matrix(rng, n, n) / std::sqrt(n)));
        right.push_back(random_matrix(rng, n, m) / std::sqrt(static_cast<double>(m)));
    }
    return TraceNormProblem(3.0 * random_matrix(rng, n, m), left, right);
}

BlockSet random_blocks(Rng& rng, const TraceNormProblem& p) {
    BlockSet W;
    for (int d = 0; d < p.blocks(); ++d) W.push_back(random_matrix(rng, p.block_rows(d), p.block_cols(d)));
    return W;
}

}  // namespace

TEST_CASE("objective special cases") {
    Rng rng(1);
    const Eigen::MatrixXd X = random_matrix(rng, 4, 6);
    const TraceNormProblem p(X, {random_matrix(rng, 4, 4)}, {random_matrix(rng, 4, 6)});
    CHECK(objective(p, p.zero_blocks()) == doctest::Approx(X.squaredNorm()));

    const TraceNormProblem z(Eigen::MatrixXd::Zero(4, 6), {random_matrix(rng, 4, 4)}, {random_matrix(rng, 4, 6)});
    CHECK(objective(z, z.zero_blocks()) == 0.0);

    const Eigen::MatrixXd W = random_matrix(rng, 3, 3);
    const TraceNormProblem id(W, {Eigen::MatrixXd::Identity(3, 3)}, {Eigen::MatrixXd::Identity(3, 3)});
    const double nuc = Eigen::JacobiSVD<Eigen::MatrixXd>(W).singularValues().sum();
    CHECK(objective(id, {W}) == doctest::Approx(nuc).epsilon(1e-12));
}

TEST_CASE("cached and direct smooth parts agree") {
    Rng rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        const TraceNormProblem p = random_problem(rng, 5, 9, 2);
        const BlockSet W = random_blocks(rng, p);
        CHECK(p.smooth_part(W) == doctest::Approx(p.smooth_part_direct(W)).epsilon(1e-10));
    }
}

TEST_CASE("gradient") {
    Rng rng(3);
    SUBCASE("zero data") {
        const TraceNormProblem p(Eigen::MatrixXd::Zero(3, 5), {random_matrix(rng, 3, 3)}, {random_matrix(rng, 3, 5)});
        CHECK(gradient_block(p, p.zero_blocks(), 1).isZero(0.0));
    }
    SUBCASE("identity factors") {
        const Eigen::MatrixXd X = random_matrix(rng, 3, 3);
        const TraceNormProblem p(X, {Eigen::MatrixXd::Identity(3, 3)}, {Eigen::MatrixXd::Identity(3, 3)});
        CHECK(testutil::rel_diff(gradient_block(p, p.zero_blocks(), 1), -2.0 * X) < 1e-15);
    }
    SUBCASE("central finite differences") {
        const double h = 1e-6;
        for (int rep = 0; rep < 20; ++rep) {
            const int D = 1 + rep % 2;
            const TraceNormProblem p = random_problem(rng, 2 + rep % 5, 5 + rep, D);
            BlockSet W = random_blocks(rng, p);
            for (int d = 1; d <= D; ++d) {
                const Eigen::MatrixXd g = gradient_block(p, W, d);
                Eigen::MatrixXd fd(g.rows(), g.cols());
                for (Eigen::Index i = 0; i < g.rows(); ++i) {
                    for (Eigen::Index j = 0; j < g.cols(); ++j) {
                        const double keep = W[d - 1](i, j);
                        W[d - 1](i, j) = keep + h;
                        const double up = p.smooth_part_direct(W);
                        W[d - 1](i, j) = keep - h;
                        const double down = p.smooth_part_direct(W);
                        W[d - 1](i, j) = keep;
                        fd(i, j) = (up - down) / (2.0 * h);
                    }
                }
                CHECK(testutil::rel_diff(g, fd) < 1e-5);
            }
        }
    }
    SUBCASE("lag index range") {
        const TraceNormProblem p = random_problem(rng, 3, 4, 1);
        CHECK_THROWS_AS(gradient_block(p, p.zero_blocks(), 2), InputError);
    }
}

TEST_CASE("singular value thresholding") {
    Rng rng(4);
    const Eigen::MatrixXd M = random_matrix(rng, 5, 3);
    CHECK(testutil::rel_diff(svt_prox(M, 0.0), M) < 1e-10);

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D(0, 0) = 3.0;
    D(1, 1) = 1.0;
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(2, 2);
    expect(0, 0) = 1.0;
    CHECK((svt_prox(D, 2.0) - expect).norm() < 1e-12);

    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd A = random_matrix(rng, 4, 6);
        const double tau = rng.uniform(0.0, 3.0);
        const double top = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
        const SvtResult r = svt(A, tau);
        const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(r.value).singularValues();
        CHECK(s(0) <= std::max(top - tau, 0.0) + 1e-10);
        CHECK(r.nuclear_norm == doctest::Approx(s.sum()).epsilon(1e-10));
    }
    CHECK_THROWS_AS(svt_prox(M, -1.0), InputError);
}

TEST_CASE("AGM") {
    Rng rng(5);
    SUBCASE("zero data converges at once") {
        const TraceNormProblem p(Eigen::MatrixXd::Zero(4, 8), {random_matrix(rng, 4, 4)}, {random_matrix(rng, 4, 8)});
        const AgmState s = agm_minimize(p);
        CHECK(s.converged);
        CHECK(s.iteration <= 2);
        for (const auto& W : s.blocks) CHECK(W.isZero(0.0));
    }
    SUBCASE("separable closed form") {
        Eigen::MatrixXd X = Eigen::MatrixXd::Zero(2, 2);
        X(0, 0) = 3.0;
        X(1, 1) = 1.0;
        const TraceNormProblem p(X, {Eigen::MatrixXd::Identity(2, 2)}, {Eigen::MatrixXd::Identity(2, 2)});
        const AgmState s = agm_minimize(p);
        // Per singular value: argmin (x - w)^2 + w gives w = x - 1/2.
        Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(2, 2);
        expect(0, 0) = 2.5;
        expect(1, 1) = 0.5;
        CHECK((s.blocks[0] - expect).norm() < 1e-6);
        CHECK((s.blocks[0] - svt_prox(X, 0.5)).norm() < 1e-6);
    }
    SUBCASE("random instances: optimality and monotone trace") {
        for (int rep = 0; rep < 12; ++rep) {
            const int n = 2 + rep % 9;
            const int m = 10 + 3 * rep;
            const int D = 1 + rep % 2;
            const TraceNormProblem p = random_problem(rng, n, m, D);
            const AgmState s = agm_minimize(p);
            CHECK(s.converged);
            CHECK(prox_fixed_point_residual(p, s.blocks, s.lipschitz) < 1e-6);
            for (std::size_t k = 1; k < s.objective_trace.size(); ++k) {
                REQUIRE(s.objective_trace[k] <= s.objective_trace[k - 1] + 1e-12);
            }
            CHECK(s.objective_trace.back() <= objective(p, p.zero_blocks()));
        }
    }
    SUBCASE("different starts reach the same objective") {
        for (int rep = 0; rep < 5; ++rep) {
            const TraceNormProblem p = random_problem(rng, 5, 30, 2);
            const AgmState a = agm_minimize(p);
            const AgmState b = agm_minimize(p, AgmOptions{}, random_blocks(rng, p));
            const double fa = objective(p, a.blocks), fb = objective(p, b.blocks);
            CHECK(std::abs(fa - fb) <= 1e-6 * std::max(fa, fb));
        }
    }
    SUBCASE("momentum sequence") {
        // alpha_{k+1} = (1 + sqrt(1 + 4 alpha_k^2)) / 2 from alpha_1 = 1, so alpha_k >= (k + 1) / 2.
        const TraceNormProblem p = random_problem(rng, 4, 20, 1);
        AgmOptions o;
        o.max_iter = 30;
        o.rel_tol = 0.0;
        const AgmState s = agm_minimize(p, o);
        if (s.restarts == 0) CHECK(s.alpha >= (s.iteration + 1) / 2.0);
    }
}

TEST_CASE("ADMM agrees with AGM on shared-left problems") {
    Rng rng(6);
    for (int rep = 0; rep < 8; ++rep) {
        const int D = 1 + rep % 2;
        const TraceNormProblem p = random_problem(rng, 3 + rep % 6, 40, D, true);
        REQUIRE(has_shared_left_factor(p));
        AdmmOptions ao;
        ao.rel_tol = 1e-10;
        ao.max_iter = 50000;
        const AdmmResult a = admm_minimize(p, ao);
        AgmOptions go;
        go.rel_tol = 1e-14;
        go.max_iter = 50000;
        const AgmState g = agm_minimize(p, go);
        const double fa = objective(p, a.blocks), fg = objective(p, g.blocks);
        CHECK(std::abs(fa - fg) <= 1e-6 * std::max(fa, fg));
        CHECK(a.objective == doctest::Approx(fa).epsilon(1e-12));
    }
    SUBCASE("zero is returned when it is optimal") {
        const TraceNormProblem p(1e-3 * random_matrix(rng, 3, 5), {Eigen::MatrixXd::Identity(3, 3)},
                                 {Eigen::MatrixXd::Identity(3, 5)});
        const AdmmResult a = admm_minimize(p);
        CHECK(a.converged);
        for (const auto& W : a.blocks) CHECK(W.isZero(0.0));
    }
    SUBCASE("unshared left factors are rejected") {
        const TraceNormProblem p = random_problem(rng, 3, 10, 2, false);
        CHECK_FALSE(has_shared_left_factor(p));
        CHECK_THROWS_AS(admm_minimize(p), InputError);
    }
}

TEST_CASE("problem validation") {
    Rng rng(7);
    CHECK_THROWS_AS(TraceNormProblem(random_matrix(rng, 3, 4), {random_matrix(rng, 3, 3)}, {random_matrix(rng, 3, 5)}),
                    InputError);
    CHECK_THROWS_AS(TraceNormProblem(random_matrix(rng, 3, 4), {}, {}), InputError);
    const TraceNormProblem p = random_problem(rng, 3, 4, 1);
    CHECK_THROWS_AS(objective(p, {Eigen::MatrixXd::Zero(2, 2)}), InputError);
}
