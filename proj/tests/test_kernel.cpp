#include "doctest.h"

#include "rkhsfar/errors.hpp"
#include "rkhsfar/kernel.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <vector>

using namespace rkhsfar;

namespace {

std::vector<double> random_grid(Rng& rng, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (auto& x : g) x = rng.uniform01();
    std::sort(g.begin(), g.end());
    return g;
}

}  // namespace

TEST_CASE("kernel values at hand-checked points") {
    const KernelSpec k;
    CHECK(eval_kernel(k, 0.5, 0.5) == doctest::Approx(1.0 + 1.0 / 576.0 + 1.0 / 720.0).epsilon(1e-14));
    CHECK(eval_kernel(k, 0.0, 0.0) == doctest::Approx(1.25 + 1.0 / 144.0 + 1.0 / 720.0).epsilon(1e-14));
    CHECK(eval_kernel(k, 0.0, 1.0) == doctest::Approx(0.75 + 1.0 / 144.0 + 1.0 / 720.0).epsilon(1e-14));
}

TEST_CASE("kernel agrees with Bernoulli polynomial oracle") {
    const KernelSpec k;
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const double x = rng.uniform01(), y = rng.uniform01();
        CHECK(std::abs(eval_kernel(k, x, y) - testutil::reference_kernel(x, y)) < 1e-13);
    }
}

TEST_CASE("kernel is exactly symmetric") {
    const KernelSpec k;
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform01(), y = rng.uniform01();
        REQUIRE(eval_kernel(k, x, y) == eval_kernel(k, y, x));
    }
}

TEST_CASE("kernel diagonal bound") {
    const KernelSpec k;
    double sup = 0.0;
    for (int i = 0; i <= 1000; ++i) sup = std::max(sup, eval_kernel(k, i / 1000.0, i / 1000.0));
    CHECK(sup <= 1.26);
}

TEST_CASE("kernel rejects points outside the unit interval") {
    CHECK_THROWS_AS(eval_kernel(KernelSpec{}, -0.1, 0.5), InputError);
    CHECK_THROWS_AS(eval_kernel(KernelSpec{}, 0.5, 1.5), InputError);
}

TEST_CASE("gram matrix") {
    const KernelSpec k;
    SUBCASE("single point") {
        const std::vector<double> g{0.5};
        const Eigen::MatrixXd K = gram_matrix(k, g);
        REQUIRE(K.rows() == 1);
        CHECK(K(0, 0) == doctest::Approx(1.003125).epsilon(1e-14));
    }
    SUBCASE("random grids are symmetric and PSD") {
        Rng rng(5);
        for (int rep = 0; rep < 50; ++rep) {
            const int n = 1 + static_cast<int>(rng.uniform01() * 100);
            const auto g = random_grid(rng, n);
            const Eigen::MatrixXd K = gram_matrix(k, g);
            REQUIRE(K == K.transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
        }
    }
    SUBCASE("midpoint grid") {
        std::vector<double> g;
        for (int i = 0; i < 20; ++i) g.push_back((i + 0.5) / 20.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_matrix(k, g));
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
    }
    SUBCASE("cross gram rows are kernel sections") {
        const std::vector<double> pts{0.1, 0.7};
        const std::vector<double> g{0.2, 0.4, 0.9};
        const Eigen::MatrixXd C = cross_gram(k, pts, g);
        for (int r = 0; r < 2; ++r)
            for (int j = 0; j < 3; ++j) CHECK(C(r, j) == eval_kernel(k, pts[r], g[j]));
    }
}

TEST_CASE("spectral square root") {
    SUBCASE("identity") {
        const SpectralFactor f = spectral_sqrt(Eigen::MatrixXd::Identity(2, 2));
        CHECK(testutil::rel_diff(f.sqrt, Eigen::MatrixXd::Identity(2, 2)) < 1e-14);
        CHECK(testutil::rel_diff(f.inv_sqrt, Eigen::MatrixXd::Identity(2, 2)) < 1e-14);
    }
    SUBCASE("rank-deficient diagonal") {
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2, 2);
        K(0, 0) = 4.0;
        const SpectralFactor f = spectral_sqrt(K);
        CHECK(f.eigen_floor == doctest::Approx(4e-12));
        CHECK(f.sqrt(0, 0) == doctest::Approx(2.0));
        CHECK(f.sqrt(1, 1) == doctest::Approx(std::sqrt(4e-12)));
        CHECK(f.inv_sqrt(0, 0) == doctest::Approx(0.5));
        CHECK(f.inv_sqrt(1, 1) == 0.0);
    }
    SUBCASE("random PSD reconstruction") {
        Rng rng(7);
        const Eigen::MatrixXd A = testutil::random_matrix(rng, 10, 10);
        const Eigen::MatrixXd K = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(10, 10);
        const SpectralFactor f = spectral_sqrt(K);
        CHECK(testutil::rel_diff(f.sqrt * f.sqrt, K) < 1e-8);
    }
    SUBCASE("sqrt times inv_sqrt is a projector") {
        std::vector<double> g;
        for (int i = 0; i < 60; ++i) g.push_back((i + 0.5) / 60.0);
        const SpectralFactor f = spectral_sqrt(gram_matrix(KernelSpec{}, g));
        const Eigen::MatrixXd P = f.sqrt * f.inv_sqrt;
        CHECK((P * P - P).norm() / std::max(1.0, P.norm()) < 1e-8);
    }
}

TEST_CASE("operator nuclear norm") {
    Rng rng(9);
    SUBCASE("zero") {
        const SpectralFactor f = spectral_sqrt(Eigen::MatrixXd::Identity(3, 3));
        CHECK(operator_nuclear_norm(Eigen::MatrixXd::Zero(3, 3), f) == 0.0);
    }
    SUBCASE("identity kernel") {
        const SpectralFactor f = spectral_sqrt(Eigen::MatrixXd::Identity(2, 2));
        const Eigen::MatrixXd Q = Eigen::JacobiSVD<Eigen::MatrixXd>(testutil::random_matrix(rng, 2, 2),
                                                                    Eigen::ComputeFullU).matrixU();
        Eigen::MatrixXd R = Q * Eigen::Vector2d(2.0, 1.0).asDiagonal() * Q.transpose();
        CHECK(operator_nuclear_norm(R, f) == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("eigenvalue route") {
        for (int rep = 0; rep < 10; ++rep) {
            const Eigen::MatrixXd A = testutil::random_matrix(rng, 6, 6);
            const Eigen::MatrixXd K = A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(6, 6);
            const Eigen::MatrixXd R = testutil::random_matrix(rng, 6, 6);
            const SpectralFactor f = spectral_sqrt(K);
            const Eigen::VectorXcd ev = (R.transpose() * K * R * K).eigenvalues();
            double oracle = 0.0;
            for (Eigen::Index i = 0; i < ev.size(); ++i) oracle += std::sqrt(std::max(0.0, ev(i).real()));
            CHECK(operator_nuclear_norm(R, f) == doctest::Approx(oracle).epsilon(1e-8));

            // Principal square root of K^{1/2} R^T K R K^{1/2}.
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.sqrt * R.transpose() * K * R * f.sqrt);
            const double trace_root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
            CHECK(operator_nuclear_norm(R, f) == doctest::Approx(trace_root).epsilon(1e-8));
        }
    }
}

TEST_CASE("kernel kind names") {
    CHECK(kernel_kind_from_string(to_string(KernelKind::sobolev_bernoulli)) == KernelKind::sobolev_bernoulli);
    CHECK_THROWS_AS(kernel_kind_from_string("gaussian"), InputError);
}
