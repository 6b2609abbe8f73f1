#include "rkhsfar/simulator.hpp"

#include "rkhsfar/errors.hpp"
#include "rkhsfar/rng.hpp"

#include <cmath>
#include <iostream>

namespace rkhsfar {

NoiseSpec NoiseSpec::uniform(double a) {
    if (!(a > 0.0)) throw InputError("uniform noise half-width must be positive");
    NoiseSpec s;
    s.kind = NoiseKind::uniform;
    s.half_width = a;
    return s;
}

NoiseSpec NoiseSpec::gaussian(Eigen::VectorXd sigmas) {
    if (sigmas.size() == 0 || !(sigmas.array() > 0.0).all()) {
        throw InputError("gaussian noise standard deviations must be positive");
    }
    NoiseSpec s;
    s.kind = NoiseKind::gaussian;
    s.sigmas = std::move(sigmas);
    return s;
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::A:
            return "A";
        case Scenario::B:
            return "B";
        case Scenario::Ca:
            return "Ca";
        case Scenario::Cb:
            return "Cb";
    }
    return "?";
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "A" || name == "A2") return Scenario::A;
    if (name == "B" || name == "B2") return Scenario::B;
    if (name == "Ca" || name == "C2a" || name == "C(a)") return Scenario::Ca;
    if (name == "Cb" || name == "C2b" || name == "C(b)") return Scenario::Cb;
    throw InputError("unknown scenario '" + name + "'");
}

double spectral_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues()(0);
}

namespace {

Eigen::VectorXd scenario_c_sigmas(Scenario scenario, int q) {
    Eigen::VectorXd s(q);
    for (int i = 0; i < q; ++i) {
        s(i) = scenario == Scenario::Ca ? 1.0 / static_cast<double>(i + 1)
                                        : std::pow(1.2, -static_cast<double>(i + 1));
    }
    return s;
}

Eigen::MatrixXd rescale_to_norm(const Eigen::MatrixXd& raw, double kappa) {
    if (kappa == 0.0) return Eigen::MatrixXd::Zero(raw.rows(), raw.cols());
    const double top = spectral_norm(raw);
    if (!(top > 0.0)) throw NumericalError("random transition matrix has zero spectral norm");
    return (kappa / top) * raw;
}

}  // namespace

FarGroundTruth make_scenario(Scenario scenario, int q, int D, const std::vector<double>& kappas,
                             std::uint64_t seed) {
    if (q < 1) throw InputError("make_scenario: q must be at least 1");
    if (D < 1) throw InputError("make_scenario: D must be at least 1");
    if (static_cast<int>(kappas.size()) != D) {
        throw InputError("make_scenario: expected " + std::to_string(D) + " kappas, got " +
                         std::to_string(kappas.size()));
    }
    for (double k : kappas) {
        if (!(k >= 0.0)) throw InputError("make_scenario: kappas must be non-negative");
    }

    FarGroundTruth truth;
    truth.basis.q = q;
    Rng rng(seed);

    switch (scenario) {
        case Scenario::A:
            for (int d = 0; d < D; ++d) {
                truth.lags.push_back(kappas[d] * Eigen::MatrixXd::Identity(q, q));
            }
            truth.noise = NoiseSpec::uniform(0.1);
            break;
        case Scenario::B:
            for (int d = 0; d < D; ++d) {
                Eigen::MatrixXd raw(q, q);
                for (int i = 0; i < q; ++i)
                    for (int j = 0; j < q; ++j) raw(i, j) = rng.normal();
                truth.lags.push_back(rescale_to_norm(raw, kappas[d]));
            }
            truth.noise = NoiseSpec::uniform(0.1);
            break;
        case Scenario::Ca:
        case Scenario::Cb: {
            const Eigen::VectorXd sig = scenario_c_sigmas(scenario, q);
            for (int d = 0; d < D; ++d) {
                Eigen::MatrixXd raw(q, q);
                // N(0, sigma_i sigma_j) is a variance, so the deviate is scaled by its root.
                for (int i = 0; i < q; ++i)
                    for (int j = 0; j < q; ++j) raw(i, j) = std::sqrt(sig(i) * sig(j)) * rng.normal();
                truth.lags.push_back(rescale_to_norm(raw, kappas[d]));
            }
            truth.noise = NoiseSpec::gaussian(sig);
            break;
        }
    }
    return truth;
}

double companion_spectral_radius(const FarGroundTruth& truth) {
    const int D = truth.order();
    const int q = truth.q();
    if (D < 1) throw InputError("companion_spectral_radius: model has no lags");
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(q * D, q * D);
    for (int d = 0; d < D; ++d) C.block(0, d * q, q, q) = truth.lags[d];
    if (D > 1) C.bottomLeftCorner(q * (D - 1), q * (D - 1)).setIdentity();
    Eigen::EigenSolver<Eigen::MatrixXd> eig(C, false);
    if (eig.info() != Eigen::Success) throw NumericalError("companion eigendecomposition failed");
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

void validate_truth(const FarGroundTruth& truth) {
    if (truth.order() < 1) throw InputError("ground truth has no lags");
    for (const auto& L : truth.lags) {
        if (L.rows() != truth.q() || L.cols() != truth.q()) {
            throw InputError("transition matrix shape does not match basis dimension");
        }
    }
    if (truth.noise.kind == NoiseKind::gaussian && truth.noise.sigmas.size() != truth.q()) {
        throw InputError("gaussian noise needs one sigma per basis function");
    }
}

}  // namespace

Eigen::VectorXd propagate_scores(const FarGroundTruth& truth, const Eigen::MatrixXd& history) {
    const int D = truth.order();
    if (history.rows() != D || history.cols() != truth.q()) {
        throw InputError("history must hold " + std::to_string(D) + " rows of " +
                         std::to_string(truth.q()) + " scores");
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(truth.q());
    for (int d = 1; d <= D; ++d) {
        acc.noalias() += truth.lags[d - 1] * history.row(D - d).transpose();
    }
    return acc;
}

SimOutput simulate(const FarGroundTruth& truth, int T, const Grid& grid, int burn_in,
                   std::uint64_t seed) {
    validate_truth(truth);
    const int D = truth.order();
    const int q = truth.q();
    if (T < D + 1) throw InputError("simulate: T must exceed the model order");
    if (burn_in < 0) throw InputError("simulate: burn_in must be non-negative");
    if (grid.empty()) throw InputError("simulate: empty grid");

    const double radius = companion_spectral_radius(truth);
    if (radius >= 1.0) {
        throw RefusalError("simulate: companion spectral radius " + format_double(radius) +
                           " >= 1; the process is not stationary");
    }
    if (radius >= 0.99) {
        std::clog << "warning: companion spectral radius " << radius
                  << " is close to 1; burn-in may not reach stationarity\n";
    }

    Rng rng(seed);
    const int total = burn_in + T;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(total, q);
    Eigen::MatrixXd z(total, q);
    for (int t = 0; t < total; ++t) {
        for (int i = 0; i < q; ++i) {
            z(t, i) = truth.noise.kind == NoiseKind::uniform
                          ? rng.uniform(-truth.noise.half_width, truth.noise.half_width)
                          : truth.noise.sigmas(i) * rng.normal();
        }
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(q);
        for (int d = 1; d <= D && t - d >= 0; ++d) {
            acc.noalias() += truth.lags[d - 1] * x.row(t - d).transpose();
        }
        x.row(t) = (acc + z.row(t).transpose()).transpose();
    }

    SimOutput out;
    out.spectral_radius = radius;
    out.scores = x.bottomRows(T);
    out.noise_scores = z.bottomRows(T);
    const Eigen::MatrixXd U = eval_cosine_basis(truth.basis, grid.points());
    out.series = SampledSeries(grid, out.scores * U.transpose());
    return out;
}

SimOutput simulate(const FarGroundTruth& truth, int T, int n, GridKind grid_kind, int burn_in,
                   std::uint64_t seed) {
    if (n < 1) throw InputError("simulate: n must be positive");
    Grid grid;
    switch (grid_kind) {
        case GridKind::midpoint_equispaced:
            grid = Grid::midpoint(static_cast<std::size_t>(n));
            break;
        case GridKind::uniform_random: {
            Rng grid_rng(derive_seed(seed, 0x67726964ULL, 0));
            grid = Grid::uniform_random(static_cast<std::size_t>(n), grid_rng);
            break;
        }
        case GridKind::explicit_points:
            throw InputError("simulate: explicit grids must be passed as a Grid");
    }
    return simulate(truth, T, grid, burn_in, seed);
}

Eigen::VectorXd oracle_predict(const FarGroundTruth& truth, const Eigen::MatrixXd& history_scores,
                               const Grid& grid) {
    const Eigen::VectorXd mean_scores = propagate_scores(truth, history_scores);
    return eval_cosine_basis(truth.basis, grid.points()) * mean_scores;
}

double eval_true_operator(const FarGroundTruth& truth, int d, double r, double s) {
    if (d < 1 || d > truth.order()) {
        throw InputError("lag " + std::to_string(d) + " outside 1.." + std::to_string(truth.order()));
    }
    const Eigen::RowVectorXd ur = eval_cosine_basis(truth.basis, r);
    const Eigen::RowVectorXd us = eval_cosine_basis(truth.basis, s);
    return ur * truth.lags[d - 1] * us.transpose();
}

Eigen::MatrixXd true_operator_surface(const FarGroundTruth& truth, int d,
                                      std::span<const double> points) {
    if (d < 1 || d > truth.order()) {
        throw InputError("lag " + std::to_string(d) + " outside 1.." + std::to_string(truth.order()));
    }
    const Eigen::MatrixXd U = eval_cosine_basis(truth.basis, points);
    return U * truth.lags[d - 1] * U.transpose();
}

}  // namespace rkhsfar
