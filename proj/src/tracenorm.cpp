#include "rkhsfar/tracenorm.hpp"

#include "rkhsfar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rkhsfar {

TraceNormProblem::TraceNormProblem(Eigen::MatrixXd target, std::vector<Eigen::MatrixXd> left_factors,
                                   std::vector<Eigen::MatrixXd> right_factors)
    : target_(std::move(target)), left_(std::move(left_factors)), right_(std::move(right_factors)) {
    const int D = static_cast<int>(left_.size());
    if (D < 1) throw InputError("trace-norm problem needs at least one block");
    if (static_cast<int>(right_.size()) != D) {
        throw InputError("trace-norm problem: " + std::to_string(D) + " left factors but " +
                         std::to_string(right_.size()) + " right factors");
    }
    for (int d = 0; d < D; ++d) {
        if (left_[d].rows() != target_.rows()) {
            throw InputError("left factor " + std::to_string(d + 1) + " has " +
                             std::to_string(left_[d].rows()) + " rows, target has " +
                             std::to_string(target_.rows()));
        }
        if (right_[d].cols() != target_.cols()) {
            throw InputError("right factor " + std::to_string(d + 1) + " has " +
                             std::to_string(right_[d].cols()) + " columns, target has " +
                             std::to_string(target_.cols()));
        }
    }
    if (!target_.allFinite()) throw InputError("trace-norm problem: non-finite target");

    target_sq_ = target_.squaredNorm();
    left_gram_.resize(static_cast<std::size_t>(D * D));
    right_gram_.resize(static_cast<std::size_t>(D * D));
    cross_.resize(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d) {
        cross_[d] = left_[d].transpose() * target_ * right_[d].transpose();
        for (int e = 0; e < D; ++e) {
            left_gram_[d * D + e] = left_[d].transpose() * left_[e];
            right_gram_[d * D + e] = right_[d] * right_[e].transpose();
        }
    }
}

BlockSet TraceNormProblem::zero_blocks() const {
    BlockSet W;
    for (int d = 0; d < blocks(); ++d) W.push_back(Eigen::MatrixXd::Zero(block_rows(d), block_cols(d)));
    return W;
}

void TraceNormProblem::check_blocks(const BlockSet& W) const {
    if (static_cast<int>(W.size()) != blocks()) {
        throw InputError("expected " + std::to_string(blocks()) + " blocks, got " +
                         std::to_string(W.size()));
    }
    for (int d = 0; d < blocks(); ++d) {
        if (W[d].rows() != block_rows(d) || W[d].cols() != block_cols(d)) {
            throw InputError("block " + std::to_string(d + 1) + " is " + std::to_string(W[d].rows()) +
                             "x" + std::to_string(W[d].cols()) + ", expected " +
                             std::to_string(block_rows(d)) + "x" + std::to_string(block_cols(d)));
        }
    }
}

namespace {

// H_d = sum_e (K_d^T K_e) W_e (Z_e Z_d^T).
BlockSet quadratic_terms(const std::vector<Eigen::MatrixXd>& left_gram,
                         const std::vector<Eigen::MatrixXd>& right_gram, const BlockSet& W) {
    const int D = static_cast<int>(W.size());
    BlockSet H(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d) {
        H[d] = Eigen::MatrixXd::Zero(W[d].rows(), W[d].cols());
        for (int e = 0; e < D; ++e) {
            H[d].noalias() += left_gram[d * D + e] * W[e] * right_gram[e * D + d];
        }
    }
    return H;
}

}  // namespace

double TraceNormProblem::smooth_part(const BlockSet& W) const {
    check_blocks(W);
    const BlockSet H = quadratic_terms(left_gram_, right_gram_, W);
    double g = target_sq_;
    for (int d = 0; d < blocks(); ++d) g += (W[d].cwiseProduct(H[d] - 2.0 * cross_[d])).sum();
    // The expanded form can dip a few ulps below zero near an exact fit.
    return g < 0.0 ? 0.0 : g;
}

double TraceNormProblem::smooth_part_direct(const BlockSet& W) const {
    check_blocks(W);
    Eigen::MatrixXd residual = target_;
    for (int d = 0; d < blocks(); ++d) residual.noalias() -= left_[d] * W[d] * right_[d];
    return residual.squaredNorm();
}

Eigen::MatrixXd TraceNormProblem::gradient(const BlockSet& W, int d) const {
    check_blocks(W);
    if (d < 0 || d >= blocks()) throw InputError("block index out of range");
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(W[d].rows(), W[d].cols());
    const int D = blocks();
    for (int e = 0; e < D; ++e) H.noalias() += left_gram_[d * D + e] * W[e] * right_gram_[e * D + d];
    return 2.0 * (H - cross_[d]);
}

BlockSet TraceNormProblem::gradients(const BlockSet& W) const {
    check_blocks(W);
    BlockSet H = quadratic_terms(left_gram_, right_gram_, W);
    for (int d = 0; d < blocks(); ++d) H[d] = 2.0 * (H[d] - cross_[d]);
    return H;
}

double objective(const TraceNormProblem& problem, const BlockSet& W) {
    double f = problem.smooth_part(W);
    for (const auto& block : W) {
        if (block.size() > 0) f += Eigen::JacobiSVD<Eigen::MatrixXd>(block).singularValues().sum();
    }
    return f;
}

Eigen::MatrixXd gradient_block(const TraceNormProblem& problem, const BlockSet& W, int d) {
    if (d < 1 || d > problem.blocks()) {
        throw InputError("gradient_block: block " + std::to_string(d) + " outside 1.." +
                         std::to_string(problem.blocks()));
    }
    return problem.gradient(W, d - 1);
}

SvtResult svt(const Eigen::MatrixXd& M, double tau) {
    if (!(tau >= 0.0)) throw InputError("svt: threshold must be non-negative");
    SvtResult out;
    if (M.size() == 0) {
        out.value = M;
        return out;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = (svd.singularValues().array() - tau).max(0.0).matrix();
    out.nuclear_norm = s.sum();
    out.value = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    return out;
}

Eigen::MatrixXd svt_prox(const Eigen::MatrixXd& M, double tau) {
    return svt(M, tau).value;
}

namespace {

double block_nuclear(const BlockSet& W) {
    double acc = 0.0;
    for (const auto& block : W) {
        if (block.size() > 0) acc += Eigen::JacobiSVD<Eigen::MatrixXd>(block).singularValues().sum();
    }
    return acc;
}

struct ProxStep {
    BlockSet point;
    double smooth = 0.0;
    double penalty = 0.0;
    double L = 0.0;
};

// Backtracking: grow L until the quadratic model at Y dominates g at the prox point.
ProxStep prox_step(const TraceNormProblem& problem, const BlockSet& Y, double L, double eta,
                   int iteration) {
    const BlockSet grad = problem.gradients(Y);
    const double gY = problem.smooth_part(Y);
    const double slack = 1e-13 * std::max(1.0, problem.target().squaredNorm());
    const int D = problem.blocks();
    for (int attempt = 0; attempt < 2000; ++attempt) {
        ProxStep step;
        step.L = L;
        step.point.resize(static_cast<std::size_t>(D));
        const double tau = 1.0 / (2.0 * L);
        for (int d = 0; d < D; ++d) {
            SvtResult r = svt(Y[d] - grad[d] * tau, tau);
            step.point[d] = std::move(r.value);
            step.penalty += r.nuclear_norm;
        }
        step.smooth = problem.smooth_part(step.point);
        if (!std::isfinite(step.smooth) || !std::isfinite(step.penalty)) {
            throw NumericalError("agm_minimize: non-finite objective", iteration);
        }
        double model = gY;
        double dist = 0.0;
        for (int d = 0; d < D; ++d) {
            const Eigen::MatrixXd diff = step.point[d] - Y[d];
            model += diff.cwiseProduct(grad[d]).sum();
            dist += diff.squaredNorm();
        }
        model += L * dist;
        if (step.smooth <= model + slack) return step;
        L *= eta;
        if (!std::isfinite(L) || L > 1e300) break;
    }
    throw NumericalError("agm_minimize: line search failed to find a Lipschitz bound", iteration);
}

}  // namespace

AgmState agm_minimize(const TraceNormProblem& problem, const AgmOptions& options) {
    return agm_minimize(problem, options, problem.zero_blocks());
}

AgmState agm_minimize(const TraceNormProblem& problem, const AgmOptions& options, BlockSet initial) {
    if (!(options.L0 > 0.0)) throw InputError("agm_minimize: L0 must be positive");
    if (!(options.eta > 1.0)) throw InputError("agm_minimize: eta must exceed 1");
    if (options.max_iter < 1) throw InputError("agm_minimize: max_iter must be positive");
    if (!(options.rel_tol >= 0.0)) throw InputError("agm_minimize: rel_tol must be non-negative");
    if (!(options.fixed_point_tol >= 0.0)) throw InputError("agm_minimize: fixed_point_tol must be non-negative");
    problem.check_blocks(initial);

    AgmState state;
    state.blocks = std::move(initial);
    state.search_point = state.blocks;
    state.alpha = 1.0;
    state.lipschitz = options.L0;

    double F = problem.smooth_part(state.blocks) + block_nuclear(state.blocks);
    if (!std::isfinite(F)) throw NumericalError("agm_minimize: non-finite objective at start", 0);
    state.objective_trace.push_back(F);

    BlockSet previous = state.blocks;
    bool momentum_active = false;

    for (int k = 1; k <= options.max_iter; ++k) {
        state.iteration = k;
        ProxStep step = prox_step(problem, state.search_point, state.lipschitz, options.eta, k);
        state.lipschitz = step.L;
        double F_new = step.smooth + step.penalty;

        if (F_new > F && momentum_active) {
            // Extrapolation overshot: drop the momentum and take a plain prox step from W_k.
            ++state.restarts;
            state.alpha = 1.0;
            state.search_point = state.blocks;
            step = prox_step(problem, state.search_point, state.lipschitz, options.eta, k);
            state.lipschitz = step.L;
            F_new = step.smooth + step.penalty;
        }
        if (F_new > F) {
            // Only rounding can make a plain prox step ascend; W_k is as good as we get.
            state.objective_trace.push_back(F);
            state.search_point = state.blocks;
            state.converged = true;
            break;
        }

        previous = std::move(state.blocks);
        state.blocks = std::move(step.point);
        const double alpha_next = (1.0 + std::sqrt(1.0 + 4.0 * state.alpha * state.alpha)) / 2.0;
        const double beta = (state.alpha - 1.0) / alpha_next;
        state.search_point.resize(state.blocks.size());
        for (std::size_t d = 0; d < state.blocks.size(); ++d) {
            state.search_point[d] = state.blocks[d] + beta * (state.blocks[d] - previous[d]);
        }
        momentum_active = beta != 0.0;
        state.alpha = alpha_next;
        state.objective_trace.push_back(F_new);

        const double decrease = (F - F_new) / std::max(F, 1e-300);
        F = F_new;
        if (decrease < options.rel_tol) {
            if (options.fixed_point_tol <= 0.0 ||
                prox_fixed_point_residual(problem, state.blocks, state.lipschitz) < options.fixed_point_tol) {
                state.converged = true;
                break;
            }
            // Stalled momentum rather than a minimiser: restart from W_k.
            ++state.restarts;
            state.alpha = 1.0;
            state.search_point = state.blocks;
            momentum_active = false;
        }
    }
    return state;
}

bool has_shared_left_factor(const TraceNormProblem& problem) {
    const Eigen::MatrixXd& S = problem.left(0);
    const double s2 = S.squaredNorm();
    for (int d = 1; d < problem.blocks(); ++d) {
        const Eigen::MatrixXd& L = problem.left(d);
        if (L.rows() != S.rows() || L.cols() != S.cols()) return false;
        const double c = s2 > 0.0 ? L.cwiseProduct(S).sum() / s2 : 0.0;
        if ((L - c * S).norm() > 1e-12 * std::max(L.norm(), 1e-300) && L.norm() > 0.0) return false;
    }
    return true;
}

AdmmResult admm_minimize(const TraceNormProblem& problem, const AdmmOptions& options,
                         const AdmmWarmStart* warm) {
    if (!has_shared_left_factor(problem)) {
        throw InputError("admm_minimize: left factors must be multiples of a common matrix");
    }
    if (options.max_iter < 1) throw InputError("admm_minimize: max_iter must be positive");
    if (!(options.rel_tol > 0.0)) throw InputError("admm_minimize: rel_tol must be positive");

    const int D = problem.blocks();
    const Eigen::Index rows = problem.block_rows(0);
    std::vector<Eigen::Index> offset(static_cast<std::size_t>(D + 1), 0);
    for (int d = 0; d < D; ++d) offset[d + 1] = offset[d] + problem.block_cols(d);
    const Eigen::Index N = offset[D];

    AdmmResult out;
    out.blocks = problem.zero_blocks();
    out.multiplier = problem.zero_blocks();

    // Zero is optimal iff every block gradient at zero has operator norm <= 1.
    bool zero_optimal = true;
    for (int d = 0; d < D && zero_optimal; ++d) {
        if (problem.cross(d).size() > 0) {
            zero_optimal = 2.0 * Eigen::JacobiSVD<Eigen::MatrixXd>(problem.cross(d)).singularValues()(0) <= 1.0;
        }
    }
    if (zero_optimal) {
        out.objective = objective(problem, out.blocks);
        out.converged = true;
        return out;
    }

    const Eigen::MatrixXd& S = problem.left(0);
    const double s2 = S.squaredNorm();
    std::vector<double> c(static_cast<std::size_t>(D), 1.0);
    for (int d = 1; d < D; ++d) c[d] = s2 > 0.0 ? problem.left(d).cwiseProduct(S).sum() / s2 : 0.0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> left_eig(S.transpose() * S);
    Eigen::MatrixXd G(N, N);
    for (int e = 0; e < D; ++e) {
        for (int d = 0; d < D; ++d) {
            G.block(offset[e], offset[d], problem.block_cols(e), problem.block_cols(d)) =
                c[e] * c[d] * problem.right_gram(e, d);
        }
    }
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> right_eig(G);
    if (left_eig.info() != Eigen::Success || right_eig.info() != Eigen::Success) {
        throw NumericalError("admm_minimize: eigen-decomposition failed", 0);
    }
    const Eigen::MatrixXd& P = left_eig.eigenvectors();
    const Eigen::MatrixXd& Q = right_eig.eigenvectors();
    const Eigen::ArrayXd a = left_eig.eigenvalues().cwiseMax(0.0).array();
    const Eigen::ArrayXd b = right_eig.eigenvalues().cwiseMax(0.0).array();
    const Eigen::ArrayXXd curvature = 2.0 * (a.matrix() * b.matrix().transpose()).array();  // rows x N

    Eigen::MatrixXd cross_stack(rows, N);
    for (int d = 0; d < D; ++d) cross_stack.middleCols(offset[d], problem.block_cols(d)) = problem.cross(d);
    const Eigen::MatrixXd cross_rot = P.transpose() * (2.0 * cross_stack) * Q;

    double rho = options.rho0;
    if (!(rho > 0.0)) {
        const double hmax = curvature.maxCoeff();
        const double hmin = (curvature > 1e-14 * hmax).select(curvature, hmax).minCoeff();
        rho = std::sqrt(hmax * hmin);
        if (!(rho > 0.0)) rho = 1.0;
    }

    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(rows, N);
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(rows, N);
    if (warm != nullptr) {
        problem.check_blocks(warm->primal);
        problem.check_blocks(warm->multiplier);
        if (warm->rho > 0.0) rho = warm->rho;
        for (int d = 0; d < D; ++d) {
            Y.middleCols(offset[d], problem.block_cols(d)) = warm->primal[d];
            U.middleCols(offset[d], problem.block_cols(d)) = warm->multiplier[d] / rho;
        }
    }

    Eigen::MatrixXd W(rows, N);
    const double sqrt_n = std::sqrt(static_cast<double>(rows * N));
    for (int k = 1; k <= options.max_iter; ++k) {
        out.iterations = k;
        const Eigen::MatrixXd rhs = cross_rot + rho * (P.transpose() * (Y - U) * Q);
        W.noalias() = P * (rhs.array() / (curvature + rho)).matrix() * Q.transpose();

        const Eigen::MatrixXd Y_prev = Y;
        for (int d = 0; d < D; ++d) {
            const auto cols = problem.block_cols(d);
            Y.middleCols(offset[d], cols) =
                svt(W.middleCols(offset[d], cols) + U.middleCols(offset[d], cols), 1.0 / rho).value;
        }
        U += W - Y;
        if (!W.allFinite() || !U.allFinite()) throw NumericalError("admm_minimize: non-finite iterate", k);

        const double r = (W - Y).norm();
        const double s = rho * (Y - Y_prev).norm();
        const double eps_pri = options.rel_tol * std::max(W.norm(), Y.norm());
        const double eps_dual = options.rel_tol * std::max(rho * U.norm(), sqrt_n * 1e-3);
        if (r <= eps_pri && s <= eps_dual) {
            out.converged = true;
            break;
        }
        if (options.adapt_every > 0 && k % options.adapt_every == 0) {
            // Residual balancing; the unscaled multiplier rho * U is kept fixed.
            double factor = 1.0;
            if (r > 10.0 * s) factor = 2.0;
            else if (s > 10.0 * r) factor = 0.5;
            if (factor != 1.0) {
                rho *= factor;
                U /= factor;
            }
        }
    }

    for (int d = 0; d < D; ++d) {
        out.blocks[d] = Y.middleCols(offset[d], problem.block_cols(d));
        out.multiplier[d] = rho * U.middleCols(offset[d], problem.block_cols(d));
    }
    out.rho = rho;
    out.objective = objective(problem, out.blocks);
    if (!std::isfinite(out.objective)) throw NumericalError("admm_minimize: non-finite objective", out.iterations);
    return out;
}

double prox_fixed_point_residual(const TraceNormProblem& problem, const BlockSet& W, double L) {
    if (!(L > 0.0)) throw InputError("prox_fixed_point_residual: L must be positive");
    const BlockSet grad = problem.gradients(W);
    const double tau = 1.0 / (2.0 * L);
    double worst = 0.0;
    for (std::size_t d = 0; d < W.size(); ++d) {
        const Eigen::MatrixXd p = svt_prox(W[d] - grad[d] * tau, tau);
        worst = std::max(worst, (W[d] - p).norm() / (1.0 + W[d].norm()));
    }
    return worst;
}

}  // namespace rkhsfar
