#pragma once

#include <Eigen/Dense>

#include <vector>

namespace rkhsfar {

using BlockSet = std::vector<Eigen::MatrixXd>;

/// min over W_1..W_D of  ||X - sum_d K_d W_d Z_d||_F^2 + sum_d ||W_d||_*.
///
/// Construction validates the shapes and caches the n x n cross products
/// X Z_d^T and Z_d Z_e^T, so objective and gradient evaluations cost O(D^2 n^3)
/// independently of the number of columns of X.
class TraceNormProblem {
public:
    TraceNormProblem(Eigen::MatrixXd target, std::vector<Eigen::MatrixXd> left_factors,
                     std::vector<Eigen::MatrixXd> right_factors);

    int blocks() const noexcept { return static_cast<int>(left_.size()); }
    /// Rows and columns of block d (0-based).
    Eigen::Index block_rows(int d) const { return left_[d].cols(); }
    Eigen::Index block_cols(int d) const { return right_[d].rows(); }

    const Eigen::MatrixXd& target() const noexcept { return target_; }
    const Eigen::MatrixXd& left(int d) const { return left_[d]; }
    const Eigen::MatrixXd& right(int d) const { return right_[d]; }

    /// All-zero starting point with the right block shapes.
    BlockSet zero_blocks() const;

    /// g(W) = ||X - sum_d K_d W_d Z_d||_F^2 from the cached products.
    double smooth_part(const BlockSet& W) const;
    /// Same quantity computed directly from X, K_d and Z_d.
    double smooth_part_direct(const BlockSet& W) const;

    /// -2 K_d^T (X - sum_e K_e W_e Z_e) Z_d^T for block d (0-based).
    Eigen::MatrixXd gradient(const BlockSet& W, int d) const;
    BlockSet gradients(const BlockSet& W) const;

    void check_blocks(const BlockSet& W) const;

    /// Cached products (0-based blocks): K_d^T K_e, Z_d Z_e^T and K_d^T X Z_d^T.
    const Eigen::MatrixXd& left_gram(int d, int e) const { return left_gram_[d * blocks() + e]; }
    const Eigen::MatrixXd& right_gram(int d, int e) const { return right_gram_[d * blocks() + e]; }
    const Eigen::MatrixXd& cross(int d) const { return cross_[d]; }

private:
    Eigen::MatrixXd target_;
    std::vector<Eigen::MatrixXd> left_;
    std::vector<Eigen::MatrixXd> right_;

    double target_sq_ = 0.0;
    std::vector<Eigen::MatrixXd> left_gram_;    // K_d^T K_e, row-major d * D + e
    std::vector<Eigen::MatrixXd> right_gram_;   // Z_d Z_e^T
    std::vector<Eigen::MatrixXd> cross_;        // K_d^T X Z_d^T
};

/// Full objective g(W) + sum_d ||W_d||_*.
double objective(const TraceNormProblem& problem, const BlockSet& W);

/// Component-wise smooth gradient; d is 1-based to match the lag index.
Eigen::MatrixXd gradient_block(const TraceNormProblem& problem, const BlockSet& W, int d);

struct SvtResult {
    Eigen::MatrixXd value;
    double nuclear_norm = 0.0;  ///< of `value`
};

/// Singular value soft-thresholding U max(S - tau, 0) V^T, the prox of tau ||.||_*.
SvtResult svt(const Eigen::MatrixXd& M, double tau);
Eigen::MatrixXd svt_prox(const Eigen::MatrixXd& M, double tau);

struct AgmOptions {
    double L0 = 1.0;
    double eta = 2.0;
    int max_iter = 5000;
    double rel_tol = 1e-8;
    /// A small relative decrease only ends the run once the prox-gradient fixed-point
    /// residual at the iterate is below this too (0 disables the check).
    double fixed_point_tol = 1e-6;
};

struct AgmState {
    BlockSet blocks;
    BlockSet search_point;
    double alpha = 1.0;
    double lipschitz = 1.0;
    int iteration = 0;
    int restarts = 0;
    bool converged = false;
    std::vector<double> objective_trace;  ///< F(W_0), F(W_1), ...
};

/// Accelerated proximal gradient (Nesterov extrapolation, backtracking on L) for the
/// problem above. The local model at the search point Y is
///   g(Y) + <W - Y, grad g(Y)> + L ||W - Y||_F^2 + ||W||_*,
/// minimised blockwise by svt(Y_d - grad_d / (2L), 1 / (2L)).
///
/// The momentum is reset whenever an extrapolated step would raise the objective, and
/// the step is retaken from the last iterate; the trace is therefore non-increasing.
/// Stops on (F_{k-1} - F_k) / F_{k-1} < rel_tol (confirmed by the fixed-point residual)
/// or after max_iter iterations.
AgmState agm_minimize(const TraceNormProblem& problem, const AgmOptions& options = {});
AgmState agm_minimize(const TraceNormProblem& problem, const AgmOptions& options,
                      BlockSet initial);

struct AdmmOptions {
    double rho0 = 0.0;       ///< initial penalty parameter; <= 0 picks one from the problem scale
    int max_iter = 2000;
    double rel_tol = 1e-6;   ///< on primal and dual residuals, relative to the iterate norms
    int adapt_every = 10;    ///< residual-balancing period (0 disables)
};

/// Starting point for admm_minimize: primal blocks and the unscaled multiplier.
struct AdmmWarmStart {
    BlockSet primal;
    BlockSet multiplier;
    double rho = 0.0;
};

struct AdmmResult {
    BlockSet blocks;       ///< the thresholded (low-rank) iterate
    BlockSet multiplier;   ///< rho * scaled dual
    double rho = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// True when every left factor is a scalar multiple of the first one, which is what
/// admm_minimize needs to solve its linear step exactly.
bool has_shared_left_factor(const TraceNormProblem& problem);

/// ADMM on the split W = Y: the W-step solves the quadratic model exactly in the
/// eigenbases of the shared left Gram matrix and the stacked right Gram matrix, the
/// Y-step is svt(W + U, 1/rho). Unlike the gradient scheme its progress does not
/// degrade with the conditioning of the smooth part. Requires has_shared_left_factor.
AdmmResult admm_minimize(const TraceNormProblem& problem, const AdmmOptions& options = {},
                         const AdmmWarmStart* warm = nullptr);

/// max over d of ||W_d - svt(W_d - grad_d / (2L), 1/(2L))||_F / (1 + ||W_d||_F).
double prox_fixed_point_residual(const TraceNormProblem& problem, const BlockSet& W, double L);

}  // namespace rkhsfar
