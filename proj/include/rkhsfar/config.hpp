#pragma once

#include "rkhsfar/rkhs_estimator.hpp"
#include "rkhsfar/series.hpp"
#include "rkhsfar/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rkhsfar {

enum class Method { rkhs, anh, bosq, naive, mean_zero, oracle };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

/// One simulation setting. Text form is one `key = value` per line, `#` starts a comment,
/// lists are comma separated:
///
///   scenario = A            # A, B, Ca, Cb (A2, B2, C2a, C2b accepted)
///   q = 12
///   n = 20
///   T = 400                 # training length
///   kappas = 0.8            # one value per lag; the true order is their count
///   replications = 10
///   seed = 1
///   methods = rkhs, anh, bosq, naive, mean_zero
///
/// Optional keys and defaults: setting (derived label), noise_a = 0.1, grid = midpoint
/// (or uniform_random), burn_in = 200, test_fraction = 0.2, lambda_grid = auto,
/// lambda_count = 11, d_max = true order, folds = 5, solver = admm+agm, bosq_basis = 10,
/// bosq_tau = 0.8, anh_basis = 10, anh_d_max = d_max.
struct ExperimentConfig {
    std::string setting;
    Scenario scenario = Scenario::A;
    int q = 6;
    int n = 20;
    int T = 100;
    std::vector<double> kappas{0.5};
    double noise_a = 0.1;
    GridKind grid = GridKind::midpoint_equispaced;
    int burn_in = kDefaultBurnIn;
    int replications = 10;
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::rkhs, Method::anh, Method::bosq};
    std::vector<double> lambda_grid;  ///< empty: default_lambda_grid per replication
    int lambda_count = kLambdaGridCount;
    int d_max = 0;                    ///< 0: the true order
    int folds = 5;
    double test_fraction = 0.2;
    SolverKind solver = SolverKind::admm_agm;
    int bosq_basis = 10;
    double bosq_tau = 0.8;
    int anh_basis = 10;
    int anh_d_max = 0;                ///< 0: d_max

    int true_order() const noexcept { return static_cast<int>(kappas.size()); }
    int effective_d_max() const noexcept { return d_max > 0 ? d_max : true_order(); }
    int effective_anh_d_max() const noexcept { return anh_d_max > 0 ? anh_d_max : effective_d_max(); }
    int test_length() const;
    std::string label() const;

    /// Throws InputError on inconsistent values.
    void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& config);

}  // namespace rkhsfar
