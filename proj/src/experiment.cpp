#include "rkhsfar/experiment.hpp"

#include "rkhsfar/errors.hpp"
#include "rkhsfar/metrics.hpp"
#include "rkhsfar/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <thread>

namespace rkhsfar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed streams; each replication draws from its own counter-derived seeds.
constexpr std::uint64_t kTruthStream = 1;
constexpr std::uint64_t kSimStream = 2;

struct Predictor {
    int order = 0;
    int d_sel = 0;
    int p_sel = 0;
    double lambda_sel = kNaN;
    std::function<Eigen::VectorXd(const Eigen::MatrixXd&)> predict;
    std::function<double(const FarGroundTruth&, int)> mise;  // may be empty
};

Predictor make_rkhs(const SampledSeries& train, int d_max, const std::vector<double>& grid_in, int lambda_count,
                    int folds, const FitOptions& fit_options) {
    const std::vector<double> grid = grid_in.empty() ? default_lambda_grid(train, d_max, lambda_count) : grid_in;
    CvOptions cv;
    cv.folds = folds;
    cv.fit = fit_options;
    const TuningChoice choice = cross_validate(train, d_max, grid, KernelSpec{}, cv);
    auto est = std::make_shared<OperatorEstimate>(fit(train, choice.order, choice.lambdas, KernelSpec{}, fit_options));
    Predictor p;
    p.order = choice.order;
    p.d_sel = choice.order;
    p.lambda_sel = choice.lambdas.front();
    p.predict = [est](const Eigen::MatrixXd& h) { return predict_next(*est, h); };
    p.mise = [est](const FarGroundTruth& truth, int d) {
        return d <= est->order() ? mise(*est, truth, d) : 1.0;
    };
    return p;
}

Predictor make_baseline(BaselineFit fitted) {
    auto f = std::make_shared<BaselineFit>(std::move(fitted));
    Predictor p;
    p.order = f->order;
    p.d_sel = f->order;
    p.p_sel = f->p;
    p.predict = [f](const Eigen::MatrixXd& h) { return baseline_predict(*f, h); };
    p.mise = [f](const FarGroundTruth& truth, int d) {
        return d <= f->order ? baseline_mise(*f, truth, d) : 1.0;
    };
    return p;
}

Predictor make_naive() {
    Predictor p;
    p.order = 1;
    p.d_sel = 1;
    p.predict = [](const Eigen::MatrixXd& h) -> Eigen::VectorXd { return h.row(h.rows() - 1).transpose(); };
    return p;
}

Predictor make_mean_zero() {
    Predictor p;
    p.order = 1;
    p.predict = [](const Eigen::MatrixXd& h) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(h.cols()); };
    p.mise = [](const FarGroundTruth&, int) { return 1.0; };
    return p;
}

// One-step predictions for rows first..first+count-1 of `values`, from the actual preceding rows.
Eigen::MatrixXd roll(const Predictor& p, const Eigen::MatrixXd& values, Eigen::Index first, Eigen::Index count) {
    if (first < p.order) throw InputError("not enough history before the test window");
    Eigen::MatrixXd out(count, values.cols());
    for (Eigen::Index j = 0; j < count; ++j) {
        const Eigen::Index t = first + j;
        out.row(j) = p.predict(values.middleRows(t - p.order, p.order)).transpose();
    }
    return out;
}

bool lag_has_mass(const FarGroundTruth& truth, int d) {
    return truth.lags[static_cast<std::size_t>(d - 1)].squaredNorm() > 0.0;
}

std::vector<MethodRecord> run_replication(const ExperimentConfig& c, int rep) {
    const int D = c.true_order();
    const int T_test = c.test_length();
    const ReplicationData data = simulate_replication(c, rep);
    const FarGroundTruth& truth = data.truth;
    const SimOutput& sim = data.sim;
    const SampledSeries& train = data.train;
    const Eigen::MatrixXd& actual = data.test;

    // Oracle: conditional mean under the true lags, computed in score space.
    const Eigen::MatrixXd U = eval_cosine_basis(truth.basis, sim.series.grid.points());
    Eigen::MatrixXd oracle_pred(T_test, c.n);
    for (int j = 0; j < T_test; ++j) {
        const Eigen::Index t = c.T + j;
        oracle_pred.row(j) = (U * propagate_scores(truth, sim.scores.middleRows(t - D, D))).transpose();
    }
    const double mean_zero_pe = prediction_error(Eigen::MatrixXd::Zero(T_test, c.n), actual);

    std::vector<Method> methods = c.methods;
    for (Method m : {Method::mean_zero, Method::oracle}) {
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
    }
    std::sort(methods.begin(), methods.end());

    FitOptions fit_options;
    fit_options.solver = c.solver;

    std::vector<MethodRecord> out;
    for (Method m : methods) {
        MethodRecord r;
        r.replication = rep;
        r.method = m;
        r.lambda_sel = kNaN;
        r.mise.assign(static_cast<std::size_t>(D), kNaN);
        if (m == Method::oracle) {
            r.d_sel = D;
            r.pe = prediction_error(oracle_pred, actual);
            for (int d = 1; d <= D; ++d) {
                if (lag_has_mass(truth, d)) r.mise[static_cast<std::size_t>(d - 1)] = 0.0;
            }
            out.push_back(std::move(r));
            continue;
        }
        try {
            Predictor p;
            switch (m) {
                case Method::rkhs:
                    p = make_rkhs(train, c.effective_d_max(), c.lambda_grid, c.lambda_count, c.folds, fit_options);
                    break;
                case Method::anh: p = make_baseline(anh_fit(train, c.effective_anh_d_max(), c.anh_basis)); break;
                case Method::bosq: p = make_baseline(bosq_fit(train, D, c.bosq_tau, c.bosq_basis)); break;
                case Method::naive: p = make_naive(); break;
                case Method::mean_zero: p = make_mean_zero(); break;
                case Method::oracle: break;
            }
            r.d_sel = p.d_sel;
            r.p_sel = p.p_sel;
            r.lambda_sel = p.lambda_sel;
            r.pe = prediction_error(roll(p, sim.series.values, c.T, T_test), actual);
            if (p.mise) {
                for (int d = 1; d <= D; ++d) {
                    if (lag_has_mass(truth, d)) r.mise[static_cast<std::size_t>(d - 1)] = p.mise(truth, d);
                }
            }
            if (!std::isfinite(r.pe)) {
                r.failed = true;
                r.note = "non-finite prediction error";
            } else if (m != Method::mean_zero && r.pe > kFailurePeRatio * mean_zero_pe) {
                r.failed = true;
                r.note = "prediction error above " + format_double(kFailurePeRatio) + "x the mean-zero error";
            }
        } catch (const NumericalError& e) {
            r.failed = true;
            r.pe = kNaN;
            r.note = e.what();
        }
        out.push_back(std::move(r));
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

ReplicationData simulate_replication(const ExperimentConfig& c, int replication) {
    if (replication < 0) throw InputError("replication index must be non-negative");
    const auto truth_index = c.scenario == Scenario::A ? 0u : static_cast<std::uint64_t>(replication);
    ReplicationData out;
    out.truth = make_scenario(c.scenario, c.q, c.true_order(), c.kappas, derive_seed(c.seed, kTruthStream, truth_index));
    if (out.truth.noise.kind == NoiseKind::uniform) out.truth.noise.half_width = c.noise_a;
    out.sim = simulate(out.truth, c.T + c.test_length(), c.n, c.grid, c.burn_in,
                       derive_seed(c.seed, kSimStream, static_cast<std::uint64_t>(replication)));
    out.train = out.sim.series.slice(0, c.T);
    out.test = out.sim.series.values.bottomRows(c.test_length());
    return out;
}

const MethodAggregate* ExperimentAggregates::find(Method m) const {
    for (const auto& a : methods) {
        if (a.method == m) return &a;
    }
    return nullptr;
}

ExperimentAggregates aggregate(const std::vector<MethodRecord>& records, int true_order) {
    ExperimentAggregates agg;
    std::vector<Method> present;
    for (const auto& r : records) {
        if (std::find(present.begin(), present.end(), r.method) == present.end()) present.push_back(r.method);
    }
    std::sort(present.begin(), present.end());

    for (Method m : present) {
        MethodAggregate a;
        a.method = m;
        std::vector<double> pe, pe_ok;
        std::vector<std::vector<double>> mise(static_cast<std::size_t>(true_order)), mise_ok(mise.size());
        int selected_true = 0, selectable = 0;
        for (const auto& r : records) {
            if (r.method != m) continue;
            ++a.runs;
            if (r.failed) ++a.failures;
            if (std::isfinite(r.pe)) pe.push_back(r.pe);
            if (!r.failed && std::isfinite(r.pe)) pe_ok.push_back(r.pe);
            for (std::size_t d = 0; d < mise.size() && d < r.mise.size(); ++d) {
                if (std::isfinite(r.mise[d])) {
                    mise[d].push_back(r.mise[d]);
                    if (!r.failed) mise_ok[d].push_back(r.mise[d]);
                }
            }
            if (r.d_sel > 0) {
                ++selectable;
                if (r.d_sel == true_order) ++selected_true;
            }
        }
        a.pe_avg = mean_of(pe);
        a.pe_avg_ok = mean_of(pe_ok);
        for (std::size_t d = 0; d < mise.size(); ++d) {
            a.mise_avg.push_back(mean_of(mise[d]));
            a.mise_avg_ok.push_back(mean_of(mise_ok[d]));
        }
        a.d_true_pct = selectable > 0 ? 100.0 * selected_true / selectable : kNaN;
        agg.methods.push_back(std::move(a));
    }

    // Pair RKHS and ANH by replication.
    std::vector<double> ratio, ratio_ok;
    int wins = 0, wins_ok = 0;
    for (const auto& r : records) {
        if (r.method != Method::rkhs) continue;
        for (const auto& s : records) {
            if (s.method != Method::anh || s.replication != r.replication) continue;
            if (std::isfinite(r.pe) && std::isfinite(s.pe) && r.pe > 0.0) {
                ratio.push_back((s.pe / r.pe - 1.0) * 100.0);
                if (r.pe < s.pe) ++wins;
                if (!r.failed && !s.failed) {
                    ratio_ok.push_back(ratio.back());
                    if (r.pe < s.pe) ++wins_ok;
                }
            }
        }
    }
    agg.r_avg = mean_of(ratio);
    agg.r_w = ratio.empty() ? kNaN : 100.0 * wins / static_cast<double>(ratio.size());
    agg.r_avg_ok = mean_of(ratio_ok);
    agg.r_w_ok = ratio_ok.empty() ? kNaN : 100.0 * wins_ok / static_cast<double>(ratio_ok.size());
    const MethodAggregate* oracle = agg.find(Method::oracle);
    const MethodAggregate* zero = agg.find(Method::mean_zero);
    agg.oracle_pe = oracle ? oracle->pe_avg : kNaN;
    agg.mean_zero_pe = zero ? zero->pe_avg : kNaN;
    return agg;
}

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
    config.validate();
    if (threads < 1) throw InputError("threads must be at least 1");
    const int R = config.replications;
    std::vector<std::vector<MethodRecord>> per_rep(static_cast<std::size_t>(R));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(R));
    std::atomic<int> next{0};

    auto worker = [&]() {
        for (int i = next++; i < R; i = next++) {
            try {
                per_rep[static_cast<std::size_t>(i)] = run_replication(config, i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int workers = std::min(threads, R);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    ExperimentResult result;
    result.config = config;
    for (auto& recs : per_rep) {
        for (auto& r : recs) result.records.push_back(std::move(r));
    }
    result.aggregates = aggregate(result.records, config.true_order());
    return result;
}

ForecastReport forecast_eval(const SampledSeries& train, const SampledSeries& test,
                             const std::vector<Method>& methods, const ForecastOptions& options) {
    if (!(train.grid == test.grid)) throw InputError("forecast_eval: train and test grids differ");
    if (test.length() == 0) throw InputError("forecast_eval: empty test set");
    if (methods.empty()) throw InputError("forecast_eval: no methods");

    SampledSeries all(train.grid, Eigen::MatrixXd(train.length() + test.length(), train.values.cols()));
    all.values << train.values, test.values;
    Eigen::Index train_len = train.length();
    if (options.difference) {
        all = difference(all);
        train_len -= 1;
    }
    const Eigen::Index T_test = test.length();
    const SampledSeries fit_on = all.slice(0, train_len);
    const Eigen::MatrixXd actual = all.values.bottomRows(T_test);

    ForecastReport report;
    for (Method m : methods) {
        ForecastMethodReport r;
        r.method = m;
        try {
            Predictor p;
            switch (m) {
                case Method::rkhs:
                    p = make_rkhs(fit_on, options.d_max, options.lambda_grid, kLambdaGridCount, options.folds, options.fit);
                    break;
                case Method::anh: p = make_baseline(anh_fit(fit_on, options.anh_d_max, options.anh_basis)); break;
                case Method::bosq:
                    p = make_baseline(bosq_fit(fit_on, options.bosq_order, options.bosq_tau, options.bosq_basis));
                    break;
                case Method::naive: p = make_naive(); break;
                case Method::mean_zero: p = make_mean_zero(); break;
                case Method::oracle: throw InputError("forecast_eval: no oracle is available for observed data");
            }
            const StepErrors e = step_errors(roll(p, all.values, train_len, T_test), actual);
            r.rmse = e.rmse;
            r.mae = e.mae;
            r.mean_rmse = e.rmse.mean();
            r.mean_mae = e.mae.mean();
        } catch (const NumericalError& e) {
            r.failed = true;
            r.note = e.what();
            r.rmse = Eigen::VectorXd::Constant(T_test, kNaN);
            r.mae = r.rmse;
            r.mean_rmse = r.mean_mae = kNaN;
        }
        report.methods.push_back(std::move(r));
    }

    report.rkhs_win_rmse = report.rkhs_win_mae = kNaN;
    const ForecastMethodReport* rkhs = nullptr;
    for (const auto& r : report.methods) {
        if (r.method == Method::rkhs && !r.failed) rkhs = &r;
    }
    if (rkhs != nullptr && report.methods.size() > 1) {
        int win_rmse = 0, win_mae = 0;
        for (Eigen::Index t = 0; t < T_test; ++t) {
            bool best_rmse = true, best_mae = true;
            for (const auto& r : report.methods) {
                if (&r == rkhs || r.failed) continue;
                if (!(rkhs->rmse(t) < r.rmse(t))) best_rmse = false;
                if (!(rkhs->mae(t) < r.mae(t))) best_mae = false;
            }
            win_rmse += best_rmse;
            win_mae += best_mae;
        }
        report.rkhs_win_rmse = 100.0 * win_rmse / static_cast<double>(T_test);
        report.rkhs_win_mae = 100.0 * win_mae / static_cast<double>(T_test);
    }
    return report;
}

}  // namespace rkhsfar
