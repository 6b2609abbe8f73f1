#include "rkhsfar/baselines.hpp"
#include "rkhsfar/config.hpp"
#include "rkhsfar/errors.hpp"
#include "rkhsfar/experiment.hpp"
#include "rkhsfar/model_io.hpp"
#include "rkhsfar/results_io.hpp"
#include "rkhsfar/rkhs_estimator.hpp"
#include "rkhsfar/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace rkhsfar;

namespace {

enum ExitCode { kOk = 0, kInput = 1, kNumerical = 2, kIo = 3 };

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_text(out, text);
    }
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& n : names) out.push_back(method_from_string(n));
    return out;
}

struct SimulateArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string scores_out;
    std::string scenario = "A";
    int q = 6;
    int n = 20;
    int T = 100;
    std::vector<double> kappas{0.5};
    double noise_a = 0.1;
    std::string grid = "midpoint";
    int burn_in = kDefaultBurnIn;
};

int run_simulate(const SimulateArgs& a) {
    ExperimentConfig c;
    if (!a.config.empty()) {
        c = load_config(a.config);
    } else {
        c.scenario = scenario_from_string(a.scenario);
        c.q = a.q;
        c.n = a.n;
        c.T = a.T;
        c.kappas = a.kappas;
        c.noise_a = a.noise_a;
        c.grid = grid_kind_from_string(a.grid);
        c.burn_in = a.burn_in;
        c.validate();
    }
    if (a.seed) c.seed = *a.seed;
    FarGroundTruth truth = make_scenario(c.scenario, c.q, c.true_order(), c.kappas, c.seed);
    if (truth.noise.kind == NoiseKind::uniform) truth.noise.half_width = c.noise_a;
    const SimOutput sim = simulate(truth, c.T, c.n, c.grid, c.burn_in, c.seed);
    emit(to_csv(sim.series), a.out);
    if (!a.scores_out.empty()) {
        std::string text;
        for (Eigen::Index t = 0; t < sim.scores.rows(); ++t) {
            for (Eigen::Index i = 0; i < sim.scores.cols(); ++i) text += (i ? "," : "") + format_double(sim.scores(t, i));
            text += "\n";
        }
        write_text(a.scores_out, text);
    }
    std::cerr << "companion spectral radius " << sim.spectral_radius << "\n";
    return kOk;
}

struct FitArgs {
    std::string series;
    std::string method = "rkhs";
    int d_max = 1;
    std::vector<double> lambdas;
    int folds = 5;
    std::string solver = "admm+agm";
    int basis = kDefaultBaselineBasis;
    double tau = 0.8;
    std::string model_out;
    std::string out;
};

int run_fit(const FitArgs& a) {
    const SampledSeries series = load_csv(a.series);
    const Method method = method_from_string(a.method);
    nlohmann::json diag;
    diag["method"] = to_string(method);
    FittedModel model;
    if (method == Method::rkhs) {
        FitOptions fo;
        fo.solver = solver_kind_from_string(a.solver);
        CvOptions cv;
        cv.folds = a.folds;
        cv.fit = fo;
        const std::vector<double> grid = a.lambdas.empty() ? default_lambda_grid(series, a.d_max) : a.lambdas;
        const TuningChoice choice = cross_validate(series, a.d_max, grid, KernelSpec{}, cv);
        const OperatorEstimate est = fit(series, choice.order, choice.lambdas, KernelSpec{}, fo);
        diag["D_sel"] = choice.order;
        diag["lambda_sel"] = choice.lambdas.front();
        nlohmann::json table = nlohmann::json::array();
        for (const auto& cell : choice.cv_table) {
            table.push_back({{"D", cell.order},
                             {"lambda", cell.lambda},
                             {"score", cell.failed ? nlohmann::json(nullptr) : nlohmann::json(cell.score)},
                             {"failed", cell.failed}});
        }
        diag["cv_table"] = table;
        const auto& r = est.report;
        diag["solver"] = {{"kind", to_string(r.solver)},
                          {"iterations", r.iterations},
                          {"restarts", r.restarts},
                          {"admm_iterations", r.admm_iterations},
                          {"admm_converged", r.admm_converged},
                          {"objective", r.objective},
                          {"objective_at_zero", r.objective_at_zero},
                          {"converged", r.converged}};
        std::vector<double> norms;
        for (const auto& R : est.coeff) norms.push_back(operator_nuclear_norm(R, est.design.factor));
        diag["operator_trace_norms"] = norms;
        model = model_from_estimate(est);
    } else if (method == Method::anh || method == Method::bosq) {
        const BaselineFit f = method == Method::anh ? anh_fit(series, a.d_max, a.basis)
                                                    : bosq_fit(series, a.d_max, a.tau, a.basis);
        diag["D_sel"] = f.order;
        diag["p_sel"] = f.p;
        if (method == Method::anh) {
            diag["criterion"] = f.criterion;
            nlohmann::json cands = nlohmann::json::array();
            for (const auto& c : f.candidates) {
                cands.push_back({{"p", c.p},
                                 {"D", c.order},
                                 {"fFPE", c.failed ? nlohmann::json(nullptr) : nlohmann::json(c.criterion)},
                                 {"failed", c.failed},
                                 {"reason", c.reason}});
            }
            diag["candidates"] = cands;
        }
        diag["eigenvalues"] = std::vector<double>(f.fpca.eigenvalues.data(),
                                                  f.fpca.eigenvalues.data() + std::min<Eigen::Index>(
                                                      f.fpca.eigenvalues.size(), f.fpca.max_components()));
        model = model_from_baseline(f);
    } else if (method == Method::naive) {
        model = naive_model(series.grid);
        diag["D_sel"] = 1;
    } else {
        throw InputError("fit: method must be rkhs, anh, bosq or naive");
    }
    if (!a.model_out.empty()) save_model(model, a.model_out);
    emit(diag.dump(2) + "\n", a.out);
    return kOk;
}

struct PredictArgs {
    std::string model;
    std::string history;
    std::string out;
};

int run_predict(const PredictArgs& a) {
    const FittedModel model = load_model(a.model);
    const SampledSeries history = load_csv(a.history);
    if (!(history.grid == model.grid)) throw InputError("predict: history grid differs from the model grid");
    const Eigen::VectorXd next = predict_next(model, history.values);
    emit(to_csv(SampledSeries(model.grid, next.transpose())), a.out);
    return kOk;
}

struct BenchArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string plot_out;
    std::string format = "csv";
    int threads = 1;
    bool scale_pe_100 = false;
};

int run_bench(const BenchArgs& a) {
    ExperimentConfig c = load_config(a.config);
    if (a.seed) c.seed = *a.seed;
    const OutputFormat fmt = output_format_from_string(a.format);
    const ExperimentResult result = run_experiment(c, a.threads);
    emit(fmt == OutputFormat::csv ? results_csv(result) : results_json(result), a.out);
    if (!a.plot_out.empty()) write_text(a.plot_out, plot_csv(result));
    std::cerr << summary_table(result, a.scale_pe_100);
    return kOk;
}

struct ForecastArgs {
    std::string train;
    std::string test;
    std::vector<std::string> methods{"rkhs", "anh", "bosq", "naive"};
    int d_max = 1;
    int anh_d_max = 1;
    int bosq_order = 1;
    int folds = 5;
    bool difference = false;
    std::string format = "csv";
    std::string out;
};

int run_forecast(const ForecastArgs& a) {
    const SampledSeries train = load_csv(a.train);
    const SampledSeries test = load_csv(a.test);
    ForecastOptions o;
    o.d_max = a.d_max;
    o.anh_d_max = a.anh_d_max;
    o.bosq_order = a.bosq_order;
    o.folds = a.folds;
    o.difference = a.difference;
    const OutputFormat fmt = output_format_from_string(a.format);
    const ForecastReport report = forecast_eval(train, test, parse_methods(a.methods), o);
    emit(fmt == OutputFormat::csv ? forecast_csv(report) : forecast_json(report), a.out);
    std::cerr << forecast_summary(report);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional autoregression in an RKHS: simulation, fitting and benchmarks"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate a functional series and write it as CSV");
    s->add_option("--config", sim.config, "Experiment config supplying the scenario");
    s->add_option("--seed", sim.seed, "Random seed");
    s->add_option("--out", sim.out, "Output CSV (stdout if omitted)");
    s->add_option("--scores-out", sim.scores_out, "Also write the basis scores");
    s->add_option("--scenario", sim.scenario, "A, B, Ca or Cb");
    s->add_option("--q", sim.q, "Basis size");
    s->add_option("--n", sim.n, "Grid size");
    s->add_option("--T", sim.T, "Series length");
    s->add_option("--kappas", sim.kappas, "Lag scales")->delimiter(',');
    s->add_option("--noise-a", sim.noise_a, "Uniform noise half-width");
    s->add_option("--grid", sim.grid, "midpoint or uniform_random");
    s->add_option("--burn-in", sim.burn_in, "Discarded initial steps");

    FitArgs fa;
    auto* f = app.add_subcommand("fit", "Fit one method to a series CSV and report diagnostics");
    f->add_option("--series", fa.series, "Series CSV")->required();
    f->add_option("--method", fa.method, "rkhs, anh, bosq or naive");
    f->add_option("--d-max", fa.d_max, "Largest order (rkhs, anh) or the order (bosq)");
    f->add_option("--lambdas", fa.lambdas, "Lambda grid (default: automatic)")->delimiter(',');
    f->add_option("--folds", fa.folds, "Cross-validation folds");
    f->add_option("--solver", fa.solver, "agm or admm+agm");
    f->add_option("--basis", fa.basis, "Spline basis count (baselines)");
    f->add_option("--tau", fa.tau, "Explained-variance threshold (bosq)");
    f->add_option("--model-out", fa.model_out, "Write the fitted model as JSON");
    f->add_option("--out", fa.out, "Diagnostics output (stdout if omitted)");

    PredictArgs pa;
    auto* p = app.add_subcommand("predict", "One-step forecast from a fitted model file");
    p->add_option("--model", pa.model, "Model JSON from fit")->required();
    p->add_option("--history", pa.history, "Series CSV; the last rows are the inputs")->required();
    p->add_option("--out", pa.out, "Output CSV (stdout if omitted)");

    BenchArgs ba;
    auto* b = app.add_subcommand("bench", "Run a simulation experiment");
    b->add_option("--config", ba.config, "Experiment config")->required();
    b->add_option("--seed", ba.seed, "Override the config seed");
    b->add_option("--out", ba.out, "Per-replication results (stdout if omitted)");
    b->add_option("--plot-out", ba.plot_out, "Boxplot-ready PE CSV");
    b->add_option("--format", ba.format, "csv or json");
    b->add_option("--threads", ba.threads, "Worker threads")->check(CLI::PositiveNumber);
    b->add_flag("--scale-pe-100", ba.scale_pe_100, "Show PE x100 in the summary");

    ForecastArgs fe;
    auto* e = app.add_subcommand("forecast-eval", "Train/test one-step forecast evaluation");
    e->add_option("--train", fe.train, "Training series CSV")->required();
    e->add_option("--test", fe.test, "Test series CSV")->required();
    e->add_option("--methods", fe.methods, "Methods to compare")->delimiter(',');
    e->add_option("--d-max", fe.d_max, "Largest RKHS order");
    e->add_option("--anh-d-max", fe.anh_d_max, "Largest ANH order");
    e->add_option("--bosq-order", fe.bosq_order, "Bosq order");
    e->add_option("--folds", fe.folds, "Cross-validation folds");
    e->add_flag("--difference", fe.difference, "Forecast first differences");
    e->add_option("--format", fe.format, "csv or json");
    e->add_option("--out", fe.out, "Per-step table (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kInput;
    }

    try {
        if (*s) return run_simulate(sim);
        if (*f) return run_fit(fa);
        if (*p) return run_predict(pa);
        if (*b) return run_bench(ba);
        if (*e) return run_forecast(fe);
    } catch (const NumericalError& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return kNumerical;
    } catch (const IoError& ex) {
        std::cerr << "I/O error: " << ex.what() << "\n";
        return kIo;
    } catch (const ParseError& ex) {
        std::cerr << "input error: " << ex.what() << "\n";
        return kInput;
    } catch (const InputError& ex) {
        std::cerr << "input error: " << ex.what() << "\n";
        return kInput;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kNumerical;
    }
    return kOk;
}
