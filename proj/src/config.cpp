#include "rkhsfar/config.hpp"

#include "rkhsfar/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <type_traits>

namespace rkhsfar {

std::string to_string(Method m) {
    switch (m) {
        case Method::rkhs: return "rkhs";
        case Method::anh: return "anh";
        case Method::bosq: return "bosq";
        case Method::naive: return "naive";
        case Method::mean_zero: return "mean_zero";
        case Method::oracle: return "oracle";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    for (Method m : {Method::rkhs, Method::anh, Method::bosq, Method::naive, Method::mean_zero, Method::oracle}) {
        if (to_string(m) == name) return m;
    }
    throw InputError("unknown method '" + name + "' (expected rkhs, anh, bosq, naive, mean_zero or oracle)");
}

int ExperimentConfig::test_length() const {
    return static_cast<int>(std::lround(test_fraction * static_cast<double>(T)));
}

std::string ExperimentConfig::label() const {
    if (!setting.empty()) return setting;
    std::ostringstream os;
    os << to_string(scenario) << "_q" << q << "_n" << n << "_T" << T << "_k";
    for (std::size_t i = 0; i < kappas.size(); ++i) os << (i ? "-" : "") << kappas[i];
    return os.str();
}

void ExperimentConfig::validate() const {
    if (setting.find_first_of(",\"\n") != std::string::npos) {
        throw InputError("config: setting may not contain commas or quotes");
    }
    if (q < 1) throw InputError("config: q must be at least 1");
    if (n < 1) throw InputError("config: n must be at least 1");
    if (kappas.empty()) throw InputError("config: kappas must list at least one lag");
    if (replications < 1) throw InputError("config: replications must be at least 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InputError("config: test_fraction must lie in (0, 1)");
    if (test_length() < 1) throw InputError("config: test_fraction * T must be at least 1");
    if (T < effective_d_max() + 2) throw InputError("config: T too short for the largest order");
    if (burn_in < 0) throw InputError("config: burn_in must be non-negative");
    if (d_max < 0 || anh_d_max < 0) throw InputError("config: orders must be non-negative");
    if (folds < 2) throw InputError("config: folds must be at least 2");
    if (lambda_count < 1) throw InputError("config: lambda_count must be positive");
    for (double l : lambda_grid) {
        if (!(l > 0.0)) throw InputError("config: lambda_grid values must be positive");
    }
    if (!(noise_a > 0.0)) throw InputError("config: noise_a must be positive");
    if (!(bosq_tau > 0.0 && bosq_tau <= 1.0)) throw InputError("config: bosq_tau must lie in (0, 1]");
    if (bosq_basis < 4 || anh_basis < 4) throw InputError("config: spline basis counts must be at least 4");
    if (methods.empty()) throw InputError("config: no methods");
    for (Method m : methods) {
        if (m == Method::oracle) throw InputError("config: the oracle is always reported; do not list it");
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_number(const std::string& v, std::size_t row, std::size_t col, const std::string& key) {
    T out{};
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("config: cannot read '" + v + "' as a number for key '" + key + "'", row, col);
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(out)) throw ParseError("config: non-finite value for '" + key + "'", row, col);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::map<std::string, std::size_t> seen;
    std::istringstream in(text);
    std::string raw;
    std::size_t row = 0;
    while (std::getline(in, raw)) {
        ++row;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("config: expected 'key = value'", row, 1);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::size_t col = raw.find('=') + 2;
        if (key.empty()) throw ParseError("config: empty key", row, 1);
        if (seen.count(key)) {
            throw ParseError("config: duplicate key '" + key + "' (first on row " + std::to_string(seen[key]) + ")",
                             row, 1);
        }
        seen[key] = row;

        try {
            if (key == "setting") c.setting = value;
            else if (key == "scenario") c.scenario = scenario_from_string(value);
            else if (key == "q") c.q = parse_number<int>(value, row, col, key);
            else if (key == "n") c.n = parse_number<int>(value, row, col, key);
            else if (key == "T") c.T = parse_number<int>(value, row, col, key);
            else if (key == "kappas") {
                c.kappas.clear();
                for (const auto& v : split_list(value)) c.kappas.push_back(parse_number<double>(v, row, col, key));
            }
            else if (key == "noise_a") c.noise_a = parse_number<double>(value, row, col, key);
            else if (key == "grid") c.grid = grid_kind_from_string(value);
            else if (key == "burn_in") c.burn_in = parse_number<int>(value, row, col, key);
            else if (key == "replications") c.replications = parse_number<int>(value, row, col, key);
            else if (key == "seed") c.seed = parse_number<std::uint64_t>(value, row, col, key);
            else if (key == "methods") {
                c.methods.clear();
                for (const auto& v : split_list(value)) c.methods.push_back(method_from_string(v));
            }
            else if (key == "lambda_grid") {
                c.lambda_grid.clear();
                if (value != "auto") {
                    for (const auto& v : split_list(value)) c.lambda_grid.push_back(parse_number<double>(v, row, col, key));
                }
            }
            else if (key == "lambda_count") c.lambda_count = parse_number<int>(value, row, col, key);
            else if (key == "d_max") c.d_max = parse_number<int>(value, row, col, key);
            else if (key == "folds") c.folds = parse_number<int>(value, row, col, key);
            else if (key == "test_fraction") c.test_fraction = parse_number<double>(value, row, col, key);
            else if (key == "solver") c.solver = solver_kind_from_string(value);
            else if (key == "bosq_basis") c.bosq_basis = parse_number<int>(value, row, col, key);
            else if (key == "bosq_tau") c.bosq_tau = parse_number<double>(value, row, col, key);
            else if (key == "anh_basis") c.anh_basis = parse_number<int>(value, row, col, key);
            else if (key == "anh_d_max") c.anh_d_max = parse_number<int>(value, row, col, key);
            else throw ParseError("config: unknown key '" + key + "'", row, 1);
        } catch (const ParseError&) {
            throw;
        } catch (const InputError& e) {
            throw ParseError(std::string("config: ") + e.what(), row, col);
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading config file '" + path.string() + "'");
    return parse_config(ss.str());
}

std::string to_text(const ExperimentConfig& c) {
    std::ostringstream os;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
        return s;
    };
    os << "setting = " << c.label() << "\n";
    os << "scenario = " << to_string(c.scenario) << "\n";
    os << "q = " << c.q << "\nn = " << c.n << "\nT = " << c.T << "\n";
    os << "kappas = " << list(c.kappas) << "\n";
    os << "noise_a = " << format_double(c.noise_a) << "\n";
    os << "grid = " << to_string(c.grid) << "\n";
    os << "burn_in = " << c.burn_in << "\n";
    os << "replications = " << c.replications << "\n";
    os << "seed = " << c.seed << "\n";
    os << "methods = ";
    for (std::size_t i = 0; i < c.methods.size(); ++i) os << (i ? ", " : "") << to_string(c.methods[i]);
    os << "\n";
    os << "lambda_grid = " << (c.lambda_grid.empty() ? std::string("auto") : list(c.lambda_grid)) << "\n";
    os << "lambda_count = " << c.lambda_count << "\n";
    os << "d_max = " << c.d_max << "\n";
    os << "folds = " << c.folds << "\n";
    os << "test_fraction = " << format_double(c.test_fraction) << "\n";
    os << "solver = " << to_string(c.solver) << "\n";
    os << "bosq_basis = " << c.bosq_basis << "\n";
    os << "bosq_tau = " << format_double(c.bosq_tau) << "\n";
    os << "anh_basis = " << c.anh_basis << "\n";
    os << "anh_d_max = " << c.anh_d_max << "\n";
    return os.str();
}

}  // namespace rkhsfar
