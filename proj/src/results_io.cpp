#include "rkhsfar/results_io.hpp"

#include "rkhsfar/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace rkhsfar {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string na_or(double v) { return std::isnan(v) ? std::string("NA") : format_double(v); }
std::string na_or(int v) { return v == 0 ? std::string("NA") : std::to_string(v); }

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(line);
    while (std::getline(is, item, ',')) {
        if (!item.empty() && item.back() == '\r') item.pop_back();
        out.push_back(item);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double read_double(const std::string& s, std::size_t row, std::size_t col) {
    if (s == "NA" || s == "nan") return kNaN;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ParseError("results: bad number '" + s + "'", row, col);
    return v;
}

int read_int(const std::string& s, std::size_t row, std::size_t col) {
    if (s == "NA") return 0;
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) throw ParseError("results: bad integer '" + s + "'", row, col);
    return static_cast<int>(v);
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json nums(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

std::vector<double> nums(const json& j) {
    std::vector<double> out;
    for (const auto& x : j) out.push_back(num(x));
    return out;
}

json config_json(const ExperimentConfig& c) {
    json j = json::object();
    std::istringstream in(to_text(c));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    std::string text;
    for (const auto& [k, v] : j.items()) text += k + " = " + v.get<std::string>() + "\n";
    return parse_config(text);
}

std::string fixed(double v, int digits) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

OutputFormat output_format_from_string(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw InputError("unknown format '" + name + "' (expected csv or json)");
}

std::string results_csv(const ExperimentResult& result) {
    const int D = result.config.true_order();
    std::ostringstream os;
    os << "setting,replication,method,D_sel,p_sel,lambda_sel";
    for (int d = 1; d <= D; ++d) os << ",mise_" << d;
    os << ",pe,failed\n";
    const std::string setting = result.config.label();
    for (const auto& r : result.records) {
        os << setting << ',' << r.replication << ',' << to_string(r.method) << ',' << na_or(r.d_sel) << ','
           << na_or(r.p_sel) << ',' << na_or(r.lambda_sel);
        for (int d = 0; d < D; ++d) {
            os << ',' << na_or(static_cast<std::size_t>(d) < r.mise.size() ? r.mise[static_cast<std::size_t>(d)] : kNaN);
        }
        os << ',' << na_or(r.pe) << ',' << (r.failed ? 1 : 0) << '\n';
    }
    return os.str();
}

ParsedResultsCsv parse_results_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("results: empty file", 1, 1);
    const auto header = split_fields(line);
    const std::vector<std::string> lead{"setting", "replication", "method", "D_sel", "p_sel", "lambda_sel"};
    if (header.size() < lead.size() + 2) throw ParseError("results: header too short", 1, 1);
    for (std::size_t i = 0; i < lead.size(); ++i) {
        if (header[i] != lead[i]) throw ParseError("results: expected column '" + lead[i] + "'", 1, i + 1);
    }
    ParsedResultsCsv out;
    out.true_order = static_cast<int>(header.size() - lead.size() - 2);
    for (int d = 1; d <= out.true_order; ++d) {
        const std::size_t c = lead.size() + static_cast<std::size_t>(d) - 1;
        if (header[c] != "mise_" + std::to_string(d)) throw ParseError("results: bad MISE column", 1, c + 1);
    }
    if (header[header.size() - 2] != "pe" || header.back() != "failed") {
        throw ParseError("results: header must end with pe,failed", 1, header.size() - 1);
    }

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto f = split_fields(line);
        if (f.size() != header.size()) {
            throw ParseError("results: expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(f.size()), row, 1);
        }
        out.setting = f[0];
        MethodRecord r;
        r.replication = read_int(f[1], row, 2);
        try {
            r.method = method_from_string(f[2]);
        } catch (const InputError& e) {
            throw ParseError(e.what(), row, 3);
        }
        r.d_sel = read_int(f[3], row, 4);
        r.p_sel = read_int(f[4], row, 5);
        r.lambda_sel = read_double(f[5], row, 6);
        for (int d = 0; d < out.true_order; ++d) {
            const std::size_t c = lead.size() + static_cast<std::size_t>(d);
            r.mise.push_back(read_double(f[c], row, c + 1));
        }
        r.pe = read_double(f[f.size() - 2], row, f.size() - 1);
        r.failed = read_int(f.back(), row, f.size()) != 0;
        out.records.push_back(std::move(r));
    }
    return out;
}

std::string results_json(const ExperimentResult& result) {
    json j;
    j["config"] = config_json(result.config);
    json recs = json::array();
    for (const auto& r : result.records) {
        recs.push_back({{"replication", r.replication},
                        {"method", to_string(r.method)},
                        {"D_sel", r.d_sel == 0 ? json(nullptr) : json(r.d_sel)},
                        {"p_sel", r.p_sel == 0 ? json(nullptr) : json(r.p_sel)},
                        {"lambda_sel", num(r.lambda_sel)},
                        {"mise", nums(r.mise)},
                        {"pe", num(r.pe)},
                        {"failed", r.failed},
                        {"note", r.note}});
    }
    j["records"] = recs;
    const auto& a = result.aggregates;
    json methods = json::array();
    for (const auto& m : a.methods) {
        methods.push_back({{"method", to_string(m.method)},
                           {"runs", m.runs},
                           {"failures", m.failures},
                           {"pe_avg", num(m.pe_avg)},
                           {"pe_avg_ok", num(m.pe_avg_ok)},
                           {"mise_avg", nums(m.mise_avg)},
                           {"mise_avg_ok", nums(m.mise_avg_ok)},
                           {"d_true_pct", num(m.d_true_pct)}});
    }
    j["aggregates"] = {{"methods", methods},
                       {"r_avg", num(a.r_avg)},
                       {"r_w", num(a.r_w)},
                       {"r_avg_ok", num(a.r_avg_ok)},
                       {"r_w_ok", num(a.r_w_ok)},
                       {"oracle_pe", num(a.oracle_pe)},
                       {"mean_zero_pe", num(a.mean_zero_pe)}};
    return j.dump(2) + "\n";
}

ExperimentResult parse_results_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("results: ") + e.what(), 0, e.byte);
    }
    try {
        ExperimentResult out;
        out.config = config_from_json(j.at("config"));
        for (const auto& r : j.at("records")) {
            MethodRecord m;
            m.replication = r.at("replication").get<int>();
            m.method = method_from_string(r.at("method").get<std::string>());
            m.d_sel = r.at("D_sel").is_null() ? 0 : r.at("D_sel").get<int>();
            m.p_sel = r.at("p_sel").is_null() ? 0 : r.at("p_sel").get<int>();
            m.lambda_sel = num(r.at("lambda_sel"));
            m.mise = nums(r.at("mise"));
            m.pe = num(r.at("pe"));
            m.failed = r.at("failed").get<bool>();
            m.note = r.at("note").get<std::string>();
            out.records.push_back(std::move(m));
        }
        const auto& a = j.at("aggregates");
        for (const auto& m : a.at("methods")) {
            MethodAggregate g;
            g.method = method_from_string(m.at("method").get<std::string>());
            g.runs = m.at("runs").get<int>();
            g.failures = m.at("failures").get<int>();
            g.pe_avg = num(m.at("pe_avg"));
            g.pe_avg_ok = num(m.at("pe_avg_ok"));
            g.mise_avg = nums(m.at("mise_avg"));
            g.mise_avg_ok = nums(m.at("mise_avg_ok"));
            g.d_true_pct = num(m.at("d_true_pct"));
            out.aggregates.methods.push_back(std::move(g));
        }
        out.aggregates.r_avg = num(a.at("r_avg"));
        out.aggregates.r_w = num(a.at("r_w"));
        out.aggregates.r_avg_ok = num(a.at("r_avg_ok"));
        out.aggregates.r_w_ok = num(a.at("r_w_ok"));
        out.aggregates.oracle_pe = num(a.at("oracle_pe"));
        out.aggregates.mean_zero_pe = num(a.at("mean_zero_pe"));
        return out;
    } catch (const json::exception& e) {
        throw ParseError(std::string("results: ") + e.what(), 0, 0);
    }
}

std::string plot_csv(const ExperimentResult& result) {
    std::ostringstream os;
    os << "setting,method,replication,pe\n";
    const std::string setting = result.config.label();
    for (const auto& r : result.records) {
        if (r.failed || std::isnan(r.pe)) continue;
        os << setting << ',' << to_string(r.method) << ',' << r.replication << ',' << format_double(r.pe) << '\n';
    }
    return os.str();
}

std::string summary_table(const ExperimentResult& result, bool scale_pe_100) {
    const double s = scale_pe_100 ? 100.0 : 1.0;
    const auto& a = result.aggregates;
    const int D = result.config.true_order();
    std::ostringstream os;
    os << "setting " << result.config.label() << ", " << result.config.replications << " replications"
       << (scale_pe_100 ? ", PE x100" : "") << "\n";
    os << "method      runs  fail  PE_avg      PE_avg_ok";
    for (int d = 1; d <= D; ++d) os << "  MISE_" << d << "   ";
    os << "  D_T%\n";
    for (const auto& m : a.methods) {
        char head[64];
        std::snprintf(head, sizeof head, "%-10s  %4d  %4d", to_string(m.method).c_str(), m.runs, m.failures);
        os << head << "  " << fixed(s * m.pe_avg, 5) << "     " << fixed(s * m.pe_avg_ok, 5);
        for (double v : m.mise_avg) os << "  " << fixed(v, 5);
        os << "  " << fixed(m.d_true_pct, 0) << "\n";
    }
    os << "R_avg " << fixed(a.r_avg, 2) << "%  R_w " << fixed(a.r_w, 0) << "%  (excluding failures: "
       << fixed(a.r_avg_ok, 2) << "%, " << fixed(a.r_w_ok, 0) << "%)\n";
    os << "Oracle PE " << fixed(s * a.oracle_pe, 5) << "  Mean-Zero PE " << fixed(s * a.mean_zero_pe, 5) << "\n";
    return os.str();
}

std::string forecast_csv(const ForecastReport& report) {
    std::ostringstream os;
    os << "step,method,rmse,mae\n";
    for (const auto& m : report.methods) {
        for (Eigen::Index t = 0; t < m.rmse.size(); ++t) {
            os << t + 1 << ',' << to_string(m.method) << ',' << na_or(m.rmse(t)) << ',' << na_or(m.mae(t)) << '\n';
        }
    }
    return os.str();
}

std::string forecast_json(const ForecastReport& report) {
    json methods = json::array();
    for (const auto& m : report.methods) {
        methods.push_back({{"method", to_string(m.method)},
                           {"rmse", nums(std::vector<double>(m.rmse.data(), m.rmse.data() + m.rmse.size()))},
                           {"mae", nums(std::vector<double>(m.mae.data(), m.mae.data() + m.mae.size()))},
                           {"mean_rmse", num(m.mean_rmse)},
                           {"mean_mae", num(m.mean_mae)},
                           {"failed", m.failed},
                           {"note", m.note}});
    }
    json j = {{"methods", methods},
              {"rkhs_win_rmse", num(report.rkhs_win_rmse)},
              {"rkhs_win_mae", num(report.rkhs_win_mae)}};
    return j.dump(2) + "\n";
}

std::string forecast_summary(const ForecastReport& report) {
    std::ostringstream os;
    os << "method      mean_RMSE   mean_MAE\n";
    for (const auto& m : report.methods) {
        char head[32];
        std::snprintf(head, sizeof head, "%-10s", to_string(m.method).c_str());
        os << head << "  " << fixed(m.mean_rmse, 6) << "  " << fixed(m.mean_mae, 6)
           << (m.failed ? "  failed: " + m.note : std::string()) << "\n";
    }
    os << "RKHS best on " << fixed(report.rkhs_win_rmse, 1) << "% of steps by RMSE, " << fixed(report.rkhs_win_mae, 1)
       << "% by MAE\n";
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return ss.str();
}

}  // namespace rkhsfar
