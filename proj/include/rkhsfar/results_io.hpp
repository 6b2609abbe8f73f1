#pragma once

#include "rkhsfar/experiment.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rkhsfar {

enum class OutputFormat { csv, json };

std::string to_string(OutputFormat f);
OutputFormat output_format_from_string(const std::string& name);

/// One row per record. Columns, in order:
///
///   setting, replication, method, D_sel, p_sel, lambda_sel, mise_1 .. mise_D, pe, failed
///
/// D is the true order. Values that do not apply are written as NA; doubles use 17
/// significant digits so that reading the file back is exact.
std::string results_csv(const ExperimentResult& result);

struct ParsedResultsCsv {
    std::string setting;
    int true_order = 0;
    std::vector<MethodRecord> records;
};

/// Inverse of results_csv (the failure note is not part of the CSV).
ParsedResultsCsv parse_results_csv(const std::string& text);

/// Config echo, every record, and the aggregates. NaN becomes null.
std::string results_json(const ExperimentResult& result);
ExperimentResult parse_results_json(const std::string& text);

/// Boxplot input: setting, method, replication, pe. Failed runs are omitted.
std::string plot_csv(const ExperimentResult& result);

/// Human-readable aggregate table; `scale_pe_100` multiplies PE columns by 100 for display.
std::string summary_table(const ExperimentResult& result, bool scale_pe_100);

/// Per-step table: step, method, rmse, mae.
std::string forecast_csv(const ForecastReport& report);
std::string forecast_json(const ForecastReport& report);
std::string forecast_summary(const ForecastReport& report);

/// Throws IoError naming the path.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace rkhsfar
