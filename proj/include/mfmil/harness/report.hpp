#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfmil/harness/benchmark.hpp"

namespace mfmil::harness {

enum class ReportFormat { Csv, Json };

/// CSV: arch,method,M,K,T,Ep,min,max,mean,std with AUC x 100 at one
/// decimal; "-" marks a column that does not apply to the method.
std::string reports_to_csv(const std::vector<VariabilityReport>& reports);

/// One row of a report CSV as parsed back from text.
struct CsvReportRow {
  std::string arch;
  std::string method;
  std::string m, k, t, ep;
  double min = 0.0, max = 0.0, mean = 0.0, std = 0.0;
};
std::vector<CsvReportRow> parse_report_csv(const std::string& text);

/// Full-precision JSON, including per-seed AUC arrays and failed cells.
nlohmann::json reports_to_json(const std::vector<VariabilityReport>& reports);
std::vector<VariabilityReport> reports_from_json(const nlohmann::json& j);

/// Writes reports in the chosen format. Throws std::invalid_argument on an
/// empty list (nothing is written) and std::runtime_error if the path
/// cannot be written.
void emit_report(const std::vector<VariabilityReport>& reports, ReportFormat format, const std::filesystem::path& path);

std::string ablation_curves_to_csv(const std::vector<AblationCurve>& curves);
std::string ablation_grid_to_csv(const std::vector<AblationGridCell>& grid);

}  // namespace mfmil::harness
