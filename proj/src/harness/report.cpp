#include "mfmil/harness/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfmil::harness {

using nlohmann::json;

namespace {

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string opt_or_dash(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "-"; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::string reports_to_csv(const std::vector<VariabilityReport>& reports) {
  std::ostringstream out;
  out << "arch,method,M,K,T,Ep,min,max,mean,std\n";
  for (const auto& r : reports) {
    out << r.arch << ',' << r.method << ',' << r.m << ',' << opt_or_dash(r.k) << ',' << opt_or_dash(r.t) << ','
        << r.epochs_spent << ',';
    if (r.test_aucs.empty()) {
      out << "nan,nan,nan,nan\n";
    } else {
      out << fixed1(r.stats.min) << ',' << fixed1(r.stats.max) << ',' << fixed1(r.stats.mean) << ','
          << fixed1(r.stats.std) << '\n';
    }
  }
  return out.str();
}

std::vector<CsvReportRow> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "arch,method,M,K,T,Ep,min,max,mean,std") {
    throw std::invalid_argument("report CSV: unexpected header");
  }
  std::vector<CsvReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) throw std::invalid_argument("report CSV: expected 10 columns");
    rows.push_back(CsvReportRow{f[0], f[1], f[2], f[3], f[4], f[5], std::stod(f[6]), std::stod(f[7]),
                                std::stod(f[8]), std::stod(f[9])});
  }
  return rows;
}

json reports_to_json(const std::vector<VariabilityReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    json failed = json::array();
    for (const auto& f : r.failed) failed.push_back({{"seed", f.seed}, {"error", f.error}});
    json j = {{"arch", r.arch},
              {"method", r.method},
              {"method_id", std::string(pipeline::to_string(r.method_id))},
              {"M", r.m},
              {"K", r.k ? json(*r.k) : json(nullptr)},
              {"T", r.t ? json(*r.t) : json(nullptr)},
              {"Ep", r.epochs_spent},
              {"auc_scale", "x100"},
              {"seeds", r.seeds},
              {"test_auc", r.test_aucs},
              {"val_auc", r.val_aucs},
              {"epochs_executed", r.epochs_executed},
              {"failed", failed}};
    if (!r.test_aucs.empty()) {
      j["min"] = r.stats.min;
      j["max"] = r.stats.max;
      j["mean"] = r.stats.mean;
      j["std"] = r.stats.std;
      j["std_defined"] = r.stats.std_defined;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<VariabilityReport> reports_from_json(const json& arr) {
  std::vector<VariabilityReport> reports;
  for (const auto& j : arr) {
    VariabilityReport r;
    r.arch = j.at("arch").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.method_id = pipeline::parse_method(j.at("method_id").get<std::string>());
    r.m = j.at("M").get<std::size_t>();
    if (!j.at("K").is_null()) r.k = j.at("K").get<std::size_t>();
    if (!j.at("T").is_null()) r.t = j.at("T").get<std::size_t>();
    r.epochs_spent = j.at("Ep").get<std::size_t>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    r.test_aucs = j.at("test_auc").get<std::vector<double>>();
    r.val_aucs = j.at("val_auc").get<std::vector<double>>();
    r.epochs_executed = j.value("epochs_executed", std::vector<std::size_t>{});
    for (const auto& f : j.at("failed")) r.failed.push_back(FailedCell{f.at("seed").get<std::uint64_t>(), f.at("error").get<std::string>()});
    if (!r.test_aucs.empty()) r.stats = metrics::variability(r.test_aucs);
    reports.push_back(std::move(r));
  }
  return reports;
}

void emit_report(const std::vector<VariabilityReport>& reports, ReportFormat format, const std::filesystem::path& path) {
  if (reports.empty()) throw std::invalid_argument("emit_report: no reports to write");
  const std::string text = format == ReportFormat::Csv ? reports_to_csv(reports) : reports_to_json(reports).dump(2) + "\n";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string ablation_curves_to_csv(const std::vector<AblationCurve>& curves) {
  std::ostringstream out;
  out << "arch,merge,T,mean_val,mean_test\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.top_t.size(); ++i) {
      out << c.arch << ',' << merging::to_string(c.merge) << ',' << c.top_t[i] << ',' << fixed1(c.mean_val_auc[i])
          << ',' << fixed1(c.mean_test_auc[i]) << '\n';
    }
  }
  return out.str();
}

std::string ablation_grid_to_csv(const std::vector<AblationGridCell>& grid) {
  std::ostringstream out;
  out << "T,K,init,mean_val,mean_test,seeds\n";
  for (const auto& g : grid) {
    out << g.top_t << ',' << g.k << ',' << milmodels::to_string(g.init) << ',' << fixed1(g.mean_val_auc) << ','
        << fixed1(g.mean_test_auc) << ',' << g.seeds << '\n';
  }
  return out.str();
}

}  // namespace mfmil::harness
