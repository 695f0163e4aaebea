#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfmil/harness/plan.hpp"
#include "mfmil/metrics/variability.hpp"

namespace mfmil::harness {

struct FailedCell {
  std::uint64_t seed = 0;
  std::string error;
};

/// One (architecture, method) row over all init seeds.
struct VariabilityReport {
  std::string arch;
  std::string method;  // display label, e.g. "Soup3"
  pipeline::Method method_id = pipeline::Method::Baseline;
  std::size_t m = 1;
  std::optional<std::size_t> k;
  std::optional<std::size_t> t;
  std::size_t epochs_spent = 0;  // per seed, the method's Ep
  std::vector<std::uint64_t> seeds;   // successful seeds, aligned with the AUC arrays
  std::vector<double> test_aucs;      // AUC x 100
  std::vector<double> val_aucs;       // AUC x 100
  std::vector<std::size_t> epochs_executed;  // measured per seed; shared cells report the shared count
  metrics::VariabilityStats stats;
  std::vector<FailedCell> failed;

  bool complete() const { return failed.empty(); }
};

/// Cross product architecture x method x seed on one dataset. Ensemble and
/// Best on VAL share one population of full runs per (architecture, seed).
/// A failing cell is recorded in its report and the rest proceed.
std::vector<VariabilityReport> run_benchmark(const BenchmarkPlan& plan, const dataio::BagDataset& data);

/// Fills the M/K/T/Ep columns of a report for a method under cfg.
void describe_method(VariabilityReport& report, pipeline::Method method, const pipeline::PipelineConfig& cfg);

struct AblationCurve {
  std::string arch;
  merging::MergeMethod merge = merging::MergeMethod::Soup;
  std::vector<std::size_t> top_t;
  std::vector<double> mean_test_auc;  // AUC x 100, averaged over seeds
  std::vector<double> mean_val_auc;
};

/// Merges the top-T of M fully trained runs (K = full_epochs, selected by
/// final-epoch validation AUC) for every T in the sweep, without further
/// training, and averages test AUC over seeds. One curve per
/// (architecture, merge method).
std::vector<AblationCurve> run_ablation_T(const BenchmarkPlan& plan, const dataio::BagDataset& data);

struct AblationGridCell {
  std::size_t top_t = 0;
  std::size_t k = 0;
  milmodels::InitStrategy init = milmodels::InitStrategy::Xavier;
  double mean_val_auc = 0.0;   // AUC x 100
  double mean_test_auc = 0.0;  // AUC x 100
  std::size_t seeds = 0;
};

/// Soup fusion over K x init x T for the plan's first architecture. Partial
/// runs are shared between the T values of one (K, init, seed).
std::vector<AblationGridCell> run_ablation_grid(const BenchmarkPlan& plan, const dataio::BagDataset& data);

}  // namespace mfmil::harness
