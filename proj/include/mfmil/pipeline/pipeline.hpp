#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfmil/dataio/dataset.hpp"
#include "mfmil/merging/merge.hpp"
#include "mfmil/milmodels/model.hpp"
#include "mfmil/training/trainer.hpp"

namespace mfmil::pipeline {

enum class Method { Baseline, LRTuned, Soup, Ties, Ensemble, BestOnVal };

std::string_view to_string(Method method);
/// Accepts baseline | lr | soup | ties | ensemble | bestval.
Method parse_method(std::string_view name);
/// Display label, e.g. "Soup3" for Soup with T = 3.
std::string method_label(Method method, std::size_t top_t);

inline const std::vector<double> kDefaultLrGrid{3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2};

struct PipelineConfig {
  milmodels::ModelSpec model;
  training::TrainConfig base;  // lr_max, weight decay, init strategy; seeds are set per method
  std::size_t num_runs = 10;       // M
  std::size_t partial_epochs = 5;  // K
  std::size_t top_t = 3;           // T
  std::size_t full_epochs = 100;
  merging::MergeConfig merge;
  std::vector<double> lr_grid = kDefaultLrGrid;
  std::size_t workers = 1;

  void validate() const;
  /// Epochs a method trains in total for one init seed.
  std::size_t epoch_budget(Method method) const;
};

/// Per-run summary kept in MethodResult::detail.
struct RunSummary {
  std::string label;
  std::uint64_t shuffle_seed = 0;
  double lr = 0.0;
  std::size_t epochs = 0;
  double val_auc_last = 0.0;
  double best_val_auc = 0.0;
  std::size_t best_epoch = 0;
  double test_auc_at_best = 0.0;
};

RunSummary summarize(std::string label, std::uint64_t shuffle_seed, double lr, const training::RunRecord& run);

struct MethodResult {
  Method method = Method::Baseline;
  std::string label;
  double test_auc = 0.0;
  double val_auc = 0.0;  // validation AUC of the reported model
  std::size_t epochs_spent = 0;
  std::vector<RunSummary> detail;
  std::vector<std::size_t> selected;  // run indices chosen by selection (fusion, LR grid, best-on-val)
  std::vector<std::string> warnings;
  numkit::ParamSet params;  // reported model (empty for Ensemble)
};

/// The shared initialization for one init seed.
numkit::ParamSet shared_init(const PipelineConfig& cfg, std::uint64_t init_seed);

/// Shuffle seed of RngStream(init_seed).split(label).
std::uint64_t derived_seed(std::uint64_t init_seed, std::string_view label);

/// M runs from one initialization, run m (1-based) shuffling with
/// derived_seed(init_seed, "shuffle-m"). Order-independent; fanned out
/// over cfg.workers threads.
std::vector<training::RunRecord> train_population(const PipelineConfig& cfg, const dataio::BagDataset& data,
                                                  const numkit::ParamSet& init, std::uint64_t init_seed,
                                                  std::size_t epochs, const training::TrainHooks& hooks = {});

/// Indices of the T largest scores, highest first; equal scores keep the
/// lower index first.
std::vector<std::size_t> select_top(std::span<const double> scores, std::size_t t);

/// Multi-fidelity fusion: M partial runs of K epochs from one init, top-T by
/// epoch-K validation AUC, merge their epoch-K weights, then train the merged
/// model for full_epochs with shuffle seed derived_seed(init_seed, "shuffle-merged").
MethodResult run_fusion(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                        const training::TrainHooks& hooks = {});

/// Fusion for several T values sharing one partial-run population.
/// epochs_spent of each result counts the shared M*K once plus its own full phase.
std::vector<MethodResult> run_fusion_multi(const PipelineConfig& cfg, const dataio::BagDataset& data,
                                           std::uint64_t init_seed, std::span<const std::size_t> top_ts,
                                           const training::TrainHooks& hooks = {});

/// One full_epochs run with shuffle seed derived_seed(init_seed, "shuffle-baseline").
MethodResult run_baseline(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                          const training::TrainHooks& hooks = {});

/// Baseline repeated over cfg.lr_grid; the best validation AUC wins, ties
/// going to the lower learning rate.
MethodResult run_lr_tuned(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                          const training::TrainHooks& hooks = {});

/// M fully trained runs (train_population with full_epochs).
std::vector<training::RunRecord> full_population(const PipelineConfig& cfg, const dataio::BagDataset& data,
                                                 std::uint64_t init_seed, const training::TrainHooks& hooks = {});

/// Test AUC of the mean softmax probabilities of the runs' best checkpoints.
MethodResult ensemble_from(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                           const std::vector<training::RunRecord>& runs);
/// Test AUC of the run with the highest best_val_auc (lower index on ties).
MethodResult best_on_val_from(const PipelineConfig& cfg, std::uint64_t init_seed,
                              const std::vector<training::RunRecord>& runs);

MethodResult run_ensemble(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                          const training::TrainHooks& hooks = {});
MethodResult run_best_on_val(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                             const training::TrainHooks& hooks = {});

/// Dispatch by method.
MethodResult run_method(Method method, const PipelineConfig& cfg, const dataio::BagDataset& data,
                        std::uint64_t init_seed, const training::TrainHooks& hooks = {});

}  // namespace mfmil::pipeline
