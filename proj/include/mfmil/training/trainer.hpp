#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mfmil/milmodels/bag.hpp"
#include "mfmil/milmodels/model.hpp"
#include "mfmil/numkit/param_set.hpp"

namespace mfmil::training {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double lr_max = 1e-3;
  double lr_min = 0.0;
  std::size_t epochs = 100;
  double weight_decay = 1e-5;
  std::uint64_t init_seed = 0;
  std::uint64_t shuffle_seed = 0;
  milmodels::InitStrategy init_strategy = milmodels::InitStrategy::Xavier;
  milmodels::InitOptions init_options{};
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

/// lr_min + (lr_max - lr_min) * (1 + cos(pi t / T)) / 2, for 0 <= t <= T.
double cosine_lr(std::size_t t, std::size_t total, double lr_max, double lr_min);

struct AdamState {
  numkit::ParamSet first_moment;
  numkit::ParamSet second_moment;

  static AdamState zeros_like(const numkit::ParamSet& params);
};

/// One Adam update with L2-coupled weight decay (g = grad + wd * theta),
/// bias-corrected for the 1-based step count.
void adam_step(numkit::ParamSet& params, const numkit::ParamSet& grad, AdamState& state, double lr,
               const TrainConfig& cfg, std::size_t step);

struct EpochStats {
  std::size_t epoch = 0;
  double lr = 0.0;
  double mean_train_loss = 0.0;
  double val_auc = 0.0;
};

struct RunRecord {
  std::vector<double> val_auc_per_epoch;
  std::size_t best_epoch = 0;
  double best_val_auc = 0.0;
  double test_auc_at_best = 0.0;
  numkit::ParamSet final_params;
  numkit::ParamSet best_params;
  std::size_t epochs_spent = 0;
  std::size_t optimizer_steps = 0;
  std::vector<EpochStats> trace;
};

struct DataSplits {
  std::span<const milmodels::Bag> train;
  std::span<const milmodels::Bag> val;
  std::span<const milmodels::Bag> test;
};

/// Thread-safe tally of executed training epochs.
class EpochCounter {
 public:
  void add(std::size_t n) { count_.fetch_add(n, std::memory_order_relaxed); }
  std::size_t value() const { return count_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::size_t> count_{0};
};

struct TrainHooks {
  EpochCounter* epoch_counter = nullptr;
  /// Called before each optimizer step with (epoch, bag).
  std::function<void(std::size_t, const milmodels::Bag&)> on_step;
};

/// Initialization used when train() receives no start parameters:
/// init_params(spec, cfg.init_strategy, RngStream(cfg.init_seed).split("init")).
numkit::ParamSet initial_params(const milmodels::ModelSpec& spec, const TrainConfig& cfg);

/// Batch-size-one training. Each epoch draws a fresh permutation of the
/// training bags from the shuffle stream RngStream(cfg.shuffle_seed), takes
/// one Adam step per bag at lr = cosine_lr(epoch, cfg.epochs, lr_max, lr_min),
/// then records validation AUC. best_params is snapshotted whenever the
/// validation AUC strictly improves; test AUC is evaluated once from it.
RunRecord train(const milmodels::ModelSpec& spec, const TrainConfig& cfg, const numkit::ParamSet* start_params,
                const DataSplits& data, const TrainHooks& hooks = {});

/// n x C matrix of softmax probabilities, one row per bag.
numkit::Matrix predict_all(const milmodels::ModelSpec& spec, const numkit::ParamSet& params,
                           std::span<const milmodels::Bag> bags);

std::vector<std::size_t> labels_of(std::span<const milmodels::Bag> bags);

/// Bag-level AUC of the model on a bag set.
double evaluate_auc(const milmodels::ModelSpec& spec, const numkit::ParamSet& params,
                    std::span<const milmodels::Bag> bags);

/// CSV with header epoch,lr,mean_train_loss,val_auc.
void write_trace_csv(const std::filesystem::path& path, const RunRecord& record);

}  // namespace mfmil::training
