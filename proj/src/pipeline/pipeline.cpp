#include "mfmil/pipeline/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>

#include "mfmil/metrics/auc.hpp"
#include "mfmil/numkit/rng.hpp"
#include "mfmil/pipeline/parallel.hpp"

namespace mfmil::pipeline {

using numkit::ParamSet;
using training::RunRecord;
using training::TrainConfig;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Baseline: return "baseline";
    case Method::LRTuned: return "lr";
    case Method::Soup: return "soup";
    case Method::Ties: return "ties";
    case Method::Ensemble: return "ensemble";
    case Method::BestOnVal: return "bestval";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "baseline") return Method::Baseline;
  if (n == "lr" || n == "lrtuned" || n == "lr_tuned") return Method::LRTuned;
  if (n == "soup") return Method::Soup;
  if (n == "ties") return Method::Ties;
  if (n == "ensemble") return Method::Ensemble;
  if (n == "bestval" || n == "bestonval" || n == "best_on_val") return Method::BestOnVal;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string method_label(Method method, std::size_t top_t) {
  switch (method) {
    case Method::Baseline: return "Baseline";
    case Method::LRTuned: return "LR tuned";
    case Method::Soup: return "Soup" + std::to_string(top_t);
    case Method::Ties: return "Ties" + std::to_string(top_t);
    case Method::Ensemble: return "Ensemble";
    case Method::BestOnVal: return "Best on VAL";
  }
  return "?";
}

void PipelineConfig::validate() const {
  model.validate();
  base.validate();
  merge.validate();
  if (num_runs < 1) throw std::invalid_argument("pipeline: M must be >= 1");
  if (partial_epochs < 1) throw std::invalid_argument("pipeline: K must be >= 1");
  if (top_t < 1 || top_t > num_runs) throw std::invalid_argument("pipeline: T must lie in [1, M]");
  if (full_epochs < 1) throw std::invalid_argument("pipeline: full_epochs must be >= 1");
  for (double lr : lr_grid) {
    if (!(lr > 0.0)) throw std::invalid_argument("pipeline: learning rates must be positive");
  }
}

std::size_t PipelineConfig::epoch_budget(Method method) const {
  switch (method) {
    case Method::Baseline: return full_epochs;
    case Method::LRTuned: return lr_grid.size() * full_epochs;
    case Method::Soup:
    case Method::Ties: return num_runs * partial_epochs + full_epochs;
    case Method::Ensemble:
    case Method::BestOnVal: return num_runs * full_epochs;
  }
  return 0;
}

RunSummary summarize(std::string label, std::uint64_t shuffle_seed, double lr, const RunRecord& run) {
  return RunSummary{std::move(label),   shuffle_seed,     lr,
                    run.epochs_spent,   run.val_auc_per_epoch.back(),
                    run.best_val_auc,   run.best_epoch,   run.test_auc_at_best};
}

ParamSet shared_init(const PipelineConfig& cfg, std::uint64_t init_seed) {
  TrainConfig tc = cfg.base;
  tc.init_seed = init_seed;
  return training::initial_params(cfg.model, tc);
}

std::uint64_t derived_seed(std::uint64_t init_seed, std::string_view label) {
  return numkit::RngStream(init_seed).split(label).seed();
}

std::vector<RunRecord> train_population(const PipelineConfig& cfg, const dataio::BagDataset& data,
                                        const ParamSet& init, std::uint64_t init_seed, std::size_t epochs,
                                        const training::TrainHooks& hooks) {
  std::vector<RunRecord> runs(cfg.num_runs);
  const auto splits = data.splits();
  parallel_for(cfg.num_runs, cfg.workers, [&](std::size_t m) {
    TrainConfig tc = cfg.base;
    tc.epochs = epochs;
    tc.init_seed = init_seed;
    tc.shuffle_seed = derived_seed(init_seed, "shuffle-" + std::to_string(m + 1));
    runs[m] = training::train(cfg.model, tc, &init, splits, hooks);
  });
  return runs;
}

std::vector<std::size_t> select_top(std::span<const double> scores, std::size_t t) {
  if (t > scores.size()) throw std::invalid_argument("select_top: T exceeds the number of candidates");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(t);
  return order;
}

std::vector<MethodResult> run_fusion_multi(const PipelineConfig& cfg, const dataio::BagDataset& data,
                                           std::uint64_t init_seed, std::span<const std::size_t> top_ts,
                                           const training::TrainHooks& hooks) {
  cfg.validate();
  for (std::size_t t : top_ts) {
    if (t < 1 || t > cfg.num_runs) throw std::invalid_argument("fusion: T must lie in [1, M]");
  }
  const ParamSet init = shared_init(cfg, init_seed);
  const auto partial = train_population(cfg, data, init, init_seed, cfg.partial_epochs, hooks);

  std::vector<double> epoch_k_auc(partial.size());
  std::vector<RunSummary> partial_detail;
  for (std::size_t m = 0; m < partial.size(); ++m) {
    epoch_k_auc[m] = partial[m].val_auc_per_epoch.back();
    partial_detail.push_back(summarize("partial-" + std::to_string(m + 1),
                                       derived_seed(init_seed, "shuffle-" + std::to_string(m + 1)),
                                       cfg.base.lr_max, partial[m]));
  }

  std::vector<MethodResult> results(top_ts.size());
  parallel_for(top_ts.size(), cfg.workers, [&](std::size_t i) {
    const std::size_t t = top_ts[i];
    MethodResult& res = results[i];
    res.method = cfg.merge.method == merging::MergeMethod::Soup ? Method::Soup : Method::Ties;
    res.label = method_label(res.method, t);
    res.selected = select_top(epoch_k_auc, t);

    std::vector<ParamSet> chosen;
    for (std::size_t idx : res.selected) chosen.push_back(partial[idx].final_params);
    const ParamSet merged = merging::merge(init, chosen, cfg.merge);

    TrainConfig tc = cfg.base;
    tc.epochs = cfg.full_epochs;
    tc.init_seed = init_seed;
    tc.shuffle_seed = derived_seed(init_seed, "shuffle-merged");
    RunRecord full = training::train(cfg.model, tc, &merged, data.splits(), hooks);

    res.detail = partial_detail;
    res.detail.push_back(summarize("merged", tc.shuffle_seed, tc.lr_max, full));
    res.test_auc = full.test_auc_at_best;
    res.val_auc = full.best_val_auc;
    res.epochs_spent = cfg.num_runs * cfg.partial_epochs + full.epochs_spent;
    res.params = std::move(full.best_params);
  });
  return results;
}

MethodResult run_fusion(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                        const training::TrainHooks& hooks) {
  const std::size_t t[] = {cfg.top_t};
  return std::move(run_fusion_multi(cfg, data, init_seed, t, hooks).front());
}

MethodResult run_baseline(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                          const training::TrainHooks& hooks) {
  cfg.validate();
  const ParamSet init = shared_init(cfg, init_seed);
  TrainConfig tc = cfg.base;
  tc.epochs = cfg.full_epochs;
  tc.init_seed = init_seed;
  tc.shuffle_seed = derived_seed(init_seed, "shuffle-baseline");
  RunRecord run = training::train(cfg.model, tc, &init, data.splits(), hooks);

  MethodResult res;
  res.method = Method::Baseline;
  res.label = method_label(res.method, cfg.top_t);
  res.test_auc = run.test_auc_at_best;
  res.val_auc = run.best_val_auc;
  res.epochs_spent = run.epochs_spent;
  res.detail.push_back(summarize("baseline", tc.shuffle_seed, tc.lr_max, run));
  res.params = std::move(run.best_params);
  return res;
}

MethodResult run_lr_tuned(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                          const training::TrainHooks& hooks) {
  cfg.validate();
  if (cfg.lr_grid.empty()) throw std::invalid_argument("lr tuning: empty learning-rate grid");
  MethodResult res;
  res.method = Method::LRTuned;
  res.label = method_label(res.method, cfg.top_t);
  if (cfg.lr_grid.size() != kDefaultLrGrid.size()) {
    res.warnings.push_back("learning-rate grid has " + std::to_string(cfg.lr_grid.size()) +
                           " values instead of 6; epoch accounting uses the actual count");
  }

  const ParamSet init = shared_init(cfg, init_seed);
  const std::uint64_t shuffle = derived_seed(init_seed, "shuffle-baseline");
  std::vector<RunRecord> runs(cfg.lr_grid.size());
  parallel_for(runs.size(), cfg.workers, [&](std::size_t i) {
    TrainConfig tc = cfg.base;
    tc.lr_max = cfg.lr_grid[i];
    tc.lr_min = std::min(tc.lr_min, tc.lr_max);
    tc.epochs = cfg.full_epochs;
    tc.init_seed = init_seed;
    tc.shuffle_seed = shuffle;
    runs[i] = training::train(cfg.model, tc, &init, data.splits(), hooks);
  });

  // Best validation AUC; ties go to the smaller learning rate, then grid order.
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const double a = runs[i].best_val_auc;
    const double b = runs[best].best_val_auc;
    if (a > b || (a == b && cfg.lr_grid[i] < cfg.lr_grid[best])) best = i;
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    res.detail.push_back(summarize("lr-" + std::to_string(i + 1), shuffle, cfg.lr_grid[i], runs[i]));
    res.epochs_spent += runs[i].epochs_spent;
  }
  res.selected = {best};
  res.test_auc = runs[best].test_auc_at_best;
  res.val_auc = runs[best].best_val_auc;
  res.params = std::move(runs[best].best_params);
  return res;
}

std::vector<RunRecord> full_population(const PipelineConfig& cfg, const dataio::BagDataset& data,
                                       std::uint64_t init_seed, const training::TrainHooks& hooks) {
  cfg.validate();
  const ParamSet init = shared_init(cfg, init_seed);
  return train_population(cfg, data, init, init_seed, cfg.full_epochs, hooks);
}

namespace {

std::vector<RunSummary> population_detail(const PipelineConfig& cfg, std::uint64_t init_seed,
                                          const std::vector<RunRecord>& runs) {
  std::vector<RunSummary> detail;
  for (std::size_t m = 0; m < runs.size(); ++m) {
    detail.push_back(summarize("run-" + std::to_string(m + 1),
                               derived_seed(init_seed, "shuffle-" + std::to_string(m + 1)), cfg.base.lr_max, runs[m]));
  }
  return detail;
}

std::size_t total_epochs(const std::vector<RunRecord>& runs) {
  std::size_t n = 0;
  for (const auto& r : runs) n += r.epochs_spent;
  return n;
}

}  // namespace

MethodResult ensemble_from(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                           const std::vector<RunRecord>& runs) {
  if (runs.empty()) throw std::invalid_argument("ensemble: no runs");
  const std::size_t n = data.test.size();
  const std::size_t c = cfg.model.num_classes;
  std::vector<numkit::Matrix> member_probs;
  for (const auto& run : runs) member_probs.push_back(training::predict_all(cfg.model, run.best_params, data.test));

  // Per entry: min + sum(x - min) / R in sorted order, so identical members
  // reproduce their probabilities exactly.
  numkit::Matrix mean(n, c);
  std::vector<double> column(runs.size());
  for (std::size_t i = 0; i < n * c; ++i) {
    for (std::size_t r = 0; r < runs.size(); ++r) column[r] = member_probs[r].data[i];
    std::sort(column.begin(), column.end());
    double offset = 0.0;
    for (double v : column) offset += v - column.front();
    mean.data[i] = column.front() + offset / static_cast<double>(runs.size());
  }

  MethodResult res;
  res.method = Method::Ensemble;
  res.label = method_label(res.method, cfg.top_t);
  res.test_auc = metrics::auc_from_probabilities(mean, training::labels_of(data.test));
  double val_sum = 0.0;
  for (const auto& run : runs) val_sum += run.best_val_auc;
  res.val_auc = val_sum / static_cast<double>(runs.size());
  res.epochs_spent = total_epochs(runs);
  res.detail = population_detail(cfg, init_seed, runs);
  return res;
}

MethodResult best_on_val_from(const PipelineConfig& cfg, std::uint64_t init_seed, const std::vector<RunRecord>& runs) {
  if (runs.empty()) throw std::invalid_argument("best on val: no runs");
  std::size_t best = 0;
  for (std::size_t m = 1; m < runs.size(); ++m) {
    if (runs[m].best_val_auc > runs[best].best_val_auc) best = m;
  }
  MethodResult res;
  res.method = Method::BestOnVal;
  res.label = method_label(res.method, cfg.top_t);
  res.selected = {best};
  res.test_auc = runs[best].test_auc_at_best;
  res.val_auc = runs[best].best_val_auc;
  res.epochs_spent = total_epochs(runs);
  res.detail = population_detail(cfg, init_seed, runs);
  res.params = runs[best].best_params;
  return res;
}

MethodResult run_ensemble(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                          const training::TrainHooks& hooks) {
  return ensemble_from(cfg, data, init_seed, full_population(cfg, data, init_seed, hooks));
}

MethodResult run_best_on_val(const PipelineConfig& cfg, const dataio::BagDataset& data, std::uint64_t init_seed,
                             const training::TrainHooks& hooks) {
  return best_on_val_from(cfg, init_seed, full_population(cfg, data, init_seed, hooks));
}

MethodResult run_method(Method method, const PipelineConfig& cfg, const dataio::BagDataset& data,
                        std::uint64_t init_seed, const training::TrainHooks& hooks) {
  switch (method) {
    case Method::Baseline: return run_baseline(cfg, data, init_seed, hooks);
    case Method::LRTuned: return run_lr_tuned(cfg, data, init_seed, hooks);
    case Method::Soup:
    case Method::Ties: {
      PipelineConfig c = cfg;
      c.merge.method = method == Method::Soup ? merging::MergeMethod::Soup : merging::MergeMethod::Ties;
      return run_fusion(c, data, init_seed, hooks);
    }
    case Method::Ensemble: return run_ensemble(cfg, data, init_seed, hooks);
    case Method::BestOnVal: return run_best_on_val(cfg, data, init_seed, hooks);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace mfmil::pipeline
