#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mfmil/metrics/auc.hpp"
#include "mfmil/pipeline/parallel.hpp"
#include "mfmil/pipeline/pipeline.hpp"

using namespace mfmil;
using namespace mfmil::pipeline;
using milmodels::Arch;
using numkit::ParamSet;

namespace {

const dataio::BagDataset& small_data() {
  static const dataio::BagDataset ds = [] {
    dataio::SynthConfig s;
    s.d = 4;
    s.train_counts = {8, 8};
    s.val_counts = {5, 5};
    s.test_counts = {6, 6};
    s.bag_size_min = 3;
    s.bag_size_max = 6;
    s.witness_rate = 0.3;
    s.separation = 1.5;
    s.data_seed = 17;
    return dataio::generate(s);
  }();
  return ds;
}

PipelineConfig small_cfg(Arch arch = Arch::MaxMIL) {
  PipelineConfig cfg;
  cfg.model = milmodels::ModelSpec{arch, 4, 3, 2};
  cfg.base.lr_max = 1e-2;
  cfg.num_runs = 4;
  cfg.partial_epochs = 2;
  cfg.top_t = 2;
  cfg.full_epochs = 3;
  cfg.lr_grid = {1e-3, 1e-2};
  return cfg;
}

std::size_t counted_epochs(Method m, const PipelineConfig& cfg) {
  training::EpochCounter counter;
  run_method(m, cfg, small_data(), 5, training::TrainHooks{&counter, {}});
  return counter.value();
}

}  // namespace

TEST_CASE("epoch ledger at the reference budgets") {
  PipelineConfig cfg = small_cfg();
  cfg.num_runs = 10;
  cfg.partial_epochs = 5;
  cfg.top_t = 3;
  cfg.full_epochs = 100;
  cfg.lr_grid = kDefaultLrGrid;
  const std::pair<Method, std::size_t> expected[] = {{Method::Baseline, 100}, {Method::LRTuned, 600},
                                                     {Method::Soup, 150},     {Method::Ties, 150},
                                                     {Method::Ensemble, 1000}, {Method::BestOnVal, 1000}};
  for (const auto& [method, epochs] : expected) {
    cfg.merge.method = method == Method::Ties ? merging::MergeMethod::Ties : merging::MergeMethod::Soup;
    INFO(to_string(method));
    CHECK(cfg.epoch_budget(method) == epochs);
    CHECK(counted_epochs(method, cfg) == epochs);
  }
}

TEST_CASE("fusion equals its manual reconstruction") {
  const PipelineConfig cfg = small_cfg();
  const auto& data = small_data();
  const MethodResult res = run_fusion(cfg, data, 11);

  const ParamSet init = shared_init(cfg, 11);
  std::vector<training::RunRecord> partial;
  std::vector<double> last;
  for (std::size_t m = 1; m <= cfg.num_runs; ++m) {
    training::TrainConfig tc = cfg.base;
    tc.epochs = cfg.partial_epochs;
    tc.shuffle_seed = derived_seed(11, "shuffle-" + std::to_string(m));
    partial.push_back(training::train(cfg.model, tc, &init, data.splits()));
    last.push_back(partial.back().val_auc_per_epoch.back());
  }
  const auto top = select_top(last, cfg.top_t);
  CHECK(res.selected == top);
  std::vector<ParamSet> chosen;
  for (std::size_t i : top) chosen.push_back(partial[i].final_params);
  const ParamSet merged = merging::soup(chosen);
  training::TrainConfig tc = cfg.base;
  tc.epochs = cfg.full_epochs;
  tc.shuffle_seed = derived_seed(11, "shuffle-merged");
  const auto full = training::train(cfg.model, tc, &merged, data.splits());
  CHECK(res.test_auc == full.test_auc_at_best);
  CHECK(res.params == full.best_params);
  CHECK(res.label == "Soup2");
}

TEST_CASE("partial runs share one initialization") {
  const PipelineConfig cfg = small_cfg(Arch::ABMIL);
  const ParamSet init = shared_init(cfg, 3);
  CHECK(init == shared_init(cfg, 3));
  CHECK_FALSE(init == shared_init(cfg, 4));
  // With one epoch from the same start only the shuffle order differs.
  const auto runs = train_population(cfg, small_data(), init, 3, 1);
  CHECK_FALSE(runs[0].final_params == runs[1].final_params);
}

TEST_CASE("select_top is stable on ties") {
  const std::vector<double> s{0.5, 0.9, 0.5, 0.9, 0.1};
  CHECK(select_top(s, 3) == std::vector<std::size_t>{1, 3, 0});
  CHECK_THROWS_AS(select_top(s, 6), std::invalid_argument);
}

TEST_CASE("degenerate fusion with one run") {
  PipelineConfig cfg = small_cfg();
  cfg.num_runs = 1;
  cfg.top_t = 1;
  const auto res = run_fusion(cfg, small_data(), 2);
  CHECK(res.selected == std::vector<std::size_t>{0});
  CHECK(res.epochs_spent == cfg.partial_epochs + cfg.full_epochs);
  CHECK(std::isfinite(res.test_auc));
}

TEST_CASE("T equal to M merges every run") {
  PipelineConfig cfg = small_cfg();
  cfg.top_t = cfg.num_runs;
  const auto res = run_fusion(cfg, small_data(), 2);
  auto sorted = res.selected;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3});
  cfg.top_t = cfg.num_runs + 1;
  CHECK_THROWS_AS(run_fusion(cfg, small_data(), 2), std::invalid_argument);
}

TEST_CASE("worker count does not change results") {
  for (auto method : {Method::Soup, Method::Ties, Method::Ensemble, Method::BestOnVal, Method::LRTuned}) {
    PipelineConfig serial = small_cfg(Arch::ABMIL);
    serial.merge.method = method == Method::Ties ? merging::MergeMethod::Ties : merging::MergeMethod::Soup;
    PipelineConfig parallel = serial;
    parallel.workers = 8;
    const auto a = run_method(method, serial, small_data(), 9);
    const auto b = run_method(method, parallel, small_data(), 9);
    INFO(to_string(method));
    CHECK(a.selected == b.selected);
    CHECK(a.test_auc == b.test_auc);
    CHECK(a.val_auc == b.val_auc);
    CHECK(a.params == b.params);
  }
}

TEST_CASE("methods are reproducible") {
  const PipelineConfig cfg = small_cfg();
  for (auto method : {Method::Baseline, Method::LRTuned, Method::Soup, Method::Ties, Method::Ensemble, Method::BestOnVal}) {
    PipelineConfig c = cfg;
    if (method == Method::Ties) c.merge.method = merging::MergeMethod::Ties;
    CHECK(run_method(method, c, small_data(), 4).test_auc == run_method(method, c, small_data(), 4).test_auc);
  }
}

TEST_CASE("a grid of one repeated rate reduces to the baseline") {
  PipelineConfig cfg = small_cfg();
  cfg.lr_grid = {cfg.base.lr_max, cfg.base.lr_max};
  const auto tuned = run_lr_tuned(cfg, small_data(), 6);
  const auto base = run_baseline(cfg, small_data(), 6);
  CHECK(tuned.test_auc == base.test_auc);
  CHECK(tuned.params == base.params);
  CHECK(tuned.selected == std::vector<std::size_t>{0});
  CHECK_FALSE(tuned.warnings.empty());
}

TEST_CASE("ensemble and best-on-val from a shared population") {
  const PipelineConfig cfg = small_cfg();
  const auto& data = small_data();
  const auto runs = full_population(cfg, data, 8);
  const auto ens = ensemble_from(cfg, data, 8, runs);
  const auto best = best_on_val_from(cfg, 8, runs);

  // Reference ensemble: plain mean of member probabilities.
  numkit::Matrix mean(data.test.size(), 2);
  for (const auto& r : runs) {
    const auto p = training::predict_all(cfg.model, r.best_params, data.test);
    for (std::size_t i = 0; i < p.data.size(); ++i) mean.data[i] += p.data[i] / static_cast<double>(runs.size());
  }
  for (std::size_t i = 0; i < mean.rows; ++i) CHECK(mean(i, 0) + mean(i, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ens.test_auc == doctest::Approx(metrics::auc_from_probabilities(mean, training::labels_of(data.test))).epsilon(1e-12));

  std::size_t arg = 0;
  for (std::size_t m = 1; m < runs.size(); ++m)
    if (runs[m].best_val_auc > runs[arg].best_val_auc) arg = m;
  CHECK(best.selected == std::vector<std::size_t>{arg});
  CHECK(best.test_auc == runs[arg].test_auc_at_best);
  CHECK(run_ensemble(cfg, data, 8).test_auc == ens.test_auc);
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  try {
    parallel_for(20, 4, [](std::size_t i) {
      if (i == 7 || i == 13) throw std::runtime_error("task " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "task 7");
  }
  std::vector<int> hit(50, 0);
  parallel_for(50, 3, [&](std::size_t i) { hit[i] += 1; });
  CHECK(std::accumulate(hit.begin(), hit.end(), 0) == 50);
}

TEST_CASE("method names") {
  CHECK(parse_method("bestval") == Method::BestOnVal);
  CHECK(parse_method("lr") == Method::LRTuned);
  CHECK_THROWS_AS(parse_method("dropout"), std::invalid_argument);
  CHECK(method_label(Method::Ties, 5) == "Ties5");
}

TEST_CASE("ensemble of copies equals the single model") {
  const PipelineConfig cfg = small_cfg();
  const auto runs = full_population(cfg, small_data(), 8);
  const std::vector<training::RunRecord> copies(10, runs[2]);
  CHECK(ensemble_from(cfg, small_data(), 8, copies).test_auc == runs[2].test_auc_at_best);
}

TEST_CASE("best-on-val ties go to the lower run index") {
  const PipelineConfig cfg = small_cfg();
  auto runs = full_population(cfg, small_data(), 8);
  for (auto& r : runs) r.best_val_auc = 0.75;
  CHECK(best_on_val_from(cfg, 8, runs).selected == std::vector<std::size_t>{0});
}

TEST_CASE("fusion at the full budget with T = 1 selects like best-on-val at epoch K") {
  PipelineConfig cfg = small_cfg();
  cfg.partial_epochs = cfg.full_epochs;
  cfg.top_t = 1;
  const auto res = run_fusion(cfg, small_data(), 12);
  const auto runs = full_population(cfg, small_data(), 12);
  std::vector<double> last;
  for (const auto& r : runs) last.push_back(r.val_auc_per_epoch.back());
  CHECK(res.selected == select_top(last, 1));
}
