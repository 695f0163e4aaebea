#include "mfmil/harness/benchmark.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <variant>

#include "mfmil/pipeline/parallel.hpp"

namespace mfmil::harness {

using pipeline::Method;
using pipeline::MethodResult;
using pipeline::PipelineConfig;

namespace {

PipelineConfig cell_config(const BenchmarkPlan& plan, const dataio::BagDataset& data, milmodels::Arch arch) {
  PipelineConfig cfg = plan.pipeline;
  cfg.model.arch = arch;
  cfg.model.input_dim = data.d;
  cfg.model.num_classes = data.num_classes;
  cfg.workers = 1;  // parallelism lives at the cell level
  return cfg;
}

bool is_population_method(Method m) { return m == Method::Ensemble || m == Method::BestOnVal; }

struct Job {
  std::size_t arch_index;
  std::size_t seed_index;
  std::optional<Method> method;  // empty: shared Ensemble / Best-on-VAL population
};

struct Outcome {
  std::map<Method, MethodResult> results;
  std::string error;
  std::size_t epochs_executed = 0;
};

}  // namespace

void describe_method(VariabilityReport& report, Method method, const PipelineConfig& cfg) {
  report.method_id = method;
  report.method = pipeline::method_label(method, cfg.top_t);
  report.epochs_spent = cfg.epoch_budget(method);
  report.k.reset();
  report.t.reset();
  switch (method) {
    case Method::Baseline: report.m = 1; break;
    case Method::LRTuned: report.m = cfg.lr_grid.size(); break;
    case Method::Soup:
    case Method::Ties:
      report.m = cfg.num_runs;
      report.k = cfg.partial_epochs;
      report.t = cfg.top_t;
      break;
    case Method::Ensemble:
    case Method::BestOnVal: report.m = cfg.num_runs; break;
  }
}

std::vector<VariabilityReport> run_benchmark(const BenchmarkPlan& plan, const dataio::BagDataset& data) {
  plan.validate();
  data.validate();

  const bool wants_population = std::any_of(plan.methods.begin(), plan.methods.end(), is_population_method);
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < plan.architectures.size(); ++a) {
    for (std::size_t s = 0; s < plan.init_seeds.size(); ++s) {
      for (Method m : plan.methods) {
        if (!is_population_method(m)) jobs.push_back(Job{a, s, m});
      }
      if (wants_population) jobs.push_back(Job{a, s, std::nullopt});
    }
  }

  std::vector<Outcome> outcomes(jobs.size());
  pipeline::parallel_for(jobs.size(), plan.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    const PipelineConfig cfg = cell_config(plan, data, plan.architectures[job.arch_index]);
    const std::uint64_t seed = plan.init_seeds[job.seed_index];
    training::EpochCounter counter;
    training::TrainHooks hooks;
    hooks.epoch_counter = &counter;
    Outcome& out = outcomes[i];
    try {
      if (job.method) {
        out.results.emplace(*job.method, pipeline::run_method(*job.method, cfg, data, seed, hooks));
      } else {
        const auto runs = pipeline::full_population(cfg, data, seed, hooks);
        out.results.emplace(Method::Ensemble, pipeline::ensemble_from(cfg, data, seed, runs));
        out.results.emplace(Method::BestOnVal, pipeline::best_on_val_from(cfg, seed, runs));
      }
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.epochs_executed = counter.value();
  });

  std::vector<VariabilityReport> reports;
  for (std::size_t a = 0; a < plan.architectures.size(); ++a) {
    const PipelineConfig cfg = cell_config(plan, data, plan.architectures[a]);
    for (Method m : plan.methods) {
      VariabilityReport rep;
      rep.arch = std::string(milmodels::to_string(plan.architectures[a]));
      describe_method(rep, m, cfg);
      for (std::size_t s = 0; s < plan.init_seeds.size(); ++s) {
        auto it = std::find_if(jobs.begin(), jobs.end(), [&](const Job& j) {
          return j.arch_index == a && j.seed_index == s &&
                 (is_population_method(m) ? !j.method.has_value() : j.method == m);
        });
        const Outcome& out = outcomes[static_cast<std::size_t>(it - jobs.begin())];
        const std::uint64_t seed = plan.init_seeds[s];
        if (!out.error.empty()) {
          rep.failed.push_back(FailedCell{seed, out.error});
          continue;
        }
        const MethodResult& r = out.results.at(m);
        rep.seeds.push_back(seed);
        rep.test_aucs.push_back(100.0 * r.test_auc);
        rep.val_aucs.push_back(100.0 * r.val_auc);
        rep.epochs_executed.push_back(out.epochs_executed);
      }
      if (!rep.test_aucs.empty()) rep.stats = metrics::variability(rep.test_aucs);
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

std::vector<AblationCurve> run_ablation_T(const BenchmarkPlan& plan, const dataio::BagDataset& data) {
  plan.validate();
  data.validate();
  const auto& sweep = plan.ablation.sweep_top_t;
  if (sweep.empty()) throw std::invalid_argument("ablation: empty T sweep");

  struct Cell {
    std::size_t arch_index;
    std::size_t seed_index;
  };
  std::vector<Cell> cells;
  for (std::size_t a = 0; a < plan.architectures.size(); ++a)
    for (std::size_t s = 0; s < plan.init_seeds.size(); ++s) cells.push_back({a, s});

  // [cell][method][t] -> (test, val)
  using Scores = std::vector<std::vector<std::pair<double, double>>>;
  std::vector<Scores> scores(cells.size());
  pipeline::parallel_for(cells.size(), plan.workers, [&](std::size_t i) {
    const PipelineConfig cfg = cell_config(plan, data, plan.architectures[cells[i].arch_index]);
    for (std::size_t t : sweep) {
      if (t < 1 || t > cfg.num_runs) throw std::invalid_argument("ablation: T sweep value outside [1, M]");
    }
    const std::uint64_t seed = plan.init_seeds[cells[i].seed_index];
    const numkit::ParamSet init = pipeline::shared_init(cfg, seed);
    const auto runs = pipeline::full_population(cfg, data, seed);
    std::vector<double> final_val(runs.size());
    for (std::size_t m = 0; m < runs.size(); ++m) final_val[m] = runs[m].val_auc_per_epoch.back();

    scores[i].resize(plan.ablation.sweep_methods.size());
    for (std::size_t mm = 0; mm < plan.ablation.sweep_methods.size(); ++mm) {
      merging::MergeConfig mc = cfg.merge;
      mc.method = plan.ablation.sweep_methods[mm];
      for (std::size_t t : sweep) {
        std::vector<numkit::ParamSet> chosen;
        for (std::size_t idx : pipeline::select_top(final_val, t)) chosen.push_back(runs[idx].final_params);
        const numkit::ParamSet merged = merging::merge(init, chosen, mc);
        scores[i][mm].emplace_back(training::evaluate_auc(cfg.model, merged, data.test),
                                   training::evaluate_auc(cfg.model, merged, data.val));
      }
    }
  });

  std::vector<AblationCurve> curves;
  for (std::size_t a = 0; a < plan.architectures.size(); ++a) {
    for (std::size_t mm = 0; mm < plan.ablation.sweep_methods.size(); ++mm) {
      AblationCurve curve;
      curve.arch = std::string(milmodels::to_string(plan.architectures[a]));
      curve.merge = plan.ablation.sweep_methods[mm];
      curve.top_t = sweep;
      curve.mean_test_auc.assign(sweep.size(), 0.0);
      curve.mean_val_auc.assign(sweep.size(), 0.0);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].arch_index != a) continue;
        for (std::size_t ti = 0; ti < sweep.size(); ++ti) {
          curve.mean_test_auc[ti] += scores[i][mm][ti].first;
          curve.mean_val_auc[ti] += scores[i][mm][ti].second;
        }
      }
      const double n = static_cast<double>(plan.init_seeds.size());
      for (std::size_t ti = 0; ti < sweep.size(); ++ti) {
        curve.mean_test_auc[ti] = 100.0 * curve.mean_test_auc[ti] / n;
        curve.mean_val_auc[ti] = 100.0 * curve.mean_val_auc[ti] / n;
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

std::vector<AblationGridCell> run_ablation_grid(const BenchmarkPlan& plan, const dataio::BagDataset& data) {
  plan.validate();
  data.validate();
  const auto& ax = plan.ablation;
  if (ax.partial_epochs.empty() || ax.inits.empty() || ax.grid_top_t.empty()) {
    throw std::invalid_argument("ablation grid: every axis needs at least one value");
  }

  struct Cell {
    std::size_t k_index;
    std::size_t init_index;
    std::size_t seed_index;
  };
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < ax.partial_epochs.size(); ++k)
    for (std::size_t n = 0; n < ax.inits.size(); ++n)
      for (std::size_t s = 0; s < plan.init_seeds.size(); ++s) cells.push_back({k, n, s});

  std::vector<std::vector<MethodResult>> results(cells.size());
  pipeline::parallel_for(cells.size(), plan.workers, [&](std::size_t i) {
    PipelineConfig cfg = cell_config(plan, data, plan.architectures.front());
    cfg.partial_epochs = ax.partial_epochs[cells[i].k_index];
    cfg.base.init_strategy = ax.inits[cells[i].init_index];
    cfg.merge.method = merging::MergeMethod::Soup;
    results[i] = pipeline::run_fusion_multi(cfg, data, plan.init_seeds[cells[i].seed_index], ax.grid_top_t);
  });

  std::vector<AblationGridCell> grid;
  for (std::size_t ti = 0; ti < ax.grid_top_t.size(); ++ti) {
    for (std::size_t k = 0; k < ax.partial_epochs.size(); ++k) {
      for (std::size_t n = 0; n < ax.inits.size(); ++n) {
        AblationGridCell cell;
        cell.top_t = ax.grid_top_t[ti];
        cell.k = ax.partial_epochs[k];
        cell.init = ax.inits[n];
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (cells[i].k_index != k || cells[i].init_index != n) continue;
          cell.mean_val_auc += results[i][ti].val_auc;
          cell.mean_test_auc += results[i][ti].test_auc;
          ++cell.seeds;
        }
        cell.mean_val_auc = 100.0 * cell.mean_val_auc / static_cast<double>(cell.seeds);
        cell.mean_test_auc = 100.0 * cell.mean_test_auc / static_cast<double>(cell.seeds);
        grid.push_back(cell);
      }
    }
  }
  return grid;
}

}  // namespace mfmil::harness
