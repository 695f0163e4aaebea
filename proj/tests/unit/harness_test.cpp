#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mfmil/harness/benchmark.hpp"
#include "mfmil/harness/plan.hpp"
#include "mfmil/harness/report.hpp"
#include "mfmil/numkit/rng.hpp"

using namespace mfmil;
using namespace mfmil::harness;
using nlohmann::json;
using pipeline::Method;

namespace {

BenchmarkPlan tiny_plan() {
  const json j = json::parse(R"({
    "dataset": {"synthetic": {"d": 4, "train_counts": [6, 6], "val_counts": [4, 4], "test_counts": [4, 4],
                              "bag_size_min": 3, "bag_size_max": 5, "witness_rate": 0.3, "separation": 2.0,
                              "data_seed": 3}},
    "architectures": ["MaxMIL", "ABMIL"],
    "methods": ["baseline", "soup", "ensemble", "bestval"],
    "num_seeds": 3,
    "model": {"hidden_dim": 3},
    "training": {"lr": 0.01},
    "pipeline": {"M": 4, "K": 2, "T": 2, "full_epochs": 3, "lr_grid": [0.001, 0.01]},
    "ablation": {"K": [1, 2], "T_grid": [1, 2], "T_sweep": [2, 3, 4], "inits": ["uniform", "switch"]}
  })");
  return plan_from_json(j);
}

pipeline::PipelineConfig cell_cfg(const BenchmarkPlan& plan, const dataio::BagDataset& data, milmodels::Arch arch) {
  pipeline::PipelineConfig cfg = plan.pipeline;
  cfg.model.arch = arch;
  cfg.model.input_dim = data.d;
  cfg.model.num_classes = data.num_classes;
  return cfg;
}

}  // namespace

TEST_CASE("default init seeds") {
  const auto seeds = default_init_seeds();
  REQUIRE(seeds.size() == 10);
  numkit::RngStream rng = numkit::RngStream(42).split("init-seeds");
  for (auto s : seeds) CHECK(s == rng.next_u64());
  CHECK(default_init_seeds(3) == std::vector<std::uint64_t>(seeds.begin(), seeds.begin() + 3));
}

TEST_CASE("plan JSON parsing") {
  const BenchmarkPlan plan = tiny_plan();
  CHECK(plan.init_seeds.size() == 3);
  CHECK(plan.pipeline.num_runs == 4);
  CHECK(plan.pipeline.base.lr_max == 0.01);
  CHECK(plan.ablation.sweep_top_t == std::vector<std::size_t>{2, 3, 4});
  CHECK(plan.synthetic->d == 4);
  CHECK(plan_from_json(plan_to_json(plan)).init_seeds == plan.init_seeds);
  CHECK(plan_to_json(plan_from_json(plan_to_json(plan))) == plan_to_json(plan));

  CHECK_THROWS(plan_from_json(json::parse(R"({"init_seeds": [1]})")));
  CHECK_THROWS(plan_from_json(json::parse(R"({"methods": ["nope"]})")));
  CHECK_THROWS(plan_from_json(json::parse(R"({"dataset": {}})")));
}

TEST_CASE("benchmark cells match direct pipeline runs") {
  const BenchmarkPlan plan = tiny_plan();
  const auto data = load_dataset(plan);
  const auto reports = run_benchmark(plan, data);
  REQUIRE(reports.size() == 8);
  for (const auto& r : reports) {
    CHECK(r.complete());
    CHECK(r.test_aucs.size() == 3);
    CHECK(r.seeds == plan.init_seeds);
  }

  const auto cfg = cell_cfg(plan, data, milmodels::Arch::ABMIL);
  const auto& soup = reports[5];
  CHECK(soup.arch == "ABMIL");
  CHECK(soup.method == "Soup2");
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(soup.test_aucs[s] == 100.0 * pipeline::run_method(Method::Soup, cfg, data, plan.init_seeds[s]).test_auc);
  }
  const auto& ens = reports[6];
  CHECK(ens.test_aucs[1] == 100.0 * pipeline::run_method(Method::Ensemble, cfg, data, plan.init_seeds[1]).test_auc);
  // Ensemble and best-on-val share their population, so 12 epochs per seed, not 24.
  CHECK(ens.epochs_executed[0] == 12);
  CHECK(reports[7].epochs_executed[0] == 12);
  CHECK(reports[4].epochs_executed[0] == 3);
  CHECK(reports[5].epochs_executed[0] == 4 * 2 + 3);

  // Parallel cells give the same table.
  BenchmarkPlan par = plan;
  par.workers = 4;
  CHECK(reports_to_json(run_benchmark(par, data)) == reports_to_json(reports));
}

TEST_CASE("report columns and round-trips") {
  const BenchmarkPlan plan = tiny_plan();
  const auto data = load_dataset(plan);
  auto reports = run_benchmark(plan, data);
  const auto rows = parse_report_csv(reports_to_csv(reports));
  REQUIRE(rows.size() == reports.size());
  CHECK(rows[0].method == "Baseline");
  CHECK(rows[0].m == "1");
  CHECK(rows[0].k == "-");
  CHECK(rows[0].ep == "3");
  CHECK(rows[1].m == "4");
  CHECK(rows[1].k == "2");
  CHECK(rows[1].t == "2");
  CHECK(rows[1].ep == "11");
  CHECK(rows[2].ep == "12");
  CHECK(rows[2].t == "-");
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(std::abs(rows[i].mean - reports[i].stats.mean) <= 0.05 + 1e-9);

  const auto back = reports_from_json(reports_to_json(reports));
  REQUIRE(back.size() == reports.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].test_aucs == reports[i].test_aucs);
    CHECK(back[i].stats.std == reports[i].stats.std);
    CHECK(back[i].k == reports[i].k);
    CHECK(back[i].method_id == reports[i].method_id);
  }

  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "mfmil_report_test.csv";
  emit_report(reports, ReportFormat::Csv, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "arch,method,M,K,T,Ep,min,max,mean,std");
  std::filesystem::remove(path);

  const auto never = dir / "mfmil_report_empty.json";
  std::filesystem::remove(never);
  CHECK_THROWS_AS(emit_report({}, ReportFormat::Json, never), std::invalid_argument);
  CHECK_FALSE(std::filesystem::exists(never));
}

TEST_CASE("failing cells are recorded without stopping the run") {
  BenchmarkPlan plan = tiny_plan();
  plan.methods = {Method::Baseline};
  plan.architectures = {milmodels::Arch::MaxMIL};
  auto data = load_dataset(plan);
  for (double& x : data.train[0].features.data) x = 1e308;
  // Whether the logits overflow depends on the seeded weights.
  const auto reports = run_benchmark(plan, data);
  REQUIRE(reports.size() == 1);
  const auto& r = reports[0];
  CHECK_FALSE(r.complete());
  CHECK(r.failed.size() == 2);
  CHECK(r.failed[0].error.find("non-finite") != std::string::npos);
  CHECK(r.seeds.size() + r.failed.size() == 3);
  CHECK(r.test_aucs.size() == r.seeds.size());
  CHECK_FALSE(r.stats.std_defined);

  VariabilityReport empty = r;
  empty.seeds.clear();
  empty.test_aucs.clear();
  CHECK(reports_to_csv({empty}).find("nan,nan,nan,nan") != std::string::npos);
}

TEST_CASE("ablation sweep and grid") {
  const BenchmarkPlan plan = tiny_plan();
  const auto data = load_dataset(plan);
  const auto curves = run_ablation_T(plan, data);
  REQUIRE(curves.size() == 4);
  for (const auto& c : curves) {
    CHECK(c.top_t == std::vector<std::size_t>{2, 3, 4});
    CHECK(c.mean_test_auc.size() == 3);
    CHECK(c.mean_val_auc.size() == 3);
  }
  CHECK(ablation_curves_to_csv(curves) == ablation_curves_to_csv(run_ablation_T(plan, data)));

  const auto grid = run_ablation_grid(plan, data);
  CHECK(grid.size() == 2 * 2 * 2);
  for (const auto& g : grid) {
    CHECK(g.seeds == 3);
    CHECK(g.mean_test_auc >= 0.0);
    CHECK(g.mean_test_auc <= 100.0);
  }
  CHECK(ablation_grid_to_csv(grid) == ablation_grid_to_csv(run_ablation_grid(plan, data)));
}

TEST_CASE("sweep at T = M is the soup of every run") {
  const BenchmarkPlan plan = tiny_plan();
  const auto data = load_dataset(plan);
  const auto curves = run_ablation_T(plan, data);
  const auto cfg = cell_cfg(plan, data, milmodels::Arch::MaxMIL);
  double sum = 0.0;
  for (auto seed : plan.init_seeds) {
    std::vector<numkit::ParamSet> all;
    for (const auto& r : pipeline::full_population(cfg, data, seed)) all.push_back(r.final_params);
    sum += training::evaluate_auc(cfg.model, merging::soup(all), data.test);
  }
  REQUIRE(curves[0].arch == "MaxMIL");
  REQUIRE(curves[0].merge == merging::MergeMethod::Soup);
  CHECK(curves[0].mean_test_auc.back() == doctest::Approx(100.0 * sum / 3.0).epsilon(1e-12));
}

TEST_CASE("bundled plan files load") {
  const std::filesystem::path dir = std::filesystem::path(MFMIL_SOURCE_DIR) / "plans";
  const auto bench = load_plan(dir / "benchmark.json");
  CHECK(bench.methods.size() == 6);
  CHECK(bench.init_seeds == default_init_seeds());
  const auto abl = load_plan(dir / "ablation.json");
  CHECK(abl.ablation.sweep_top_t.size() == 9);
  CHECK(abl.ablation.inits.size() == 3);
}
