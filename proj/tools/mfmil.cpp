// Command-line entry point: data generation, single-model training,
// checkpoint merging, per-method pipelines, benchmarks and ablations.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfmil/dataio/dataset.hpp"
#include "mfmil/harness/benchmark.hpp"
#include "mfmil/harness/plan.hpp"
#include "mfmil/harness/report.hpp"
#include "mfmil/merging/merge.hpp"
#include "mfmil/numkit/checkpoint.hpp"
#include "mfmil/pipeline/pipeline.hpp"
#include "mfmil/training/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mfmil;

namespace {

json run_summary_json(const pipeline::RunSummary& s) {
  return {{"label", s.label},          {"shuffle_seed", s.shuffle_seed}, {"lr", s.lr},
          {"epochs", s.epochs},        {"val_auc_last", s.val_auc_last}, {"best_val_auc", s.best_val_auc},
          {"best_epoch", s.best_epoch + 1}, {"test_auc_at_best", s.test_auc_at_best}};
}

json method_result_json(const pipeline::MethodResult& r, const pipeline::PipelineConfig& cfg, std::uint64_t seed) {
  json detail = json::array();
  for (const auto& s : r.detail) detail.push_back(run_summary_json(s));
  return {{"method", std::string(pipeline::to_string(r.method))},
          {"label", r.label},
          {"arch", std::string(milmodels::to_string(cfg.model.arch))},
          {"init_seed", seed},
          {"test_auc", r.test_auc},
          {"val_auc", r.val_auc},
          {"epochs_spent", r.epochs_spent},
          {"selected", r.selected},
          {"warnings", r.warnings},
          {"detail", detail}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity model fusion for multiple instance learning"};
  app.require_subcommand(1);

  // gen-data
  dataio::SynthConfig synth;
  std::string data_out;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic MIL dataset as an MBAG file");
  gen->add_option("--d", synth.d, "Feature dimension")->capture_default_str();
  gen->add_option("--classes", synth.classes, "Number of classes (class 0 is negative)")->capture_default_str();
  gen->add_option("--train", synth.train_counts, "Per-class training bag counts")->delimiter(',')->capture_default_str();
  gen->add_option("--val", synth.val_counts, "Per-class validation bag counts")->delimiter(',')->capture_default_str();
  gen->add_option("--test", synth.test_counts, "Per-class test bag counts")->delimiter(',')->capture_default_str();
  gen->add_option("--bag-min", synth.bag_size_min, "Minimum instances per bag")->capture_default_str();
  gen->add_option("--bag-max", synth.bag_size_max, "Maximum instances per bag")->capture_default_str();
  gen->add_option("--witness-rate", synth.witness_rate, "Fraction of witness instances in positive bags")->capture_default_str();
  gen->add_option("--separation", synth.separation, "Mean shift of witness instances")->capture_default_str();
  gen->add_option("--seed", synth.data_seed, "Data seed")->capture_default_str();
  gen->add_option("--out", data_out, "Output MBAG path")->required();

  // shared model / training flags
  pipeline::PipelineConfig pcfg;
  std::string arch_name = "maxmil";
  std::string init_name = "xavier";
  std::string data_path;
  std::uint64_t init_seed = 0;
  auto add_model_flags = [&](CLI::App* cmd) {
    cmd->add_option("--data", data_path, "MBAG dataset path")->required();
    cmd->add_option("--arch", arch_name, "maxmil | abmil")->capture_default_str();
    cmd->add_option("--hidden", pcfg.model.hidden_dim, "ABMIL attention width")->capture_default_str();
    cmd->add_option("--lr", pcfg.base.lr_max, "Initial learning rate")->capture_default_str();
    cmd->add_option("--weight-decay", pcfg.base.weight_decay, "L2 weight decay")->capture_default_str();
    cmd->add_option("--init", init_name, "uniform | xavier | switch")->capture_default_str();
    cmd->add_option("--switch-scale", pcfg.base.init_options.switch_scale, "Switch init scale s")->capture_default_str();
    cmd->add_option("--init-seed", init_seed, "Initialization seed")->capture_default_str();
  };

  // train
  std::uint64_t shuffle_seed = 0;
  std::size_t epochs = 100;
  std::string trace_out, ckpt_out;
  auto* train_cmd = app.add_subcommand("train", "Train one model and optionally write its trace and checkpoint");
  add_model_flags(train_cmd);
  train_cmd->add_option("--epochs", epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--shuffle-seed", shuffle_seed, "Shuffle seed")->capture_default_str();
  train_cmd->add_option("--trace", trace_out, "Per-epoch CSV trace path");
  train_cmd->add_option("--checkpoint", ckpt_out, "MFMA checkpoint path for the best-validation weights");

  // merge
  std::vector<std::string> merge_inputs;
  std::string merge_init, merge_method = "soup", merge_out;
  double density = 0.2, scale = 1.0;
  auto* merge_cmd = app.add_subcommand("merge", "Merge MFMA checkpoints with Soup or TIES");
  merge_cmd->add_option("--inputs", merge_inputs, "Checkpoints to merge")->required();
  merge_cmd->add_option("--init", merge_init, "Shared initialization checkpoint (required for ties)");
  merge_cmd->add_option("--method", merge_method, "soup | ties")->capture_default_str();
  merge_cmd->add_option("--density", density, "TIES trim density")->capture_default_str();
  merge_cmd->add_option("--scale", scale, "TIES task-vector scale")->capture_default_str();
  merge_cmd->add_option("--out", merge_out, "Output checkpoint path")->required();

  // pipeline
  std::string method_name = "soup", result_out;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run one comparison method for one init seed");
  add_model_flags(pipe_cmd);
  pipe_cmd->add_option("--method", method_name, "baseline | lr | soup | ties | ensemble | bestval")->capture_default_str();
  pipe_cmd->add_option("--M", pcfg.num_runs, "Partial runs")->capture_default_str();
  pipe_cmd->add_option("--K", pcfg.partial_epochs, "Partial epochs")->capture_default_str();
  pipe_cmd->add_option("--T", pcfg.top_t, "Models merged")->capture_default_str();
  pipe_cmd->add_option("--epochs", pcfg.full_epochs, "Full-training epochs")->capture_default_str();
  pipe_cmd->add_option("--density", pcfg.merge.trim_density, "TIES trim density")->capture_default_str();
  pipe_cmd->add_option("--scale", pcfg.merge.scale, "TIES task-vector scale")->capture_default_str();
  pipe_cmd->add_option("--lr-grid", pcfg.lr_grid, "Learning-rate grid for the lr method")->delimiter(',');
  pipe_cmd->add_option("--workers", pcfg.workers, "Worker threads")->capture_default_str();
  pipe_cmd->add_option("--out", result_out, "Output JSON path")->required();

  // benchmark / ablation
  std::string plan_path, out_dir = ".";
  std::size_t workers = 0;
  auto* bench_cmd = app.add_subcommand("benchmark", "Variability benchmark over init seeds");
  bench_cmd->add_option("--plan", plan_path, "Plan JSON file")->required();
  bench_cmd->add_option("--workers", workers, "Worker threads (overrides the plan)");
  bench_cmd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  bool skip_grid = false, skip_sweep = false;
  auto* abl_cmd = app.add_subcommand("ablation", "K x init x T grid and T sweep");
  abl_cmd->add_option("--plan", plan_path, "Plan JSON file")->required();
  abl_cmd->add_option("--workers", workers, "Worker threads (overrides the plan)");
  abl_cmd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  abl_cmd->add_flag("--skip-grid", skip_grid, "Skip the K x init x T grid");
  abl_cmd->add_flag("--skip-sweep", skip_sweep, "Skip the T sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto ds = dataio::generate(synth);
      dataio::write_bags(ds, data_out);
      std::cout << "wrote " << ds.size() << " bags to " << data_out << "\n";
      return 0;
    }

    auto load_model_config = [&]() {
      const auto ds = dataio::read_bags(data_path);
      pcfg.model.arch = milmodels::parse_arch(arch_name);
      pcfg.model.input_dim = ds.d;
      pcfg.model.num_classes = ds.num_classes;
      pcfg.base.init_strategy = milmodels::parse_init_strategy(init_name);
      return ds;
    };

    if (train_cmd->parsed()) {
      const auto ds = load_model_config();
      training::TrainConfig tc = pcfg.base;
      tc.epochs = epochs;
      tc.init_seed = init_seed;
      tc.shuffle_seed = shuffle_seed;
      const auto run = training::train(pcfg.model, tc, nullptr, ds.splits());
      if (!trace_out.empty()) training::write_trace_csv(trace_out, run);
      if (!ckpt_out.empty()) numkit::save_checkpoint(ckpt_out, run.best_params);
      std::cout << "best epoch " << run.best_epoch + 1 << " val AUC " << run.best_val_auc << " test AUC "
                << run.test_auc_at_best << "\n";
      return 0;
    }

    if (merge_cmd->parsed()) {
      merging::MergeConfig mc{merging::parse_merge_method(merge_method), density, scale};
      std::vector<numkit::ParamSet> models;
      for (const auto& p : merge_inputs) models.push_back(numkit::load_checkpoint(p));
      numkit::ParamSet init;
      if (mc.method == merging::MergeMethod::Ties) {
        if (merge_init.empty()) throw std::invalid_argument("ties merging requires --init");
        init = numkit::load_checkpoint(merge_init);
      }
      numkit::save_checkpoint(merge_out, merging::merge(init, models, mc));
      std::cout << "merged " << models.size() << " checkpoints into " << merge_out << "\n";
      return 0;
    }

    if (pipe_cmd->parsed()) {
      const auto ds = load_model_config();
      const auto method = pipeline::parse_method(method_name);
      const auto result = pipeline::run_method(method, pcfg, ds, init_seed);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      write_text(result_out, method_result_json(result, pcfg, init_seed).dump(2) + "\n");
      std::cout << result.label << ": test AUC " << result.test_auc << " (" << result.epochs_spent << " epochs)\n";
      return 0;
    }

    if (bench_cmd->parsed() || abl_cmd->parsed()) {
      auto plan = harness::load_plan(plan_path);
      if (workers > 0) plan.workers = workers;
      const auto ds = harness::load_dataset(plan);
      fs::create_directories(out_dir);

      if (bench_cmd->parsed()) {
        const auto reports = harness::run_benchmark(plan, ds);
        harness::emit_report(reports, harness::ReportFormat::Csv, fs::path(out_dir) / "variability.csv");
        harness::emit_report(reports, harness::ReportFormat::Json, fs::path(out_dir) / "variability.json");
        std::cout << harness::reports_to_csv(reports);
        bool ok = true;
        for (const auto& r : reports) {
          for (const auto& f : r.failed) {
            ok = false;
            std::cerr << "failed cell " << r.arch << "/" << r.method << " seed " << f.seed << ": " << f.error << "\n";
          }
        }
        return ok ? 0 : 1;
      }

      if (!skip_grid) {
        const auto grid = harness::run_ablation_grid(plan, ds);
        const auto csv = harness::ablation_grid_to_csv(grid);
        write_text(fs::path(out_dir) / "ablation_grid.csv", csv);
        std::cout << csv;
      }
      if (!skip_sweep) {
        const auto curves = harness::run_ablation_T(plan, ds);
        const auto csv = harness::ablation_curves_to_csv(curves);
        write_text(fs::path(out_dir) / "ablation_T.csv", csv);
        std::cout << csv;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
