#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "mfmil/dataio/dataset.hpp"
#include "mfmil/milmodels/model.hpp"
#include "mfmil/pipeline/pipeline.hpp"

namespace mfmil::harness {

/// First n draws of RngStream(global_seed).split("init-seeds").
std::vector<std::uint64_t> default_init_seeds(std::size_t n = 10, std::uint64_t global_seed = 42);

struct AblationAxes {
  std::vector<std::size_t> partial_epochs{3, 5, 10};  // K column groups of the grid
  std::vector<std::size_t> grid_top_t{3, 5, 10};      // T rows of the grid
  std::vector<milmodels::InitStrategy> inits{milmodels::InitStrategy::Uniform, milmodels::InitStrategy::Xavier,
                                             milmodels::InitStrategy::Switch};
  std::vector<std::size_t> sweep_top_t{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<merging::MergeMethod> sweep_methods{merging::MergeMethod::Soup, merging::MergeMethod::Ties};
};

struct BenchmarkPlan {
  std::optional<dataio::SynthConfig> synthetic = dataio::SynthConfig{};
  std::optional<std::filesystem::path> data_path;
  std::vector<milmodels::Arch> architectures{milmodels::Arch::MaxMIL, milmodels::Arch::ABMIL};
  std::vector<pipeline::Method> methods{pipeline::Method::Baseline, pipeline::Method::Soup};
  std::vector<std::uint64_t> init_seeds = default_init_seeds();
  /// Per-cell template; model.arch and model.input_dim/num_classes are set from the data.
  pipeline::PipelineConfig pipeline;
  AblationAxes ablation;
  std::size_t workers = 1;

  void validate() const;
};

BenchmarkPlan plan_from_json(const nlohmann::json& j);
nlohmann::json plan_to_json(const BenchmarkPlan& plan);
BenchmarkPlan load_plan(const std::filesystem::path& path);

/// Generates or reads the plan's dataset.
dataio::BagDataset load_dataset(const BenchmarkPlan& plan);

}  // namespace mfmil::harness
