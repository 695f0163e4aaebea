#include "mfmil/harness/plan.hpp"

#include <fstream>
#include <stdexcept>

#include "mfmil/numkit/rng.hpp"

namespace mfmil::harness {

using nlohmann::json;

std::vector<std::uint64_t> default_init_seeds(std::size_t n, std::uint64_t global_seed) {
  numkit::RngStream rng = numkit::RngStream(global_seed).split("init-seeds");
  std::vector<std::uint64_t> seeds(n);
  for (auto& s : seeds) s = rng.next_u64();
  return seeds;
}

void BenchmarkPlan::validate() const {
  if (synthetic.has_value() == data_path.has_value()) {
    throw std::invalid_argument("plan: exactly one of dataset.synthetic or dataset.path is required");
  }
  if (synthetic) synthetic->validate();
  if (architectures.empty()) throw std::invalid_argument("plan: at least one architecture is required");
  if (methods.empty()) throw std::invalid_argument("plan: at least one method is required");
  if (init_seeds.size() < 2) throw std::invalid_argument("plan: at least two init seeds are required");
  if (workers < 1) throw std::invalid_argument("plan: workers must be >= 1");
  pipeline.validate();
}

namespace {

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

dataio::SynthConfig synth_from_json(const json& j) {
  dataio::SynthConfig s;
  read_opt(j, "d", s.d);
  read_opt(j, "classes", s.classes);
  if (j.contains("classes") && !j.contains("train_counts")) {
    // Balanced defaults when only the class count changes.
    s.train_counts.assign(s.classes, 200 / s.classes);
    s.val_counts.assign(s.classes, 50 / s.classes);
    s.test_counts.assign(s.classes, 100 / s.classes);
  }
  read_opt(j, "train_counts", s.train_counts);
  read_opt(j, "val_counts", s.val_counts);
  read_opt(j, "test_counts", s.test_counts);
  read_opt(j, "bag_size_min", s.bag_size_min);
  read_opt(j, "bag_size_max", s.bag_size_max);
  read_opt(j, "witness_rate", s.witness_rate);
  read_opt(j, "separation", s.separation);
  read_opt(j, "data_seed", s.data_seed);
  return s;
}

json synth_to_json(const dataio::SynthConfig& s) {
  return json{{"d", s.d},
              {"classes", s.classes},
              {"train_counts", s.train_counts},
              {"val_counts", s.val_counts},
              {"test_counts", s.test_counts},
              {"bag_size_min", s.bag_size_min},
              {"bag_size_max", s.bag_size_max},
              {"witness_rate", s.witness_rate},
              {"separation", s.separation},
              {"data_seed", s.data_seed}};
}

}  // namespace

BenchmarkPlan plan_from_json(const json& j) {
  BenchmarkPlan plan;
  if (j.contains("dataset")) {
    const json& ds = j.at("dataset");
    if (!ds.contains("path") && !ds.contains("synthetic")) {
      throw std::invalid_argument("plan: dataset needs a 'synthetic' or 'path' entry");
    }
    if (ds.contains("path")) {
      plan.data_path = ds.at("path").get<std::string>();
      plan.synthetic.reset();
    }
    if (ds.contains("synthetic")) plan.synthetic = synth_from_json(ds.at("synthetic"));
  }
  if (j.contains("architectures")) {
    plan.architectures.clear();
    for (const auto& a : j.at("architectures")) plan.architectures.push_back(milmodels::parse_arch(a.get<std::string>()));
  }
  if (j.contains("methods")) {
    plan.methods.clear();
    for (const auto& m : j.at("methods")) plan.methods.push_back(pipeline::parse_method(m.get<std::string>()));
  }
  if (j.contains("init_seeds")) {
    plan.init_seeds = j.at("init_seeds").get<std::vector<std::uint64_t>>();
  } else if (j.contains("num_seeds") || j.contains("global_seed")) {
    plan.init_seeds = default_init_seeds(j.value("num_seeds", std::size_t{10}), j.value("global_seed", std::uint64_t{42}));
  }

  auto& pc = plan.pipeline;
  if (j.contains("model")) read_opt(j.at("model"), "hidden_dim", pc.model.hidden_dim);
  if (j.contains("training")) {
    const json& t = j.at("training");
    read_opt(t, "lr", pc.base.lr_max);
    read_opt(t, "lr_min", pc.base.lr_min);
    read_opt(t, "weight_decay", pc.base.weight_decay);
    if (t.contains("init_strategy")) pc.base.init_strategy = milmodels::parse_init_strategy(t.at("init_strategy").get<std::string>());
    read_opt(t, "switch_scale", pc.base.init_options.switch_scale);
  }
  if (j.contains("pipeline")) {
    const json& p = j.at("pipeline");
    read_opt(p, "M", pc.num_runs);
    read_opt(p, "K", pc.partial_epochs);
    read_opt(p, "T", pc.top_t);
    read_opt(p, "full_epochs", pc.full_epochs);
    read_opt(p, "lr_grid", pc.lr_grid);
  }
  if (j.contains("merge")) {
    const json& m = j.at("merge");
    read_opt(m, "trim_density", pc.merge.trim_density);
    read_opt(m, "scale", pc.merge.scale);
  }
  if (j.contains("ablation")) {
    const json& a = j.at("ablation");
    read_opt(a, "K", plan.ablation.partial_epochs);
    read_opt(a, "T_grid", plan.ablation.grid_top_t);
    read_opt(a, "T_sweep", plan.ablation.sweep_top_t);
    if (a.contains("inits")) {
      plan.ablation.inits.clear();
      for (const auto& s : a.at("inits")) plan.ablation.inits.push_back(milmodels::parse_init_strategy(s.get<std::string>()));
    }
    if (a.contains("sweep_methods")) {
      plan.ablation.sweep_methods.clear();
      for (const auto& s : a.at("sweep_methods")) plan.ablation.sweep_methods.push_back(merging::parse_merge_method(s.get<std::string>()));
    }
  }
  read_opt(j, "workers", plan.workers);
  plan.validate();
  return plan;
}

json plan_to_json(const BenchmarkPlan& plan) {
  json j;
  if (plan.synthetic) j["dataset"]["synthetic"] = synth_to_json(*plan.synthetic);
  if (plan.data_path) j["dataset"]["path"] = plan.data_path->string();
  for (auto a : plan.architectures) j["architectures"].push_back(std::string(milmodels::to_string(a)));
  for (auto m : plan.methods) j["methods"].push_back(std::string(pipeline::to_string(m)));
  j["init_seeds"] = plan.init_seeds;
  const auto& pc = plan.pipeline;
  j["model"] = {{"hidden_dim", pc.model.hidden_dim}};
  j["training"] = {{"lr", pc.base.lr_max},
                   {"lr_min", pc.base.lr_min},
                   {"weight_decay", pc.base.weight_decay},
                   {"init_strategy", std::string(milmodels::to_string(pc.base.init_strategy))},
                   {"switch_scale", pc.base.init_options.switch_scale}};
  j["pipeline"] = {{"M", pc.num_runs}, {"K", pc.partial_epochs}, {"T", pc.top_t},
                   {"full_epochs", pc.full_epochs}, {"lr_grid", pc.lr_grid}};
  j["merge"] = {{"trim_density", pc.merge.trim_density}, {"scale", pc.merge.scale}};
  json inits = json::array();
  for (auto s : plan.ablation.inits) inits.push_back(std::string(milmodels::to_string(s)));
  json sweep = json::array();
  for (auto m : plan.ablation.sweep_methods) sweep.push_back(std::string(merging::to_string(m)));
  j["ablation"] = {{"K", plan.ablation.partial_epochs}, {"T_grid", plan.ablation.grid_top_t},
                   {"T_sweep", plan.ablation.sweep_top_t}, {"inits", inits}, {"sweep_methods", sweep}};
  j["workers"] = plan.workers;
  return j;
}

BenchmarkPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plan file '" + path.string() + "'");
  return plan_from_json(json::parse(in));
}

dataio::BagDataset load_dataset(const BenchmarkPlan& plan) {
  if (plan.data_path) return dataio::read_bags(*plan.data_path);
  if (plan.synthetic) return dataio::generate(*plan.synthetic);
  throw std::invalid_argument("plan has no dataset source");
}

}  // namespace mfmil::harness
