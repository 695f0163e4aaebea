#include "mfmil/training/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

#include "mfmil/metrics/auc.hpp"
#include "mfmil/numkit/rng.hpp"

namespace mfmil::training {

using milmodels::Bag;
using numkit::ParamSet;

void TrainConfig::validate() const {
  if (!(lr_max > 0.0)) throw std::invalid_argument("lr_max must be positive");
  if (!(lr_min >= 0.0) || lr_min > lr_max) throw std::invalid_argument("lr_min must lie in [0, lr_max]");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
}

double cosine_lr(std::size_t t, std::size_t total, double lr_max, double lr_min) {
  if (total < 1) throw std::invalid_argument("cosine_lr: total epochs must be >= 1");
  if (t > total) throw std::invalid_argument("cosine_lr: t exceeds the schedule horizon");
  const double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(total);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

AdamState AdamState::zeros_like(const ParamSet& params) {
  return AdamState{params.zeros_like(), params.zeros_like()};
}

void adam_step(ParamSet& params, const ParamSet& grad, AdamState& state, double lr, const TrainConfig& cfg,
               std::size_t step) {
  params.require_congruent(grad, "adam_step(grad)");
  params.require_congruent(state.first_moment, "adam_step(first moment)");
  params.require_congruent(state.second_moment, "adam_step(second moment)");
  if (step < 1) throw std::invalid_argument("adam_step: step must be >= 1");

  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t e = 0; e < params.size(); ++e) {
    auto& theta = params.entry(e).values;
    const auto& g_raw = grad.entry(e).values;
    auto& m = state.first_moment.entry(e).values;
    auto& v = state.second_moment.entry(e).values;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = g_raw[i] + cfg.weight_decay * theta[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
    }
  }
}

ParamSet initial_params(const milmodels::ModelSpec& spec, const TrainConfig& cfg) {
  return milmodels::init_params(spec, cfg.init_strategy, numkit::RngStream(cfg.init_seed).split("init"),
                                cfg.init_options);
}

numkit::Matrix predict_all(const milmodels::ModelSpec& spec, const ParamSet& params, std::span<const Bag> bags) {
  numkit::Matrix probs(bags.size(), spec.num_classes);
  for (std::size_t i = 0; i < bags.size(); ++i) {
    const auto row = milmodels::predict_proba(spec, params, bags[i]);
    std::copy(row.begin(), row.end(), probs.row(i).begin());
  }
  return probs;
}

std::vector<std::size_t> labels_of(std::span<const Bag> bags) {
  std::vector<std::size_t> labels(bags.size());
  for (std::size_t i = 0; i < bags.size(); ++i) labels[i] = bags[i].label;
  return labels;
}

double evaluate_auc(const milmodels::ModelSpec& spec, const ParamSet& params, std::span<const Bag> bags) {
  return metrics::auc_from_probabilities(predict_all(spec, params, bags), labels_of(bags));
}

RunRecord train(const milmodels::ModelSpec& spec, const TrainConfig& cfg, const ParamSet* start_params,
                const DataSplits& data, const TrainHooks& hooks) {
  spec.validate();
  cfg.validate();
  if (data.train.empty() || data.val.empty() || data.test.empty()) {
    throw std::invalid_argument("train: train, validation and test splits must be non-empty");
  }

  ParamSet params;
  if (start_params != nullptr) {
    params = *start_params;
    params.require_congruent(milmodels::make_layout(spec), "train(start_params)");
  } else {
    params = initial_params(spec, cfg);
  }

  AdamState adam = AdamState::zeros_like(params);
  numkit::RngStream shuffle(cfg.shuffle_seed);

  RunRecord record;
  record.val_auc_per_epoch.reserve(cfg.epochs);
  record.best_val_auc = -std::numeric_limits<double>::infinity();
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, cfg.epochs, cfg.lr_max, cfg.lr_min);
    const auto order = shuffle.permutation(data.train.size());
    double loss_sum = 0.0;
    for (std::size_t idx : order) {
      const Bag& bag = data.train[idx];
      if (hooks.on_step) hooks.on_step(epoch, bag);
      auto [loss, grad] = milmodels::loss_and_grad(spec, params, bag);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + " on bag '" + bag.id + "'");
      }
      loss_sum += loss;
      adam_step(params, grad, adam, lr, cfg, ++step);
    }

    const double val_auc = evaluate_auc(spec, params, data.val);
    record.val_auc_per_epoch.push_back(val_auc);
    record.trace.push_back(EpochStats{epoch + 1, lr, loss_sum / static_cast<double>(data.train.size()), val_auc});
    if (val_auc > record.best_val_auc) {
      record.best_val_auc = val_auc;
      record.best_epoch = epoch;
      record.best_params = params;
    }
    if (hooks.epoch_counter != nullptr) hooks.epoch_counter->add(1);
  }

  record.epochs_spent = cfg.epochs;
  record.optimizer_steps = step;
  record.test_auc_at_best = evaluate_auc(spec, record.best_params, data.test);
  record.final_params = std::move(params);
  return record;
}

void write_trace_csv(const std::filesystem::path& path, const RunRecord& record) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "epoch,lr,mean_train_loss,val_auc\n";
  out << std::setprecision(17);
  for (const auto& s : record.trace) out << s.epoch << ',' << s.lr << ',' << s.mean_train_loss << ',' << s.val_auc << '\n';
}

}  // namespace mfmil::training
