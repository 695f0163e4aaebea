#include "mfmil/milmodels/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace mfmil::milmodels {

using numkit::Matrix;
using numkit::ParamSet;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void check_inputs(const ModelSpec& spec, const ParamSet& params, const Bag& bag) {
  if (bag.num_instances() == 0) throw DimensionError("bag '" + bag.id + "' has no instances");
  if (bag.dim() != spec.input_dim) {
    throw DimensionError("bag '" + bag.id + "' has feature width " + std::to_string(bag.dim()) +
                         ", model expects " + std::to_string(spec.input_dim));
  }
  if (bag.label >= spec.num_classes) throw DimensionError("bag '" + bag.id + "' label out of range");
  const std::size_t d = spec.input_dim;
  const std::size_t c = spec.num_classes;
  auto expect = [&](std::size_t index, std::string_view name, std::vector<std::size_t> shape) {
    if (index >= params.size() || params.entry(index).name != name || params.entry(index).shape != shape) {
      throw DimensionError("parameters do not match the " + std::string(to_string(spec.arch)) + " layout");
    }
  };
  if (spec.arch == Arch::MaxMIL) {
    if (params.size() != 2) throw DimensionError("parameters do not match the MaxMIL layout");
    expect(0, kClassifierWeight, {c, d});
    expect(1, kClassifierBias, {c});
  } else {
    const std::size_t l = spec.hidden_dim;
    if (params.size() != 4) throw DimensionError("parameters do not match the ABMIL layout");
    expect(0, kAttentionV, {l, d});
    expect(1, kAttentionW, {1, l});
    expect(2, kClassifierWeight, {c, d});
    expect(3, kClassifierBias, {c});
  }
}

struct WeightFans {
  std::size_t fan_in;
  std::size_t fan_out;
};

}  // namespace

std::string_view to_string(Arch arch) { return arch == Arch::MaxMIL ? "MaxMIL" : "ABMIL"; }

Arch parse_arch(std::string_view name) {
  const std::string n = lower(name);
  if (n == "maxmil") return Arch::MaxMIL;
  if (n == "abmil") return Arch::ABMIL;
  throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("model input_dim must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("model num_classes must be >= 2");
  if (arch == Arch::ABMIL && hidden_dim < 1) throw std::invalid_argument("ABMIL hidden_dim must be >= 1");
}

ParamSet make_layout(const ModelSpec& spec) {
  spec.validate();
  ParamSet p;
  if (spec.arch == Arch::ABMIL) {
    p.add(std::string(kAttentionV), {spec.hidden_dim, spec.input_dim});
    p.add(std::string(kAttentionW), {1, spec.hidden_dim});
  }
  p.add(std::string(kClassifierWeight), {spec.num_classes, spec.input_dim});
  p.add(std::string(kClassifierBias), {spec.num_classes});
  return p;
}

std::string_view to_string(InitStrategy strategy) {
  switch (strategy) {
    case InitStrategy::Uniform: return "Uniform";
    case InitStrategy::Xavier: return "Xavier";
    case InitStrategy::Switch: return "Switch";
  }
  return "?";
}

InitStrategy parse_init_strategy(std::string_view name) {
  const std::string n = lower(name);
  if (n == "uniform") return InitStrategy::Uniform;
  if (n == "xavier") return InitStrategy::Xavier;
  if (n == "switch") return InitStrategy::Switch;
  throw std::invalid_argument("unknown init strategy '" + std::string(name) + "'");
}

double xavier_std(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
}

double switch_std(double scale, std::size_t fan_in) { return std::sqrt(scale / static_cast<double>(fan_in)); }

ParamSet init_params(const ModelSpec& spec, InitStrategy strategy, const numkit::RngStream& stream,
                     const InitOptions& options) {
  if (strategy == InitStrategy::Switch && !(options.switch_scale > 0.0)) {
    throw std::invalid_argument("switch init scale must be positive");
  }
  ParamSet params = make_layout(spec);
  const numkit::RngStream root(stream.seed());
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& entry = params.entry(i);
    if (entry.name == kClassifierBias) continue;  // biases stay zero
    // Every weight tensor is stored as (fan_out x fan_in).
    const WeightFans fans{entry.shape[1], entry.shape[0]};
    numkit::RngStream rng = root.split(entry.name);
    switch (strategy) {
      case InitStrategy::Uniform: {
        const double bound = std::sqrt(3.0);
        for (double& v : entry.values) v = rng.uniform(-bound, bound);
        break;
      }
      case InitStrategy::Xavier: {
        const double sigma = xavier_std(fans.fan_in, fans.fan_out);
        for (double& v : entry.values) v = sigma * rng.normal();
        break;
      }
      case InitStrategy::Switch: {
        const double sigma = switch_std(options.switch_scale, fans.fan_in);
        for (double& v : entry.values) {
          double z = rng.normal();
          while (std::abs(z) > 2.0) z = rng.normal();
          v = sigma * z;
        }
        break;
      }
    }
  }
  return params;
}

ForwardTrace forward(const ModelSpec& spec, const ParamSet& params, const Bag& bag) {
  spec.validate();
  check_inputs(spec, params, bag);
  const std::size_t d = spec.input_dim;
  const std::size_t c = spec.num_classes;
  const std::size_t p = bag.num_instances();
  const auto weight = params.values(kClassifierWeight);
  const auto bias = params.values(kClassifierBias);

  ForwardTrace trace;
  trace.bag_logits.assign(c, 0.0);

  if (spec.arch == Arch::MaxMIL) {
    trace.argmax_index.assign(c, 0);
    std::vector<double> z(c);
    for (std::size_t j = 0; j < p; ++j) {
      numkit::gemv(weight, c, d, bag.features.row(j), z);
      for (std::size_t k = 0; k < c; ++k) {
        const double logit = z[k] + bias[k];
        // Strict comparison keeps the lowest index on ties.
        if (j == 0 || logit > trace.bag_logits[k]) {
          trace.bag_logits[k] = logit;
          trace.argmax_index[k] = j;
        }
      }
    }
    return trace;
  }

  const std::size_t l = spec.hidden_dim;
  const auto v = params.values(kAttentionV);
  const auto w = params.values(kAttentionW);

  // V^T (d x L) so the hidden pre-activation is a sum of contiguous rows.
  std::vector<double> v_t(d * l);
  for (std::size_t r = 0; r < l; ++r)
    for (std::size_t k = 0; k < d; ++k) v_t[k * l + r] = v[r * d + k];

  trace.attention_hidden = Matrix(p, l);
  trace.attention.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    auto hidden = trace.attention_hidden.row(j);
    const auto h = bag.features.row(j);
    for (std::size_t k = 0; k < d; ++k) {
      numkit::axpy(h[k], std::span<const double>(v_t).subspan(k * l, l), hidden);
    }
    for (double& x : hidden) x = std::tanh(x);
    trace.attention[j] = numkit::dot(w, hidden);
  }
  numkit::softmax_inplace(trace.attention);

  trace.bag_repr.assign(d, 0.0);
  for (std::size_t j = 0; j < p; ++j) numkit::axpy(trace.attention[j], bag.features.row(j), trace.bag_repr);

  numkit::gemv(weight, c, d, trace.bag_repr, trace.bag_logits);
  for (std::size_t k = 0; k < c; ++k) trace.bag_logits[k] += bias[k];
  return trace;
}

std::vector<double> predict_proba(const ModelSpec& spec, const ParamSet& params, const Bag& bag) {
  auto probs = forward(spec, params, bag).bag_logits;
  numkit::softmax_inplace(probs);
  return probs;
}

LossAndGrad loss_and_grad(const ModelSpec& spec, const ParamSet& params, const Bag& bag) {
  const ForwardTrace trace = forward(spec, params, bag);
  const std::size_t d = spec.input_dim;
  const std::size_t c = spec.num_classes;

  LossAndGrad out;
  out.loss = numkit::log_sum_exp(trace.bag_logits) - trace.bag_logits[bag.label];
  out.grad = params.zeros_like();

  // dL/dlogits = softmax - onehot
  std::vector<double> dlogits = trace.bag_logits;
  numkit::softmax_inplace(dlogits);
  dlogits[bag.label] -= 1.0;

  auto g_weight = out.grad.values(kClassifierWeight);
  auto g_bias = out.grad.values(kClassifierBias);
  std::copy(dlogits.begin(), dlogits.end(), g_bias.begin());

  if (spec.arch == Arch::MaxMIL) {
    for (std::size_t k = 0; k < c; ++k) {
      numkit::axpy(dlogits[k], bag.features.row(trace.argmax_index[k]), g_weight.subspan(k * d, d));
    }
    return out;
  }

  const std::size_t l = spec.hidden_dim;
  const std::size_t p = bag.num_instances();
  const auto weight = params.values(kClassifierWeight);
  const auto w = params.values(kAttentionW);
  auto g_v = out.grad.values(kAttentionV);
  auto g_w = out.grad.values(kAttentionW);

  numkit::ger(1.0, dlogits, trace.bag_repr, g_weight);
  std::vector<double> d_repr(d, 0.0);
  numkit::gemv_t_acc(weight, c, d, dlogits, d_repr);

  // Through H = sum_j a_j h_j and a = softmax(e).
  std::vector<double> d_attn(p);
  double weighted = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    d_attn[j] = numkit::dot(bag.features.row(j), d_repr);
    weighted += trace.attention[j] * d_attn[j];
  }

  // Through e_j = w^T tanh(V h_j).
  std::vector<double> d_pre(l);
  for (std::size_t j = 0; j < p; ++j) {
    const double d_score = trace.attention[j] * (d_attn[j] - weighted);
    const auto hidden = trace.attention_hidden.row(j);
    numkit::axpy(d_score, hidden, g_w);
    for (std::size_t r = 0; r < l; ++r) d_pre[r] = d_score * w[r] * (1.0 - hidden[r] * hidden[r]);
    numkit::ger(1.0, d_pre, bag.features.row(j), g_v);
  }
  return out;
}

}  // namespace mfmil::milmodels
