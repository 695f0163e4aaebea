#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mfmil/milmodels/bag.hpp"
#include "mfmil/numkit/linalg.hpp"
#include "mfmil/numkit/param_set.hpp"
#include "mfmil/numkit/rng.hpp"

namespace mfmil::milmodels {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Arch { MaxMIL, ABMIL };

std::string_view to_string(Arch arch);
Arch parse_arch(std::string_view name);

struct ModelSpec {
  Arch arch = Arch::MaxMIL;
  std::size_t input_dim = 32;
  std::size_t hidden_dim = 128;  // ABMIL attention width; ignored for MaxMIL
  std::size_t num_classes = 2;

  void validate() const;
};

// Parameter names. MaxMIL holds only the classifier; ABMIL adds the
// attention branch e_j = w^T tanh(V h_j).
inline constexpr std::string_view kClassifierWeight = "classifier.weight";  // C x d
inline constexpr std::string_view kClassifierBias = "classifier.bias";      // C
inline constexpr std::string_view kAttentionV = "attention.V";              // L x d
inline constexpr std::string_view kAttentionW = "attention.w";              // 1 x L

/// Zero-valued parameter set with the architecture's layout.
numkit::ParamSet make_layout(const ModelSpec& spec);

enum class InitStrategy { Uniform, Xavier, Switch };

std::string_view to_string(InitStrategy strategy);
/// Accepts "uniform", "xavier", "switch" (case-insensitive).
InitStrategy parse_init_strategy(std::string_view name);

/// sqrt(2 / (fan_in + fan_out))
double xavier_std(std::size_t fan_in, std::size_t fan_out);
/// sqrt(s / fan_in)
double switch_std(double scale, std::size_t fan_in);

struct InitOptions {
  double switch_scale = 1.0;  // s in sigma = sqrt(s / fan_in)
};

/// Weights per strategy, biases zero:
///  - Uniform: U(-sqrt(3), sqrt(3)), i.e. mean 0 and std 1.
///  - Xavier: N(0, 2 / (fan_in + fan_out)).
///  - Switch: N(0, s / fan_in) truncated to |z| <= 2 sigma by resampling.
/// Depends only on (spec, strategy, stream.seed(), options); each weight
/// tensor draws from its own child stream labelled by parameter name.
numkit::ParamSet init_params(const ModelSpec& spec, InitStrategy strategy, const numkit::RngStream& stream,
                             const InitOptions& options = {});

struct ForwardTrace {
  std::vector<double> bag_logits;            // C
  std::vector<double> bag_repr;              // d (ABMIL)
  std::vector<double> attention;             // P (ABMIL)
  std::vector<std::size_t> argmax_index;     // C (MaxMIL)
  numkit::Matrix attention_hidden;           // P x L tanh activations (ABMIL), kept for backward
};

ForwardTrace forward(const ModelSpec& spec, const numkit::ParamSet& params, const Bag& bag);

/// Softmax of the bag logits.
std::vector<double> predict_proba(const ModelSpec& spec, const numkit::ParamSet& params, const Bag& bag);

struct LossAndGrad {
  double loss = 0.0;
  numkit::ParamSet grad;
};

/// Softmax cross-entropy of the bag logits against bag.label, with the
/// hand-derived gradient w.r.t. every parameter.
LossAndGrad loss_and_grad(const ModelSpec& spec, const numkit::ParamSet& params, const Bag& bag);

}  // namespace mfmil::milmodels
