#pragma once

#include <cstdint>
#include <vector>

#include "wavesep/ad/checkpoint.hpp"
#include "wavesep/ad/parameter.hpp"

namespace wavesep::train {

struct AdamOptions {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over every parameter of a store. Moments are kept in
/// double whatever the parameter precision.
template <typename T>
class Adam {
 public:
  Adam(ad::ParameterStore<T>& params, AdamOptions options);

  /// One update from the current Parameter::grad buffers. Throws NumericError
  /// naming the parameter when a gradient is not finite; nothing is updated then.
  void step();

  std::int64_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }

  /// Moments as `<param>.m` / `<param>.v` tensors plus a `step` scalar.
  std::vector<ad::NamedTensor<double>> state() const;
  void load_state(const std::vector<ad::NamedTensor<double>>& tensors);

 private:
  ad::ParameterStore<T>* params_;
  AdamOptions options_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Scales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
template <typename T>
double clip_grad_norm(ad::ParameterStore<T>& params, double max_norm);

}  // namespace wavesep::train
