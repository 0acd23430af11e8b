#pragma once

#include <random>

#include "wavesep/ad/parameter.hpp"

namespace wavesep::models {

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), the default Kaiming-uniform
/// (a = sqrt(5)) initialization used for convolution and linear layers.
template <typename T>
void kaiming_uniform(ad::Tensor<T>& t, std::size_t fan_in, std::mt19937_64& rng);

template <typename T>
void uniform_fill(ad::Tensor<T>& t, double bound, std::mt19937_64& rng);

/// Sample standard deviation (n - 1 denominator) over all entries.
template <typename T>
double weight_std(const ad::Tensor<T>& t);

/// Scales a layer so that std(w') = sqrt(reference * std(w)): with
/// alpha = std(w) / reference, w' = w / sqrt(alpha). The bias, when given, is
/// divided by the same factor. Returns alpha. Throws on zero-variance weights.
template <typename T>
double rescale_weights(ad::Parameter<T>& weight, ad::Parameter<T>* bias, double reference);

}  // namespace wavesep::models
