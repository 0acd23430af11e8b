#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wavesep/models/model.hpp"

namespace wavesep::models {

/// Frontend length for which (T' - kernel) is a multiple of the stride.
std::size_t convtasnet_padded_length(std::size_t length, const ConvTasnetSpec& spec);

/// Learned front-end (conv, ReLU) -> gLN -> 1x1 bottleneck -> R * N dilated
/// depthwise-separable blocks with residual and skip outputs -> ReLU mask head
/// -> masked encodings decoded by one shared transposed convolution.
template <typename T>
class ConvTasnetModel : public SeparationModel<T> {
 public:
  ConvTasnetModel(const ConvTasnetSpec& spec, std::uint64_t seed);

  ModelSpec spec() const override { return spec_; }
  int sources() const override { return spec_.sources; }
  int audio_channels() const override { return spec_.audio_channels; }
  ad::Var forward(ad::Tape<T>& tape, ad::Var mixture) override;

  /// Same as forward; `masks` receives the (B, S * N, F) mask tensor.
  ad::Var forward_traced(ad::Tape<T>& tape, ad::Var mixture, ad::Var* masks);

 private:
  struct Block {
    ad::Parameter<T>* in_weight;
    ad::Parameter<T>* in_bias;
    ad::Parameter<T>* in_slope;
    ad::Parameter<T>* in_gain;
    ad::Parameter<T>* in_shift;
    ad::Parameter<T>* dw_weight;
    ad::Parameter<T>* dw_bias;
    ad::Parameter<T>* dw_slope;
    ad::Parameter<T>* dw_gain;
    ad::Parameter<T>* dw_shift;
    ad::Parameter<T>* res_weight = nullptr;  // absent in the last block
    ad::Parameter<T>* res_bias = nullptr;
    ad::Parameter<T>* skip_weight;
    ad::Parameter<T>* skip_bias;
  };

  ad::Parameter<T>* add_weight(const std::string& name, ad::Shape shape, std::size_t fan_in, std::mt19937_64& rng);
  ad::Parameter<T>* add_filled(const std::string& name, std::size_t size, T value);

  ConvTasnetSpec spec_;
  ad::Parameter<T>* encoder_ = nullptr;
  ad::Parameter<T>* norm_gain_ = nullptr;
  ad::Parameter<T>* norm_shift_ = nullptr;
  ad::Parameter<T>* bottleneck_weight_ = nullptr;
  ad::Parameter<T>* bottleneck_bias_ = nullptr;
  std::vector<Block> blocks_;
  ad::Parameter<T>* mask_head_ = nullptr;
  ad::Parameter<T>* decoder_ = nullptr;
};

}  // namespace wavesep::models
