#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wavesep/models/model.hpp"

namespace wavesep::models {

/// Smallest T' >= length for which `depth` strided convolutions followed by
/// `depth` transposed convolutions return exactly T' samples.
std::size_t valid_length(std::size_t length, const DemucsSpec& spec);

/// Encoder: conv(K, stride) -> ReLU -> 1x1 conv to 2C -> GLU, per block.
/// Bottleneck: 2-layer BiLSTM followed by a linear layer back to C_L.
/// Decoder (block i = L..1): add skip i -> context conv to 2C_i -> GLU ->
/// transposed conv(K, stride) -> ReLU, the last block emitting S * C_0
/// channels without activation.
template <typename T>
class DemucsModel : public SeparationModel<T> {
 public:
  DemucsModel(const DemucsSpec& spec, std::uint64_t seed);

  ModelSpec spec() const override { return spec_; }
  int sources() const override { return spec_.sources; }
  int audio_channels() const override { return spec_.audio_channels; }
  ad::Var forward(ad::Tape<T>& tape, ad::Var mixture) override;

  /// Same as forward, also reporting each encoder block output and each
  /// decoder block output (in execution order).
  ad::Var forward_traced(ad::Tape<T>& tape, ad::Var mixture, std::vector<ad::Var>* encoder_outputs,
                         std::vector<ad::Var>* decoder_outputs);

  /// Applies weight rescaling with `reference` to every regular and
  /// transposed convolution; returns the alpha of each layer.
  std::vector<double> rescale(double reference);

  /// Names of the convolution weights that rescaling touches.
  std::vector<std::string> convolution_weight_names() const;

 private:
  struct Conv {
    ad::Parameter<T>* weight = nullptr;
    ad::Parameter<T>* bias = nullptr;
  };
  struct Encoder {
    Conv conv;
    Conv rewrite;
  };
  struct Decoder {
    Conv rewrite;
    Conv conv_tr;
  };
  struct Lstm {
    ad::Parameter<T>* w_ih = nullptr;
    ad::Parameter<T>* w_hh = nullptr;
    ad::Parameter<T>* bias = nullptr;
  };

  Conv add_conv(const std::string& name, ad::Shape weight_shape, std::size_t fan_in, std::mt19937_64& rng);

  DemucsSpec spec_;
  std::vector<Encoder> encoders_;
  std::vector<Decoder> decoders_;  // indexed like encoders_: decoders_[i] pairs with encoders_[i]
  std::vector<Lstm> lstm_;         // layer-major: [2 * layer + direction]
  Conv lstm_linear_;
};

}  // namespace wavesep::models
