#include "wavesep/models/convtasnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wavesep/ad/ops.hpp"
#include "wavesep/models/init.hpp"

namespace wavesep::models {

std::size_t convtasnet_padded_length(std::size_t length, const ConvTasnetSpec& spec) {
  const std::size_t k = static_cast<std::size_t>(spec.frontend_kernel);
  const std::size_t s = static_cast<std::size_t>(spec.frontend_stride);
  if (length <= k) return k;
  return k + (length - k + s - 1) / s * s;
}

template <typename T>
ad::Parameter<T>* ConvTasnetModel<T>::add_weight(const std::string& name, ad::Shape shape, std::size_t fan_in,
                                                  std::mt19937_64& rng) {
  auto& p = this->params_.add(name, std::move(shape));
  kaiming_uniform(p.value, fan_in, rng);
  return &p;
}

template <typename T>
ad::Parameter<T>* ConvTasnetModel<T>::add_filled(const std::string& name, std::size_t size, T value) {
  auto& p = this->params_.add(name, {size});
  std::fill(p.value.data.begin(), p.value.data.end(), value);
  return &p;
}

template <typename T>
ConvTasnetModel<T>::ConvTasnetModel(const ConvTasnetSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  const std::size_t c = static_cast<std::size_t>(spec_.audio_channels);
  const std::size_t k = static_cast<std::size_t>(spec_.frontend_kernel);
  const std::size_t n = static_cast<std::size_t>(spec_.frontend_channels);
  const std::size_t b = static_cast<std::size_t>(spec_.block_channels);
  const std::size_t h = static_cast<std::size_t>(spec_.hidden_channels);
  const std::size_t p = static_cast<std::size_t>(spec_.block_kernel);

  encoder_ = add_weight("encoder.weight", {n, c, k}, c * k, rng);
  norm_gain_ = add_filled("bottleneck.norm.gain", n, T(1));
  norm_shift_ = add_filled("bottleneck.norm.bias", n, T(0));
  bottleneck_weight_ = add_weight("bottleneck.weight", {b, n, 1}, n, rng);
  bottleneck_bias_ = add_weight("bottleneck.bias", {b}, n, rng);

  for (int i = 0; i < spec_.block_count(); ++i) {
    const std::string pre = "blocks." + std::to_string(i);
    Block blk;
    blk.in_weight = add_weight(pre + ".in.weight", {h, b, 1}, b, rng);
    blk.in_bias = add_weight(pre + ".in.bias", {h}, b, rng);
    blk.in_slope = add_filled(pre + ".in.prelu", h, T(0.25));
    blk.in_gain = add_filled(pre + ".in.norm.gain", h, T(1));
    blk.in_shift = add_filled(pre + ".in.norm.bias", h, T(0));
    blk.dw_weight = add_weight(pre + ".depthwise.weight", {h, 1, p}, p, rng);
    blk.dw_bias = add_weight(pre + ".depthwise.bias", {h}, p, rng);
    blk.dw_slope = add_filled(pre + ".depthwise.prelu", h, T(0.25));
    blk.dw_gain = add_filled(pre + ".depthwise.norm.gain", h, T(1));
    blk.dw_shift = add_filled(pre + ".depthwise.norm.bias", h, T(0));
    if (i + 1 < spec_.block_count()) {
      blk.res_weight = add_weight(pre + ".residual.weight", {b, h, 1}, h, rng);
      blk.res_bias = add_weight(pre + ".residual.bias", {b}, h, rng);
    }
    blk.skip_weight = add_weight(pre + ".skip.weight", {b, h, 1}, h, rng);
    blk.skip_bias = add_weight(pre + ".skip.bias", {b}, h, rng);
    blocks_.push_back(blk);
  }

  mask_head_ = add_weight("mask.weight", {static_cast<std::size_t>(spec_.sources) * n, b, 1}, b, rng);
  // Transposed-convolution fan-in follows the PyTorch convention (dim 1 times K).
  decoder_ = add_weight("decoder.weight", {n, c, k}, c * k, rng);
}

template <typename T>
ad::Var ConvTasnetModel<T>::forward(ad::Tape<T>& tape, ad::Var mixture) {
  return forward_traced(tape, mixture, nullptr);
}

template <typename T>
ad::Var ConvTasnetModel<T>::forward_traced(ad::Tape<T>& tape, ad::Var mixture, ad::Var* masks) {
  const ad::Shape& in_shape = tape.shape(mixture);
  if (in_shape.size() != 3 || in_shape[1] != static_cast<std::size_t>(spec_.audio_channels)) {
    throw std::invalid_argument("convtasnet: mixture must be (B, " + std::to_string(spec_.audio_channels) +
                                ", T), got " + ad::shape_string(in_shape));
  }
  for (T v : tape.value(mixture).data) {
    if (!std::isfinite(v)) throw std::invalid_argument("convtasnet: non-finite input");
  }
  const std::size_t batch = in_shape[0], length = in_shape[2];
  if (length == 0) throw std::invalid_argument("convtasnet: empty input");
  const std::size_t padded = convtasnet_padded_length(length, spec_);
  const std::size_t stride = static_cast<std::size_t>(spec_.frontend_stride);
  const std::size_t sources = static_cast<std::size_t>(spec_.sources);
  auto bind = [&](ad::Parameter<T>* p) { return p ? tape.parameter(*p) : ad::Var{}; };

  ad::Var x = ad::pad_time(tape, mixture, 0, padded - length);
  const ad::Var encoded = ad::relu(tape, ad::conv1d(tape, x, bind(encoder_), ad::Var{}, stride));
  ad::Var y = ad::global_layer_norm(tape, encoded, bind(norm_gain_), bind(norm_shift_));
  y = ad::pointwise_conv1d(tape, y, bind(bottleneck_weight_), bind(bottleneck_bias_));

  const std::size_t span = static_cast<std::size_t>(spec_.block_kernel - 1);
  ad::Var skips;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& blk = blocks_[i];
    const std::size_t dilation = static_cast<std::size_t>(spec_.dilation(static_cast<int>(i)));
    ad::Var h = ad::pointwise_conv1d(tape, y, bind(blk.in_weight), bind(blk.in_bias));
    h = ad::prelu(tape, h, bind(blk.in_slope));
    h = ad::global_layer_norm(tape, h, bind(blk.in_gain), bind(blk.in_shift));
    const std::size_t left = span * dilation / 2;
    h = ad::pad_time(tape, h, left, span * dilation - left);
    h = ad::depthwise_conv1d(tape, h, bind(blk.dw_weight), bind(blk.dw_bias), 1, dilation);
    h = ad::prelu(tape, h, bind(blk.dw_slope));
    h = ad::global_layer_norm(tape, h, bind(blk.dw_gain), bind(blk.dw_shift));
    const ad::Var skip = ad::pointwise_conv1d(tape, h, bind(blk.skip_weight), bind(blk.skip_bias));
    skips = skips.valid() ? ad::add(tape, skips, skip) : skip;
    if (blk.res_weight) y = ad::add(tape, y, ad::pointwise_conv1d(tape, h, bind(blk.res_weight), bind(blk.res_bias)));
  }

  const ad::Var mask = ad::relu(tape, ad::pointwise_conv1d(tape, skips, bind(mask_head_), ad::Var{}));
  if (masks) *masks = mask;
  const ad::Var masked = ad::apply_masks(tape, encoded, mask, sources);
  ad::Var out = ad::conv_transpose1d(tape, masked, bind(decoder_), ad::Var{}, stride);
  out = ad::crop_time(tape, out, 0, length);
  return ad::reshape(tape, out, {batch, sources, static_cast<std::size_t>(spec_.audio_channels), length});
}

template class ConvTasnetModel<float>;
template class ConvTasnetModel<double>;
template class ConvTasnetModel<long double>;

}  // namespace wavesep::models
