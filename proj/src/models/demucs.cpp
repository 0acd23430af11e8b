#include "wavesep/models/demucs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wavesep/ad/ops.hpp"
#include "wavesep/models/init.hpp"

namespace wavesep::models {

std::size_t valid_length(std::size_t length, const DemucsSpec& spec) {
  const long long k = spec.kernel, s = spec.stride;
  long long n = static_cast<long long>(std::max<std::size_t>(length, 1));
  for (int i = 0; i < spec.depth; ++i) {
    // ceil((n - k) / s) + 1 for possibly negative n - k.
    const long long num = n - k;
    const long long frames = num <= 0 ? 1 : (num + s - 1) / s + 1;
    n = std::max<long long>(1, frames);
  }
  for (int i = 0; i < spec.depth; ++i) n = (n - 1) * s + k;
  return static_cast<std::size_t>(n);
}

template <typename T>
typename DemucsModel<T>::Conv DemucsModel<T>::add_conv(const std::string& name, ad::Shape weight_shape,
                                                       std::size_t fan_in, std::mt19937_64& rng) {
  // PyTorch layout: weight dim 0 is C_out for convolutions and C_in for transposed ones.
  const std::size_t bias_len = name.find("conv_tr") != std::string::npos ? weight_shape[1] : weight_shape[0];
  Conv c;
  c.weight = &this->params_.add(name + ".weight", std::move(weight_shape));
  c.bias = &this->params_.add(name + ".bias", {bias_len});
  kaiming_uniform(c.weight->value, fan_in, rng);
  kaiming_uniform(c.bias->value, fan_in, rng);
  return c;
}

template <typename T>
DemucsModel<T>::DemucsModel(const DemucsSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  std::mt19937_64 rng(seed);
  const auto channels = spec_.channels();
  const std::size_t k = static_cast<std::size_t>(spec_.kernel);

  std::size_t in = static_cast<std::size_t>(spec_.audio_channels);
  for (int i = 0; i < spec_.depth; ++i) {
    const std::size_t c = static_cast<std::size_t>(channels[static_cast<std::size_t>(i)]);
    const std::string prefix = "encoder." + std::to_string(i);
    Encoder e;
    e.conv = add_conv(prefix + ".conv", {c, in, k}, in * k, rng);
    e.rewrite = add_conv(prefix + ".rewrite", {spec_.glu ? 2 * c : c, c, 1}, c, rng);
    encoders_.push_back(e);
    in = c;
  }

  const std::size_t top = in;
  if (spec_.lstm_layers > 0) {
    const std::size_t hidden = top;
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (int layer = 0; layer < spec_.lstm_layers; ++layer) {
      const std::size_t input = layer == 0 ? top : 2 * hidden;
      for (const char* dir : {"forward", "backward"}) {
        const std::string prefix = "lstm." + std::to_string(layer) + "." + dir;
        Lstm l;
        l.w_ih = &this->params_.add(prefix + ".w_ih", {4 * hidden, input});
        l.w_hh = &this->params_.add(prefix + ".w_hh", {4 * hidden, hidden});
        l.bias = &this->params_.add(prefix + ".bias", {4 * hidden});
        uniform_fill(l.w_ih->value, bound, rng);
        uniform_fill(l.w_hh->value, bound, rng);
        uniform_fill(l.bias->value, bound, rng);
        lstm_.push_back(l);
      }
    }
    lstm_linear_.weight = &this->params_.add("lstm.linear.weight", {top, 2 * hidden});
    lstm_linear_.bias = &this->params_.add("lstm.linear.bias", {top});
    kaiming_uniform(lstm_linear_.weight->value, 2 * hidden, rng);
    kaiming_uniform(lstm_linear_.bias->value, 2 * hidden, rng);
  }

  decoders_.resize(static_cast<std::size_t>(spec_.depth));
  const std::size_t ctx = static_cast<std::size_t>(spec_.context);
  for (int i = spec_.depth - 1; i >= 0; --i) {
    const std::size_t c = static_cast<std::size_t>(channels[static_cast<std::size_t>(i)]);
    const std::size_t out = i == 0 ? static_cast<std::size_t>(spec_.sources * spec_.audio_channels)
                                   : static_cast<std::size_t>(channels[static_cast<std::size_t>(i - 1)]);
    const std::string prefix = "decoder." + std::to_string(i);
    Decoder d;
    d.rewrite = add_conv(prefix + ".rewrite", {spec_.decoder_glu ? 2 * c : c, c, ctx}, c * ctx, rng);
    d.conv_tr = add_conv(prefix + ".conv_tr", {c, out, k}, out * k, rng);
    decoders_[static_cast<std::size_t>(i)] = d;
  }

  if (spec_.rescale) rescale(spec_.rescale_reference);
}

template <typename T>
std::vector<double> DemucsModel<T>::rescale(double reference) {
  std::vector<double> alphas;
  for (auto& e : encoders_) {
    alphas.push_back(rescale_weights(*e.conv.weight, e.conv.bias, reference));
    alphas.push_back(rescale_weights(*e.rewrite.weight, e.rewrite.bias, reference));
  }
  for (auto& d : decoders_) {
    alphas.push_back(rescale_weights(*d.rewrite.weight, d.rewrite.bias, reference));
    alphas.push_back(rescale_weights(*d.conv_tr.weight, d.conv_tr.bias, reference));
  }
  return alphas;
}

template <typename T>
std::vector<std::string> DemucsModel<T>::convolution_weight_names() const {
  std::vector<std::string> names;
  for (const auto& e : encoders_) {
    names.push_back(e.conv.weight->name);
    names.push_back(e.rewrite.weight->name);
  }
  for (const auto& d : decoders_) {
    names.push_back(d.rewrite.weight->name);
    names.push_back(d.conv_tr.weight->name);
  }
  return names;
}

template <typename T>
ad::Var DemucsModel<T>::forward(ad::Tape<T>& tape, ad::Var mixture) {
  return forward_traced(tape, mixture, nullptr, nullptr);
}

template <typename T>
ad::Var DemucsModel<T>::forward_traced(ad::Tape<T>& tape, ad::Var mixture, std::vector<ad::Var>* encoder_outputs,
                                       std::vector<ad::Var>* decoder_outputs) {
  const ad::Shape& in_shape = tape.shape(mixture);
  if (in_shape.size() != 3 || in_shape[1] != static_cast<std::size_t>(spec_.audio_channels)) {
    throw std::invalid_argument("demucs: mixture must be (B, " + std::to_string(spec_.audio_channels) + ", T), got " +
                                ad::shape_string(in_shape));
  }
  for (T v : tape.value(mixture).data) {
    if (!std::isfinite(v)) throw std::invalid_argument("demucs: non-finite input");
  }
  const std::size_t batch = in_shape[0], length = in_shape[2];
  if (length == 0) throw std::invalid_argument("demucs: empty input");
  const std::size_t padded = valid_length(length, spec_);
  const std::size_t stride = static_cast<std::size_t>(spec_.stride);
  auto bind = [&](ad::Parameter<T>* p) { return p ? tape.parameter(*p) : ad::Var{}; };

  ad::Var x = ad::pad_time(tape, mixture, 0, padded - length);
  std::vector<ad::Var> skips;
  for (auto& e : encoders_) {
    x = ad::relu(tape, ad::conv1d(tape, x, bind(e.conv.weight), bind(e.conv.bias), stride));
    x = ad::pointwise_conv1d(tape, x, bind(e.rewrite.weight), bind(e.rewrite.bias));
    x = spec_.glu ? ad::glu(tape, x) : ad::relu(tape, x);
    skips.push_back(x);
    if (encoder_outputs) encoder_outputs->push_back(x);
  }

  if (spec_.lstm_layers > 0) {
    std::vector<ad::BiLstmLayer> layers;
    for (std::size_t l = 0; l < lstm_.size(); l += 2) {
      ad::BiLstmLayer layer;
      layer.forward = {bind(lstm_[l].w_ih), bind(lstm_[l].w_hh), bind(lstm_[l].bias)};
      layer.backward = {bind(lstm_[l + 1].w_ih), bind(lstm_[l + 1].w_hh), bind(lstm_[l + 1].bias)};
      layers.push_back(layer);
    }
    x = ad::swap_last_axes(tape, x);
    x = ad::bilstm<T>(tape, x, layers);
    x = ad::linear(tape, x, bind(lstm_linear_.weight), bind(lstm_linear_.bias));
    x = ad::swap_last_axes(tape, x);
  }

  const std::size_t left = static_cast<std::size_t>(spec_.context - 1) / 2;
  const std::size_t right = static_cast<std::size_t>(spec_.context - 1) - left;
  for (int i = spec_.depth - 1; i >= 0; --i) {
    auto& d = decoders_[static_cast<std::size_t>(i)];
    x = ad::add(tape, x, skips[static_cast<std::size_t>(i)]);
    x = ad::pad_time(tape, x, left, right);
    x = ad::conv1d(tape, x, bind(d.rewrite.weight), bind(d.rewrite.bias));
    x = spec_.decoder_glu ? ad::glu(tape, x) : ad::relu(tape, x);
    x = ad::conv_transpose1d(tape, x, bind(d.conv_tr.weight), bind(d.conv_tr.bias), stride);
    if (i > 0) x = ad::relu(tape, x);
    if (decoder_outputs) decoder_outputs->push_back(x);
  }

  x = ad::crop_time(tape, x, 0, length);
  return ad::reshape(tape, x,
                     {batch, static_cast<std::size_t>(spec_.sources), static_cast<std::size_t>(spec_.audio_channels),
                      length});
}

template class DemucsModel<float>;
template class DemucsModel<double>;
template class DemucsModel<long double>;

}  // namespace wavesep::models
