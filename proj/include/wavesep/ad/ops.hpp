#pragma once

#include <cstddef>
#include <span>

#include "wavesep/ad/tape.hpp"

// Differentiable operators. Layout conventions: 1-d signals are (batch,
// channels, time); sequence ops are (batch, time, features). An invalid Var
// passed as a bias means "no bias". No op pads implicitly.
namespace wavesep::ad {

/// Cross-correlation; weight (C_out, C_in, K), bias (C_out).
/// T_out = floor((T - (K - 1) * dilation - 1) / stride) + 1.
template <typename T>
Var conv1d(Tape<T>& tape, Var x, Var weight, Var bias, std::size_t stride = 1, std::size_t dilation = 1);

/// Adjoint of conv1d in its data argument; weight (C_in, C_out, K), output
/// length (T - 1) * stride + K.
template <typename T>
Var conv_transpose1d(Tape<T>& tape, Var x, Var weight, Var bias, std::size_t stride);

/// Per-channel convolution; weight (C, 1, K).
template <typename T>
Var depthwise_conv1d(Tape<T>& tape, Var x, Var weight, Var bias, std::size_t stride = 1, std::size_t dilation = 1);

/// Per-time-step channel mixing; weight (C_out, C_in, 1).
template <typename T>
Var pointwise_conv1d(Tape<T>& tape, Var x, Var weight, Var bias);

/// Affine map on the trailing axis; weight (C_out, C_in).
template <typename T>
Var linear(Tape<T>& tape, Var x, Var weight, Var bias);

template <typename T>
Var relu(Tape<T>& tape, Var x);

/// Leaky rectifier with one learnable slope per channel (axis 1).
template <typename T>
Var prelu(Tape<T>& tape, Var x, Var slope);

/// Splits axis 1 in halves (value, gate) and returns value * sigmoid(gate).
template <typename T>
Var glu(Tape<T>& tape, Var x);

template <typename T>
Var add(Tape<T>& tape, Var a, Var b);

template <typename T>
Var scale(Tape<T>& tape, Var x, T factor);

/// Normalizes each batch item with mean and variance taken jointly over
/// channels and time, then applies per-channel gain and bias.
template <typename T>
Var global_layer_norm(Tape<T>& tape, Var x, Var gain, Var bias, T eps = T(1e-8));

/// Single-direction LSTM over (B, T, I) with zero initial state. Gate rows of
/// w_ih (4H, I), w_hh (4H, H) and bias (4H) are ordered input, forget, cell,
/// output. Returns (B, T, H); `reverse` runs from the last step to the first.
template <typename T>
Var lstm(Tape<T>& tape, Var x, Var w_ih, Var w_hh, Var bias, bool reverse);

struct LstmWeights {
  Var w_ih;
  Var w_hh;
  Var bias;
};

struct BiLstmLayer {
  LstmWeights forward;
  LstmWeights backward;
};

/// Stacked bidirectional LSTM; each layer concatenates forward and backward
/// outputs, so the result is (B, T, 2H).
template <typename T>
Var bilstm(Tape<T>& tape, Var x, std::span<const BiLstmLayer> layers);

/// Zero padding on the last axis.
template <typename T>
Var pad_time(Tape<T>& tape, Var x, std::size_t left, std::size_t right);

/// Keeps [begin, begin + length) on the last axis.
template <typename T>
Var crop_time(Tape<T>& tape, Var x, std::size_t begin, std::size_t length);

/// (B, P, Q) -> (B, Q, P).
template <typename T>
Var swap_last_axes(Tape<T>& tape, Var x);

template <typename T>
Var reshape(Tape<T>& tape, Var x, Shape shape);

/// Concatenation on the last axis.
template <typename T>
Var concat_last(Tape<T>& tape, Var a, Var b);

/// encoded (B, N, F), masks (B, S * N, F) -> (B * S, N, F) with
/// out[b * S + s] = encoded[b] * masks[b, s * N : (s + 1) * N].
template <typename T>
Var apply_masks(Tape<T>& tape, Var encoded, Var masks, std::size_t sources);

/// Scalar sum(x * weights) against a fixed tensor of the same shape.
template <typename T>
Var inner_product(Tape<T>& tape, Var x, const Tensor<T>& weights);

}  // namespace wavesep::ad
