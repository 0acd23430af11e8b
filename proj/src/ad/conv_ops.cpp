#include <algorithm>
#include <vector>

#include "kernels.hpp"
#include "wavesep/ad/ops.hpp"

namespace wavesep::ad {

using detail::ConstMatMap;
using detail::MatMap;
using detail::require;
using detail::RowMatrix;
using detail::wants_grad;

namespace {

// col[(c * K + k), t] = src[c, t * stride + k * dilation]
template <typename T>
void im2col(const T* src, std::size_t channels, std::size_t length, std::size_t kernel, std::size_t stride,
            std::size_t dilation, std::size_t out_length, T* col) {
  for (std::size_t c = 0; c < channels; ++c) {
    const T* row_src = src + c * length;
    for (std::size_t k = 0; k < kernel; ++k) {
      T* row = col + (c * kernel + k) * out_length;
      const T* base = row_src + k * dilation;
      if (stride == 1) {
        std::copy(base, base + out_length, row);
      } else {
        for (std::size_t t = 0; t < out_length; ++t) row[t] = base[t * stride];
      }
    }
  }
}

// Scatter-add inverse of im2col.
template <typename T>
void col2im(const T* col, std::size_t channels, std::size_t length, std::size_t kernel, std::size_t stride,
            std::size_t dilation, std::size_t out_length, T* dst) {
  for (std::size_t c = 0; c < channels; ++c) {
    T* row_dst = dst + c * length;
    for (std::size_t k = 0; k < kernel; ++k) {
      const T* row = col + (c * kernel + k) * out_length;
      T* base = row_dst + k * dilation;
      if (stride == 1) {
        for (std::size_t t = 0; t < out_length; ++t) base[t] += row[t];
      } else {
        for (std::size_t t = 0; t < out_length; ++t) base[t * stride] += row[t];
      }
    }
  }
}

template <typename T>
void add_bias(T* out, const T* bias, std::size_t channels, std::size_t length) {
  for (std::size_t c = 0; c < channels; ++c) {
    const T b = bias[c];
    T* row = out + c * length;
    for (std::size_t t = 0; t < length; ++t) row[t] += b;
  }
}

template <typename T>
void accumulate_bias_grad(const T* dy, std::size_t channels, std::size_t length, T* db) {
  for (std::size_t c = 0; c < channels; ++c) {
    const T* row = dy + c * length;
    T sum(0);
    for (std::size_t t = 0; t < length; ++t) sum += row[t];
    db[c] += sum;
  }
}

}  // namespace

template <typename T>
Var conv1d(Tape<T>& tape, Var x, Var weight, Var bias, std::size_t stride, std::size_t dilation) {
  const Shape& xs = tape.shape(x);
  const Shape& ws = tape.shape(weight);
  require(xs.size() == 3, "conv1d: input must be (B, C, T), got " + shape_string(xs));
  require(ws.size() == 3, "conv1d: weight must be (C_out, C_in, K), got " + shape_string(ws));
  require(stride >= 1 && dilation >= 1, "conv1d: stride and dilation must be positive");
  const std::size_t batch = xs[0], c_in = xs[1], length = xs[2];
  const std::size_t c_out = ws[0], kernel = ws[2];
  require(ws[1] == c_in, "conv1d: channel mismatch, input has " + std::to_string(c_in) + ", weight expects " +
                             std::to_string(ws[1]));
  const std::size_t span = (kernel - 1) * dilation + 1;
  require(length >= span, "conv1d: input length " + std::to_string(length) + " shorter than kernel span " +
                              std::to_string(span));
  if (bias.valid()) require(tape.shape(bias) == Shape{c_out}, "conv1d: bias must be (C_out)");
  const std::size_t out_len = (length - span) / stride + 1;
  const bool direct = kernel == 1 && stride == 1;

  Tensor<T> out(Shape{batch, c_out, out_len});
  {
    const Tensor<T>& xv = tape.value(x);
    ConstMatMap<T> w(tape.value(weight).data.data(), c_out, c_in * kernel);
    std::vector<T> col(direct ? 0 : c_in * kernel * out_len);
    for (std::size_t b = 0; b < batch; ++b) {
      const T* xb = xv.data.data() + b * c_in * length;
      MatMap<T> yb(out.data.data() + b * c_out * out_len, c_out, out_len);
      if (direct) {
        yb.noalias() = w * ConstMatMap<T>(xb, c_in, length);
      } else {
        im2col(xb, c_in, length, kernel, stride, dilation, out_len, col.data());
        yb.noalias() = w * ConstMatMap<T>(col.data(), c_in * kernel, out_len);
      }
      if (bias.valid()) add_bias(yb.data(), tape.value(bias).data.data(), c_out, out_len);
    }
  }

  return tape.record(std::move(out), {x, weight, bias}, [=](Tape<T>& t, Var self) {
    const std::vector<T>& dy = t.grad(self);
    const Tensor<T>& xv = t.value(x);
    ConstMatMap<T> w(t.value(weight).data.data(), c_out, c_in * kernel);
    const bool need_x = wants_grad(t, x), need_w = wants_grad(t, weight), need_b = wants_grad(t, bias);
    std::vector<T> col(direct ? 0 : c_in * kernel * out_len);
    std::vector<T> dcol(direct || !need_x ? 0 : c_in * kernel * out_len);
    for (std::size_t b = 0; b < batch; ++b) {
      const T* xb = xv.data.data() + b * c_in * length;
      ConstMatMap<T> dyb(dy.data() + b * c_out * out_len, c_out, out_len);
      if (need_w) {
        MatMap<T> dw(t.grad(weight).data(), c_out, c_in * kernel);
        if (direct) {
          dw.noalias() += dyb * ConstMatMap<T>(xb, c_in, length).transpose();
        } else {
          im2col(xb, c_in, length, kernel, stride, dilation, out_len, col.data());
          dw.noalias() += dyb * ConstMatMap<T>(col.data(), c_in * kernel, out_len).transpose();
        }
      }
      if (need_x) {
        T* dxb = t.grad(x).data() + b * c_in * length;
        if (direct) {
          MatMap<T>(dxb, c_in, length).noalias() += w.transpose() * dyb;
        } else {
          MatMap<T>(dcol.data(), c_in * kernel, out_len).noalias() = w.transpose() * dyb;
          col2im(dcol.data(), c_in, length, kernel, stride, dilation, out_len, dxb);
        }
      }
      if (need_b) accumulate_bias_grad(dyb.data(), c_out, out_len, t.grad(bias).data());
    }
  });
}

template <typename T>
Var conv_transpose1d(Tape<T>& tape, Var x, Var weight, Var bias, std::size_t stride) {
  const Shape& xs = tape.shape(x);
  const Shape& ws = tape.shape(weight);
  require(xs.size() == 3, "conv_transpose1d: input must be (B, C, T), got " + shape_string(xs));
  require(ws.size() == 3, "conv_transpose1d: weight must be (C_in, C_out, K), got " + shape_string(ws));
  require(stride >= 1, "conv_transpose1d: stride must be positive");
  const std::size_t batch = xs[0], c_in = xs[1], length = xs[2];
  const std::size_t c_out = ws[1], kernel = ws[2];
  require(ws[0] == c_in, "conv_transpose1d: channel mismatch, input has " + std::to_string(c_in) +
                             ", weight expects " + std::to_string(ws[0]));
  require(length >= 1, "conv_transpose1d: empty input");
  if (bias.valid()) require(tape.shape(bias) == Shape{c_out}, "conv_transpose1d: bias must be (C_out)");
  const std::size_t out_len = (length - 1) * stride + kernel;

  Tensor<T> out(Shape{batch, c_out, out_len});
  {
    const Tensor<T>& xv = tape.value(x);
    ConstMatMap<T> w(tape.value(weight).data.data(), c_in, c_out * kernel);
    RowMatrix<T> col(c_out * kernel, length);
    for (std::size_t b = 0; b < batch; ++b) {
      col.noalias() = w.transpose() * ConstMatMap<T>(xv.data.data() + b * c_in * length, c_in, length);
      T* yb = out.data.data() + b * c_out * out_len;
      col2im(col.data(), c_out, out_len, kernel, stride, 1, length, yb);
      if (bias.valid()) add_bias(yb, tape.value(bias).data.data(), c_out, out_len);
    }
  }

  return tape.record(std::move(out), {x, weight, bias}, [=](Tape<T>& t, Var self) {
    const std::vector<T>& dy = t.grad(self);
    const Tensor<T>& xv = t.value(x);
    ConstMatMap<T> w(t.value(weight).data.data(), c_in, c_out * kernel);
    const bool need_x = wants_grad(t, x), need_w = wants_grad(t, weight), need_b = wants_grad(t, bias);
    std::vector<T> dcol(c_out * kernel * length);
    for (std::size_t b = 0; b < batch; ++b) {
      const T* dyb = dy.data() + b * c_out * out_len;
      if (need_x || need_w) {
        im2col(dyb, c_out, out_len, kernel, stride, 1, length, dcol.data());
        ConstMatMap<T> dc(dcol.data(), c_out * kernel, length);
        if (need_x) MatMap<T>(t.grad(x).data() + b * c_in * length, c_in, length).noalias() += w * dc;
        if (need_w) {
          MatMap<T>(t.grad(weight).data(), c_in, c_out * kernel).noalias() +=
              ConstMatMap<T>(xv.data.data() + b * c_in * length, c_in, length) * dc.transpose();
        }
      }
      if (need_b) accumulate_bias_grad(dyb, c_out, out_len, t.grad(bias).data());
    }
  });
}

template <typename T>
Var depthwise_conv1d(Tape<T>& tape, Var x, Var weight, Var bias, std::size_t stride, std::size_t dilation) {
  const Shape& xs = tape.shape(x);
  const Shape& ws = tape.shape(weight);
  require(xs.size() == 3, "depthwise_conv1d: input must be (B, C, T), got " + shape_string(xs));
  require(ws.size() == 3 && ws[1] == 1, "depthwise_conv1d: weight must be (C, 1, K), got " + shape_string(ws));
  require(stride >= 1 && dilation >= 1, "depthwise_conv1d: stride and dilation must be positive");
  const std::size_t batch = xs[0], channels = xs[1], length = xs[2], kernel = ws[2];
  require(ws[0] == channels, "depthwise_conv1d: channel mismatch");
  const std::size_t span = (kernel - 1) * dilation + 1;
  require(length >= span, "depthwise_conv1d: input length " + std::to_string(length) + " shorter than kernel span " +
                              std::to_string(span));
  if (bias.valid()) require(tape.shape(bias) == Shape{channels}, "depthwise_conv1d: bias must be (C)");
  const std::size_t out_len = (length - span) / stride + 1;

  Tensor<T> out(Shape{batch, channels, out_len});
  {
    const T* xv = tape.value(x).data.data();
    const T* wv = tape.value(weight).data.data();
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < channels; ++c) {
        const T* xr = xv + (b * channels + c) * length;
        T* yr = out.data.data() + (b * channels + c) * out_len;
        const T init = bias.valid() ? tape.value(bias).data[c] : T(0);
        std::fill(yr, yr + out_len, init);
        for (std::size_t k = 0; k < kernel; ++k) {
          const T wk = wv[c * kernel + k];
          const T* base = xr + k * dilation;
          for (std::size_t t = 0; t < out_len; ++t) yr[t] += wk * base[t * stride];
        }
      }
    }
  }

  return tape.record(std::move(out), {x, weight, bias}, [=](Tape<T>& t, Var self) {
    const std::vector<T>& dy = t.grad(self);
    const T* xv = t.value(x).data.data();
    const T* wv = t.value(weight).data.data();
    const bool need_x = wants_grad(t, x), need_w = wants_grad(t, weight), need_b = wants_grad(t, bias);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < channels; ++c) {
        const T* dyr = dy.data() + (b * channels + c) * out_len;
        const T* xr = xv + (b * channels + c) * length;
        for (std::size_t k = 0; k < kernel; ++k) {
          if (need_w) {
            T acc(0);
            const T* base = xr + k * dilation;
            for (std::size_t tt = 0; tt < out_len; ++tt) acc += dyr[tt] * base[tt * stride];
            t.grad(weight)[c * kernel + k] += acc;
          }
          if (need_x) {
            T* dxr = t.grad(x).data() + (b * channels + c) * length + k * dilation;
            const T wk = wv[c * kernel + k];
            for (std::size_t tt = 0; tt < out_len; ++tt) dxr[tt * stride] += wk * dyr[tt];
          }
        }
        if (need_b) {
          T acc(0);
          for (std::size_t tt = 0; tt < out_len; ++tt) acc += dyr[tt];
          t.grad(bias)[c] += acc;
        }
      }
    }
  });
}

template <typename T>
Var pointwise_conv1d(Tape<T>& tape, Var x, Var weight, Var bias) {
  const Shape& ws = tape.shape(weight);
  require(ws.size() == 3 && ws[2] == 1, "pointwise_conv1d: weight must be (C_out, C_in, 1), got " + shape_string(ws));
  return conv1d(tape, x, weight, bias, 1, 1);
}

#define WAVESEP_INSTANTIATE(T)                                                             \
  template Var conv1d<T>(Tape<T>&, Var, Var, Var, std::size_t, std::size_t);             \
  template Var conv_transpose1d<T>(Tape<T>&, Var, Var, Var, std::size_t);                \
  template Var depthwise_conv1d<T>(Tape<T>&, Var, Var, Var, std::size_t, std::size_t);   \
  template Var pointwise_conv1d<T>(Tape<T>&, Var, Var, Var);

WAVESEP_INSTANTIATE(float)
WAVESEP_INSTANTIATE(double)
WAVESEP_INSTANTIATE(long double)
#undef WAVESEP_INSTANTIATE

}  // namespace wavesep::ad
