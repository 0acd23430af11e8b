#include <cmath>
#include <memory>
#include <type_traits>
#include <vector>

#include "kernels.hpp"
#include "wavesep/ad/ops.hpp"

namespace wavesep::ad {

using detail::require;
using detail::wants_grad;

template <typename T>
Var global_layer_norm(Tape<T>& tape, Var x, Var gain, Var bias, T eps) {
  // Statistics accumulate in at least double precision.
  using Acc = std::conditional_t<(sizeof(T) > sizeof(double)), T, double>;
  const Tensor<T>& xv = tape.value(x);
  require(xv.rank() == 3, "global_layer_norm: input must be (B, C, T), got " + shape_string(xv.shape));
  const std::size_t batch = xv.shape[0], channels = xv.shape[1], length = xv.shape[2];
  require(tape.shape(gain) == Shape{channels} && tape.shape(bias) == Shape{channels},
          "global_layer_norm: gain and bias must be (C)");
  const std::size_t plane = channels * length;

  // Normalized values and per-item inverse deviations are kept for the backward pass.
  auto normalized = std::make_shared<std::vector<T>>(xv.size());
  auto inv_std = std::make_shared<std::vector<T>>(batch);
  Tensor<T> out(xv.shape);
  const auto& g = tape.value(gain).data;
  const auto& beta = tape.value(bias).data;
  for (std::size_t b = 0; b < batch; ++b) {
    const T* xb = xv.data.data() + b * plane;
    Acc mean = 0.0;
    for (std::size_t i = 0; i < plane; ++i) mean += xb[i];
    mean /= static_cast<Acc>(plane);
    Acc var = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      const Acc d = xb[i] - mean;
      var += d * d;
    }
    var /= static_cast<Acc>(plane);
    const T is = static_cast<T>(1.0 / std::sqrt(var + static_cast<Acc>(eps)));
    (*inv_std)[b] = is;
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t t = 0; t < length; ++t) {
        const std::size_t i = b * plane + c * length + t;
        const T n = static_cast<T>(xb[c * length + t] - mean) * is;
        (*normalized)[i] = n;
        out.data[i] = g[c] * n + beta[c];
      }
    }
  }

  return tape.record(std::move(out), {x, gain, bias}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    const auto& g = t.value(gain).data;
    const auto& n = *normalized;
    const bool need_x = wants_grad(t, x), need_g = wants_grad(t, gain), need_b = wants_grad(t, bias);
    std::vector<T> dn(plane);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = b * plane;
      Acc mean_dn = 0.0, mean_dn_n = 0.0;
      for (std::size_t c = 0; c < channels; ++c) {
        T dg(0), db(0);
        for (std::size_t tt = 0; tt < length; ++tt) {
          const std::size_t i = off + c * length + tt;
          dg += dy[i] * n[i];
          db += dy[i];
          const T v = dy[i] * g[c];
          dn[c * length + tt] = v;
          mean_dn += v;
          mean_dn_n += v * n[i];
        }
        if (need_g) t.grad(gain)[c] += dg;
        if (need_b) t.grad(bias)[c] += db;
      }
      if (!need_x) continue;
      mean_dn /= static_cast<Acc>(plane);
      mean_dn_n /= static_cast<Acc>(plane);
      auto& dx = t.grad(x);
      const T is = (*inv_std)[b];
      for (std::size_t i = 0; i < plane; ++i) {
        dx[off + i] += is * static_cast<T>(dn[i] - mean_dn - n[off + i] * mean_dn_n);
      }
    }
  });
}

template Var global_layer_norm<float>(Tape<float>&, Var, Var, Var, float);
template Var global_layer_norm<double>(Tape<double>&, Var, Var, Var, double);
template Var global_layer_norm<long double>(Tape<long double>&, Var, Var, Var, long double);

}  // namespace wavesep::ad
