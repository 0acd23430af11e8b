#include <cmath>

#include "kernels.hpp"
#include "wavesep/ad/ops.hpp"

namespace wavesep::ad {

using detail::require;
using detail::wants_grad;

namespace {

template <typename T>
T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

}  // namespace

template <typename T>
Var relu(Tape<T>& tape, Var x) {
  const Tensor<T>& xv = tape.value(x);
  Tensor<T> out(xv.shape);
  for (std::size_t i = 0; i < xv.size(); ++i) out.data[i] = xv.data[i] > T(0) ? xv.data[i] : T(0);
  return tape.record(std::move(out), {x}, [x](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    const auto& xv = t.value(x).data;
    auto& dx = t.grad(x);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      if (xv[i] > T(0)) dx[i] += dy[i];
    }
  });
}

template <typename T>
Var prelu(Tape<T>& tape, Var x, Var slope) {
  const Tensor<T>& xv = tape.value(x);
  require(xv.rank() >= 2, "prelu: input needs a channel axis");
  const std::size_t batch = xv.shape[0], channels = xv.shape[1];
  const std::size_t inner = xv.size() / (batch * channels);
  require(tape.shape(slope) == Shape{channels}, "prelu: slope must have one entry per channel");
  const auto& a = tape.value(slope).data;
  Tensor<T> out(xv.shape);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (b * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const T v = xv.data[base + i];
        out.data[base + i] = v >= T(0) ? v : a[c] * v;
      }
    }
  }
  return tape.record(std::move(out), {x, slope}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    const auto& xv = t.value(x).data;
    const auto& a = t.value(slope).data;
    const bool need_x = wants_grad(t, x), need_a = wants_grad(t, slope);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t base = (b * channels + c) * inner;
        T da(0);
        for (std::size_t i = 0; i < inner; ++i) {
          const T v = xv[base + i];
          if (v >= T(0)) {
            if (need_x) t.grad(x)[base + i] += dy[base + i];
          } else {
            if (need_x) t.grad(x)[base + i] += a[c] * dy[base + i];
            da += v * dy[base + i];
          }
        }
        if (need_a) t.grad(slope)[c] += da;
      }
    }
  });
}

template <typename T>
Var glu(Tape<T>& tape, Var x) {
  const Tensor<T>& xv = tape.value(x);
  require(xv.rank() >= 2, "glu: input needs a channel axis");
  require(xv.shape[1] % 2 == 0, "glu: channel count must be even, got " + std::to_string(xv.shape[1]));
  const std::size_t batch = xv.shape[0], half = xv.shape[1] / 2;
  const std::size_t inner = xv.size() / (batch * 2 * half);
  Shape shape = xv.shape;
  shape[1] = half;
  Tensor<T> out(shape);
  for (std::size_t b = 0; b < batch; ++b) {
    const T* value = xv.data.data() + b * 2 * half * inner;
    const T* gate = value + half * inner;
    T* y = out.data.data() + b * half * inner;
    for (std::size_t i = 0; i < half * inner; ++i) y[i] = value[i] * sigmoid(gate[i]);
  }
  return tape.record(std::move(out), {x}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    const auto& xv = t.value(x).data;
    auto& dx = t.grad(x);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t vo = b * 2 * half * inner;
      const std::size_t go = vo + half * inner;
      const std::size_t yo = b * half * inner;
      for (std::size_t i = 0; i < half * inner; ++i) {
        const T s = sigmoid(xv[go + i]);
        dx[vo + i] += dy[yo + i] * s;
        dx[go + i] += dy[yo + i] * xv[vo + i] * s * (T(1) - s);
      }
    }
  });
}

template <typename T>
Var add(Tape<T>& tape, Var a, Var b) {
  const Tensor<T>& av = tape.value(a);
  const Tensor<T>& bv = tape.value(b);
  require(av.shape == bv.shape, "add: shape mismatch " + shape_string(av.shape) + " vs " + shape_string(bv.shape));
  Tensor<T> out(av.shape);
  for (std::size_t i = 0; i < av.size(); ++i) out.data[i] = av.data[i] + bv.data[i];
  return tape.record(std::move(out), {a, b}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    for (Var v : {a, b}) {
      if (!wants_grad(t, v)) continue;
      auto& d = t.grad(v);
      for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i];
    }
  });
}

template <typename T>
Var scale(Tape<T>& tape, Var x, T factor) {
  const Tensor<T>& xv = tape.value(x);
  Tensor<T> out(xv.shape);
  for (std::size_t i = 0; i < xv.size(); ++i) out.data[i] = xv.data[i] * factor;
  return tape.record(std::move(out), {x}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    auto& dx = t.grad(x);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * factor;
  });
}

template <typename T>
Var apply_masks(Tape<T>& tape, Var encoded, Var masks, std::size_t sources) {
  const Shape& es = tape.shape(encoded);
  const Shape& ms = tape.shape(masks);
  require(es.size() == 3, "apply_masks: encoded must be (B, N, F)");
  const std::size_t batch = es[0], n = es[1], frames = es[2];
  require(ms == Shape{batch, sources * n, frames},
          "apply_masks: masks must be " + shape_string({batch, sources * n, frames}) + ", got " + shape_string(ms));
  const std::size_t plane = n * frames;
  Tensor<T> out(Shape{batch * sources, n, frames});
  {
    const auto& e = tape.value(encoded).data;
    const auto& m = tape.value(masks).data;
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t s = 0; s < sources; ++s) {
        const std::size_t mo = (b * sources + s) * plane;
        for (std::size_t i = 0; i < plane; ++i) out.data[mo + i] = e[b * plane + i] * m[mo + i];
      }
    }
  }
  return tape.record(std::move(out), {encoded, masks}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    const auto& e = t.value(encoded).data;
    const auto& m = t.value(masks).data;
    const bool need_e = wants_grad(t, encoded), need_m = wants_grad(t, masks);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t s = 0; s < sources; ++s) {
        const std::size_t mo = (b * sources + s) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          if (need_e) t.grad(encoded)[b * plane + i] += dy[mo + i] * m[mo + i];
          if (need_m) t.grad(masks)[mo + i] += dy[mo + i] * e[b * plane + i];
        }
      }
    }
  });
}

template <typename T>
Var inner_product(Tape<T>& tape, Var x, const Tensor<T>& weights) {
  const Tensor<T>& xv = tape.value(x);
  require(xv.shape == weights.shape, "inner_product: shape mismatch");
  T sum(0);
  for (std::size_t i = 0; i < xv.size(); ++i) sum += xv.data[i] * weights.data[i];
  return tape.record(Tensor<T>(Shape{1}, std::vector<T>{sum}), {x}, [x, weights](Tape<T>& t, Var self) {
    const T g = t.grad(self)[0];
    auto& dx = t.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g * weights.data[i];
  });
}

#define WAVESEP_INSTANTIATE(T)                                         \
  template Var relu<T>(Tape<T>&, Var);                                 \
  template Var prelu<T>(Tape<T>&, Var, Var);                           \
  template Var glu<T>(Tape<T>&, Var);                                  \
  template Var add<T>(Tape<T>&, Var, Var);                             \
  template Var scale<T>(Tape<T>&, Var, T);                             \
  template Var apply_masks<T>(Tape<T>&, Var, Var, std::size_t);        \
  template Var inner_product<T>(Tape<T>&, Var, const Tensor<T>&);

WAVESEP_INSTANTIATE(float)
WAVESEP_INSTANTIATE(double)
WAVESEP_INSTANTIATE(long double)
#undef WAVESEP_INSTANTIATE

}  // namespace wavesep::ad
