#include <algorithm>

#include "kernels.hpp"
#include "wavesep/ad/ops.hpp"

namespace wavesep::ad {

using detail::require;
using detail::wants_grad;

template <typename T>
Var pad_time(Tape<T>& tape, Var x, std::size_t left, std::size_t right) {
  const Tensor<T>& xv = tape.value(x);
  require(xv.rank() >= 1, "pad_time: scalar input");
  const std::size_t length = xv.shape.back();
  const std::size_t rows = length == 0 ? 0 : xv.size() / length;
  const std::size_t out_len = left + length + right;
  Shape shape = xv.shape;
  shape.back() = out_len;
  Tensor<T> out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.data.data() + r * length, length, out.data.data() + r * out_len + left);
  }
  return tape.record(std::move(out), {x}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    auto& dx = t.grad(x);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t i = 0; i < length; ++i) dx[r * length + i] += dy[r * out_len + left + i];
    }
  });
}

template <typename T>
Var crop_time(Tape<T>& tape, Var x, std::size_t begin, std::size_t length) {
  const Tensor<T>& xv = tape.value(x);
  require(xv.rank() >= 1, "crop_time: scalar input");
  const std::size_t in_len = xv.shape.back();
  require(begin + length <= in_len, "crop_time: window [" + std::to_string(begin) + ", " +
                                        std::to_string(begin + length) + ") exceeds length " + std::to_string(in_len));
  const std::size_t rows = in_len == 0 ? 0 : xv.size() / in_len;
  Shape shape = xv.shape;
  shape.back() = length;
  Tensor<T> out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.data.data() + r * in_len + begin, length, out.data.data() + r * length);
  }
  return tape.record(std::move(out), {x}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    auto& dx = t.grad(x);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t i = 0; i < length; ++i) dx[r * in_len + begin + i] += dy[r * length + i];
    }
  });
}

template <typename T>
Var swap_last_axes(Tape<T>& tape, Var x) {
  const Tensor<T>& xv = tape.value(x);
  require(xv.rank() == 3, "swap_last_axes: input must be rank 3, got " + shape_string(xv.shape));
  const std::size_t batch = xv.shape[0], p = xv.shape[1], q = xv.shape[2];
  Tensor<T> out(Shape{batch, q, p});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < q; ++j) out.data[(b * q + j) * p + i] = xv.data[(b * p + i) * q + j];
    }
  }
  return tape.record(std::move(out), {x}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    auto& dx = t.grad(x);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < q; ++j) dx[(b * p + i) * q + j] += dy[(b * q + j) * p + i];
      }
    }
  });
}

template <typename T>
Var reshape(Tape<T>& tape, Var x, Shape shape) {
  const Tensor<T>& xv = tape.value(x);
  require(numel(shape) == xv.size(),
          "reshape: cannot view " + shape_string(xv.shape) + " as " + shape_string(shape));
  Tensor<T> out(std::move(shape), xv.data);
  return tape.record(std::move(out), {x}, [x](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    auto& dx = t.grad(x);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
  });
}

template <typename T>
Var concat_last(Tape<T>& tape, Var a, Var b) {
  const Tensor<T>& av = tape.value(a);
  const Tensor<T>& bv = tape.value(b);
  require(av.rank() >= 1 && av.rank() == bv.rank(), "concat_last: rank mismatch");
  require(std::equal(av.shape.begin(), av.shape.end() - 1, bv.shape.begin()),
          "concat_last: leading axes differ " + shape_string(av.shape) + " vs " + shape_string(bv.shape));
  const std::size_t p = av.shape.back(), q = bv.shape.back();
  const std::size_t rows = p == 0 ? (q == 0 ? 0 : bv.size() / q) : av.size() / p;
  Shape shape = av.shape;
  shape.back() = p + q;
  Tensor<T> out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data.data() + r * p, p, out.data.data() + r * (p + q));
    std::copy_n(bv.data.data() + r * q, q, out.data.data() + r * (p + q) + p);
  }
  return tape.record(std::move(out), {a, b}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    if (wants_grad(t, a)) {
      auto& da = t.grad(a);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < p; ++i) da[r * p + i] += dy[r * (p + q) + i];
      }
    }
    if (wants_grad(t, b)) {
      auto& db = t.grad(b);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < q; ++i) db[r * q + i] += dy[r * (p + q) + p + i];
      }
    }
  });
}

#define WAVESEP_INSTANTIATE(T)                                           \
  template Var pad_time<T>(Tape<T>&, Var, std::size_t, std::size_t);     \
  template Var crop_time<T>(Tape<T>&, Var, std::size_t, std::size_t);    \
  template Var swap_last_axes<T>(Tape<T>&, Var);                         \
  template Var reshape<T>(Tape<T>&, Var, Shape);                         \
  template Var concat_last<T>(Tape<T>&, Var, Var);

WAVESEP_INSTANTIATE(float)
WAVESEP_INSTANTIATE(double)
WAVESEP_INSTANTIATE(long double)
#undef WAVESEP_INSTANTIATE

}  // namespace wavesep::ad
