#include <cmath>
#include <memory>
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

template <typename T>
T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

}  // namespace

template <typename T>
Var linear(Tape<T>& tape, Var x, Var weight, Var bias) {
  const Shape& xs = tape.shape(x);
  const Shape& ws = tape.shape(weight);
  require(!xs.empty(), "linear: input must have at least one axis");
  require(ws.size() == 2, "linear: weight must be (C_out, C_in), got " + shape_string(ws));
  const std::size_t c_in = xs.back(), c_out = ws[0];
  require(ws[1] == c_in, "linear: dimension mismatch, input has " + std::to_string(c_in) + ", weight expects " +
                             std::to_string(ws[1]));
  if (bias.valid()) require(tape.shape(bias) == Shape{c_out}, "linear: bias must be (C_out)");
  const std::size_t rows = numel(xs) / c_in;
  Shape shape = xs;
  shape.back() = c_out;
  Tensor<T> out(shape);
  {
    ConstMatMap<T> xm(tape.value(x).data.data(), rows, c_in);
    ConstMatMap<T> w(tape.value(weight).data.data(), c_out, c_in);
    MatMap<T> y(out.data.data(), rows, c_out);
    y.noalias() = xm * w.transpose();
    if (bias.valid()) {
      const auto& b = tape.value(bias).data;
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t o = 0; o < c_out; ++o) y(r, o) += b[o];
      }
    }
  }
  return tape.record(std::move(out), {x, weight, bias}, [=](Tape<T>& t, Var self) {
    ConstMatMap<T> dy(t.grad(self).data(), rows, c_out);
    if (wants_grad(t, x)) {
      ConstMatMap<T> w(t.value(weight).data.data(), c_out, c_in);
      MatMap<T>(t.grad(x).data(), rows, c_in).noalias() += dy * w;
    }
    if (wants_grad(t, weight)) {
      ConstMatMap<T> xm(t.value(x).data.data(), rows, c_in);
      MatMap<T>(t.grad(weight).data(), c_out, c_in).noalias() += dy.transpose() * xm;
    }
    if (wants_grad(t, bias)) {
      auto& db = t.grad(bias);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t o = 0; o < c_out; ++o) db[o] += dy(r, o);
      }
    }
  });
}

template <typename T>
Var lstm(Tape<T>& tape, Var x, Var w_ih, Var w_hh, Var bias, bool reverse) {
  const Shape& xs = tape.shape(x);
  require(xs.size() == 3, "lstm: input must be (B, T, I), got " + shape_string(xs));
  const std::size_t batch = xs[0], steps = xs[1], in = xs[2];
  const Shape& wis = tape.shape(w_ih);
  require(wis.size() == 2 && wis[0] % 4 == 0 && wis[1] == in, "lstm: w_ih must be (4H, I), got " + shape_string(wis));
  const std::size_t hidden = wis[0] / 4, g4 = 4 * hidden;
  require(tape.shape(w_hh) == Shape{g4, hidden}, "lstm: w_hh must be (4H, H)");
  require(tape.shape(bias) == Shape{g4}, "lstm: bias must be (4H)");

  auto time_at = [=](std::size_t s) { return reverse ? steps - 1 - s : s; };

  // Post-activation gates (B, T, 4H) and cell states (B, T, H), kept for backward.
  auto gates = std::make_shared<std::vector<T>>(batch * steps * g4);
  auto cells = std::make_shared<std::vector<T>>(batch * steps * hidden);
  Tensor<T> out(Shape{batch, steps, hidden});
  {
    MatMap<T> pre(gates->data(), batch * steps, g4);
    pre.noalias() = ConstMatMap<T>(tape.value(x).data.data(), batch * steps, in) *
                    ConstMatMap<T>(tape.value(w_ih).data.data(), g4, in).transpose();
    const auto& bv = tape.value(bias).data;
    ConstMatMap<T> whh(tape.value(w_hh).data.data(), g4, hidden);
    RowMatrix<T> h_prev = RowMatrix<T>::Zero(batch, hidden);
    RowMatrix<T> c_prev = RowMatrix<T>::Zero(batch, hidden);
    RowMatrix<T> rec(batch, g4);
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t tt = time_at(s);
      rec.noalias() = h_prev * whh.transpose();
      for (std::size_t b = 0; b < batch; ++b) {
        T* gr = gates->data() + (b * steps + tt) * g4;
        T* cr = cells->data() + (b * steps + tt) * hidden;
        T* hr = out.data.data() + (b * steps + tt) * hidden;
        for (std::size_t j = 0; j < g4; ++j) gr[j] += rec(b, j) + bv[j];
        for (std::size_t j = 0; j < hidden; ++j) {
          const T ig = sigmoid(gr[j]);
          const T fg = sigmoid(gr[hidden + j]);
          const T cg = std::tanh(gr[2 * hidden + j]);
          const T og = sigmoid(gr[3 * hidden + j]);
          gr[j] = ig;
          gr[hidden + j] = fg;
          gr[2 * hidden + j] = cg;
          gr[3 * hidden + j] = og;
          const T c = fg * c_prev(b, j) + ig * cg;
          cr[j] = c;
          hr[j] = og * std::tanh(c);
          c_prev(b, j) = c;
          h_prev(b, j) = hr[j];
        }
      }
    }
  }

  return tape.record(std::move(out), {x, w_ih, w_hh, bias}, [=](Tape<T>& t, Var self) {
    const auto& dy = t.grad(self);
    const auto& h = t.value(self).data;
    const auto& gv = *gates;
    const auto& cv = *cells;
    ConstMatMap<T> whh(t.value(w_hh).data.data(), g4, hidden);
    RowMatrix<T> dpre_all = RowMatrix<T>::Zero(batch * steps, g4);
    RowMatrix<T> dh_next = RowMatrix<T>::Zero(batch, hidden);
    RowMatrix<T> dc_next = RowMatrix<T>::Zero(batch, hidden);
    RowMatrix<T> dpre(batch, g4);
    RowMatrix<T> h_prev(batch, hidden);
    const bool need_whh = wants_grad(t, w_hh);

    for (std::size_t s = steps; s-- > 0;) {
      const std::size_t tt = time_at(s);
      for (std::size_t b = 0; b < batch; ++b) {
        const T* gr = gv.data() + (b * steps + tt) * g4;
        const T* cr = cv.data() + (b * steps + tt) * hidden;
        const T* cp = s > 0 ? cv.data() + (b * steps + time_at(s - 1)) * hidden : nullptr;
        const T* dyr = dy.data() + (b * steps + tt) * hidden;
        for (std::size_t j = 0; j < hidden; ++j) {
          const T ig = gr[j], fg = gr[hidden + j], cg = gr[2 * hidden + j], og = gr[3 * hidden + j];
          const T tc = std::tanh(cr[j]);
          const T dh = dyr[j] + dh_next(b, j);
          const T dc = dh * og * (T(1) - tc * tc) + dc_next(b, j);
          const T c_before = cp ? cp[j] : T(0);
          dpre(b, j) = dc * cg * ig * (T(1) - ig);
          dpre(b, hidden + j) = dc * c_before * fg * (T(1) - fg);
          dpre(b, 2 * hidden + j) = dc * ig * (T(1) - cg * cg);
          dpre(b, 3 * hidden + j) = dh * tc * og * (T(1) - og);
          dc_next(b, j) = dc * fg;
        }
        dpre_all.row(static_cast<Eigen::Index>(b * steps + tt)) = dpre.row(static_cast<Eigen::Index>(b));
        for (std::size_t j = 0; j < hidden; ++j) {
          h_prev(b, j) = s > 0 ? h[(b * steps + time_at(s - 1)) * hidden + j] : T(0);
        }
      }
      dh_next.noalias() = dpre * whh;
      if (need_whh && s > 0) MatMap<T>(t.grad(w_hh).data(), g4, hidden).noalias() += dpre.transpose() * h_prev;
    }

    if (wants_grad(t, x)) {
      MatMap<T>(t.grad(x).data(), batch * steps, in).noalias() +=
          dpre_all * ConstMatMap<T>(t.value(w_ih).data.data(), g4, in);
    }
    if (wants_grad(t, w_ih)) {
      MatMap<T>(t.grad(w_ih).data(), g4, in).noalias() +=
          dpre_all.transpose() * ConstMatMap<T>(t.value(x).data.data(), batch * steps, in);
    }
    if (wants_grad(t, bias)) {
      auto& db = t.grad(bias);
      for (Eigen::Index r = 0; r < dpre_all.rows(); ++r) {
        for (std::size_t j = 0; j < g4; ++j) db[j] += dpre_all(r, static_cast<Eigen::Index>(j));
      }
    }
  });
}

template <typename T>
Var bilstm(Tape<T>& tape, Var x, std::span<const BiLstmLayer> layers) {
  require(!layers.empty(), "bilstm: at least one layer required");
  Var h = x;
  for (const BiLstmLayer& layer : layers) {
    Var fwd = lstm(tape, h, layer.forward.w_ih, layer.forward.w_hh, layer.forward.bias, false);
    Var bwd = lstm(tape, h, layer.backward.w_ih, layer.backward.w_hh, layer.backward.bias, true);
    h = concat_last(tape, fwd, bwd);
  }
  return h;
}

#define WAVESEP_INSTANTIATE(T)                                      \
  template Var linear<T>(Tape<T>&, Var, Var, Var);                  \
  template Var lstm<T>(Tape<T>&, Var, Var, Var, Var, bool);         \
  template Var bilstm<T>(Tape<T>&, Var, std::span<const BiLstmLayer>);

WAVESEP_INSTANTIATE(float)
WAVESEP_INSTANTIATE(double)
WAVESEP_INSTANTIATE(long double)
#undef WAVESEP_INSTANTIATE

}  // namespace wavesep::ad
