#include "wavesep/train/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace wavesep::train {

LossKind parse_loss(const std::string& name) {
  if (name == "l1") return LossKind::l1;
  if (name == "l2") return LossKind::l2;
  throw std::invalid_argument("unknown loss '" + name + "' (expected l1 or l2)");
}

std::string loss_name(LossKind kind) { return kind == LossKind::l1 ? "l1" : "l2"; }

namespace {

template <typename T>
void check_pair(const ad::Tape<T>& tape, ad::Var estimate, ad::Var target) {
  if (tape.shape(estimate) != tape.shape(target)) {
    throw std::invalid_argument("loss: estimate " + ad::shape_string(tape.shape(estimate)) + " and target " +
                                ad::shape_string(tape.shape(target)) + " differ");
  }
  if (tape.value(estimate).size() == 0) throw std::invalid_argument("loss: empty tensors");
}

template <typename T>
ad::Var reduce(ad::Tape<T>& tape, LossKind kind, ad::Var estimate, ad::Var target) {
  check_pair(tape, estimate, target);
  const auto& e = tape.value(estimate).data;
  const auto& x = tape.value(target).data;
  const std::size_t n = e.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(e[i]) - static_cast<double>(x[i]);
    acc += kind == LossKind::l1 ? std::abs(d) : d * d;
  }
  ad::Tensor<T> out(ad::Shape{1}, static_cast<T>(acc / static_cast<double>(n)));
  return tape.record(std::move(out), {estimate, target}, [=](ad::Tape<T>& t, ad::Var self) {
    const T g = t.grad(self)[0] / static_cast<T>(n);
    const auto& e = t.value(estimate).data;
    const auto& x = t.value(target).data;
    const bool need_e = t.requires_grad(estimate), need_x = t.requires_grad(target);
    std::vector<T>* de = need_e ? &t.grad(estimate) : nullptr;
    std::vector<T>* dx = need_x ? &t.grad(target) : nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      const T d = e[i] - x[i];
      T v;
      if (kind == LossKind::l1) {
        v = d > T(0) ? g : (d < T(0) ? -g : T(0));
      } else {
        v = T(2) * d * g;
      }
      if (de) (*de)[i] += v;
      if (dx) (*dx)[i] -= v;
    }
  });
}

}  // namespace

template <typename T>
ad::Var loss_l1(ad::Tape<T>& tape, ad::Var estimate, ad::Var target) {
  return reduce(tape, LossKind::l1, estimate, target);
}

template <typename T>
ad::Var loss_l2(ad::Tape<T>& tape, ad::Var estimate, ad::Var target) {
  return reduce(tape, LossKind::l2, estimate, target);
}

template <typename T>
ad::Var loss(ad::Tape<T>& tape, LossKind kind, ad::Var estimate, ad::Var target) {
  return reduce(tape, kind, estimate, target);
}

template <typename T>
std::vector<double> per_source_loss(LossKind kind, const ad::Tensor<T>& estimate, const ad::Tensor<T>& target) {
  if (estimate.shape != target.shape || estimate.rank() != 4) {
    throw std::invalid_argument("per_source_loss: expected equal (B, S, C, T) shapes");
  }
  const std::size_t batch = estimate.dim(0), sources = estimate.dim(1);
  const std::size_t inner = estimate.dim(2) * estimate.dim(3);
  std::vector<double> out(sources, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t s = 0; s < sources; ++s) {
      const std::size_t base = (b * sources + s) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const double d = static_cast<double>(estimate.data[base + i]) - static_cast<double>(target.data[base + i]);
        out[s] += kind == LossKind::l1 ? std::abs(d) : d * d;
      }
    }
  }
  for (double& v : out) v /= static_cast<double>(batch * inner);
  return out;
}

#define WAVESEP_INSTANTIATE(T)                                                                   \
  template ad::Var loss_l1<T>(ad::Tape<T>&, ad::Var, ad::Var);                                   \
  template ad::Var loss_l2<T>(ad::Tape<T>&, ad::Var, ad::Var);                                   \
  template ad::Var loss<T>(ad::Tape<T>&, LossKind, ad::Var, ad::Var);                            \
  template std::vector<double> per_source_loss<T>(LossKind, const ad::Tensor<T>&, const ad::Tensor<T>&);
WAVESEP_INSTANTIATE(float)
WAVESEP_INSTANTIATE(double)
WAVESEP_INSTANTIATE(long double)
#undef WAVESEP_INSTANTIATE

}  // namespace wavesep::train
