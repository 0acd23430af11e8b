#include "wavesep/ad/tape.hpp"

#include <sstream>
#include <stdexcept>

namespace wavesep::ad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? ", " : "") << shape[i];
  out << ')';
  return out.str();
}

template <typename T>
Tensor<T>::Tensor(Shape s, T fill) : shape(std::move(s)), data(numel(shape), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape s, std::vector<T> values) : shape(std::move(s)), data(std::move(values)) {
  if (numel(shape) != data.size()) {
    throw std::invalid_argument("tensor data size " + std::to_string(data.size()) + " does not match shape " +
                                shape_string(shape));
  }
}

template <typename T>
Parameter<T>& ParameterStore<T>::add(const std::string& name, Shape shape) {
  if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter<T>>();
  p->name = name;
  p->value = Tensor<T>(std::move(shape));
  p->zero_grad();
  params_.push_back(std::move(p));
  return *params_.back();
}

template <typename T>
Parameter<T>& ParameterStore<T>::get(const std::string& name) {
  if (auto* p = find(name)) return *p;
  throw std::out_of_range("no parameter named " + name);
}

template <typename T>
const Parameter<T>& ParameterStore<T>::get(const std::string& name) const {
  if (const auto* p = find(name)) return *p;
  throw std::out_of_range("no parameter named " + name);
}

template <typename T>
Parameter<T>* ParameterStore<T>::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

template <typename T>
const Parameter<T>* ParameterStore<T>::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

template <typename T>
std::size_t ParameterStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

template <typename T>
Var Tape<T>::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::constant(Tensor<T> value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::variable(Tensor<T> value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = grad_enabled_;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::parameter(Parameter<T>& p) {
  Node n;
  n.param = &p;
  n.requires_grad = grad_enabled_;
  if (grad_enabled_ && p.grad.size() != p.value.size()) p.zero_grad();
  return push(std::move(n));
}

template <typename T>
const Tensor<T>& Tape<T>::value(Var v) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(v.id));
  return n.param ? n.param->value : n.value;
}

template <typename T>
std::vector<T>& Tape<T>::grad(Var v) {
  Node& n = nodes_.at(static_cast<std::size_t>(v.id));
  if (n.param) return n.param->grad;
  if (n.grad.empty()) n.grad.assign(n.value.size(), T(0));
  return n.grad;
}

template <typename T>
Var Tape<T>::record(Tensor<T> value, std::initializer_list<Var> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_) {
    for (Var in : inputs) {
      if (requires_grad(in)) {
        n.requires_grad = true;
        break;
      }
    }
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

template <typename T>
void Tape<T>::backward(Var root) {
  if (value(root).size() != 1) throw std::invalid_argument("backward(root) needs a scalar root");
  const T one(1);
  backward(root, std::span<const T>(&one, 1));
}

template <typename T>
void Tape<T>::backward(Var root, std::span<const T> seed) {
  if (!grad_enabled_) throw std::logic_error("backward on a tape with gradients disabled");
  if (seed.size() != value(root).size()) throw std::invalid_argument("backward seed size mismatch");
  auto& g = grad(root);
  for (std::size_t i = 0; i < seed.size(); ++i) g[i] += seed[i];
  run_backward(root);
}

template <typename T>
void Tape<T>::run_backward(Var root) {
  for (std::int32_t i = root.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, Var{i});
  }
}

template struct Tensor<float>;
template struct Tensor<double>;
template class ParameterStore<float>;
template class ParameterStore<double>;
template class Tape<float>;
template class Tape<double>;
template struct Tensor<long double>;
template class ParameterStore<long double>;
template class Tape<long double>;

}  // namespace wavesep::ad
