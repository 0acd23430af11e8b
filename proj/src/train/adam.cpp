#include "wavesep/train/adam.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "wavesep/error.hpp"

namespace wavesep::train {

template <typename T>
Adam<T>::Adam(ad::ParameterStore<T>& params, AdamOptions options) : params_(&params), options_(options) {
  if (!(options_.learning_rate > 0.0) || !(options_.eps > 0.0) || options_.beta1 < 0.0 || options_.beta1 >= 1.0 ||
      options_.beta2 < 0.0 || options_.beta2 >= 1.0) {
    throw std::invalid_argument("adam: invalid hyper-parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params[i].value.size(), 0.0);
    v_.emplace_back(params[i].value.size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step() {
  auto& params = *params_;
  if (params.size() != m_.size()) throw std::logic_error("adam: parameter store changed size");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (p.grad.size() != p.value.size()) throw std::logic_error("adam: gradient of " + p.name + " not allocated");
    for (T g : p.grad) {
      if (!std::isfinite(static_cast<double>(g))) throw NumericError("adam: non-finite gradient in " + p.name);
    }
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double g = static_cast<double>(p.grad[k]);
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      const double update = options_.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + options_.eps);
      p.value.data[k] = static_cast<T>(static_cast<double>(p.value.data[k]) - update);
    }
  }
}

template <typename T>
std::vector<ad::NamedTensor<double>> Adam<T>::state() const {
  std::vector<ad::NamedTensor<double>> out;
  out.push_back({"step", ad::Tensor<double>(ad::Shape{1}, static_cast<double>(step_))});
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const auto& p = (*params_)[i];
    out.push_back({p.name + ".m", ad::Tensor<double>(p.value.shape, m_[i])});
    out.push_back({p.name + ".v", ad::Tensor<double>(p.value.shape, v_[i])});
  }
  return out;
}

template <typename T>
void Adam<T>::load_state(const std::vector<ad::NamedTensor<double>>& tensors) {
  std::map<std::string, const ad::Tensor<double>*> by_name;
  for (const auto& t : tensors) by_name[t.name] = &t.tensor;
  auto fetch = [&](const std::string& name, std::size_t size) -> const ad::Tensor<double>& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw IoError("optimizer state lacks " + name);
    if (it->second->size() != size) throw IoError("optimizer state " + name + " has the wrong size");
    return *it->second;
  };
  const double step = fetch("step", 1).data[0];
  if (step < 0.0 || step != std::floor(step)) throw IoError("optimizer state has an invalid step counter");
  std::vector<std::vector<double>> m(m_.size()), v(v_.size());
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const auto& p = (*params_)[i];
    m[i] = fetch(p.name + ".m", p.value.size()).data;
    v[i] = fetch(p.name + ".v", p.value.size()).data;
  }
  step_ = static_cast<std::int64_t>(step);
  m_ = std::move(m);
  v_ = std::move(v);
}

template <typename T>
double clip_grad_norm(ad::ParameterStore<T>& params, double max_norm) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (T g : params[i].grad) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (T& g : params[i].grad) g = static_cast<T>(static_cast<double>(g) * factor);
    }
  }
  return norm;
}

template class Adam<float>;
template class Adam<double>;
template double clip_grad_norm<float>(ad::ParameterStore<float>&, double);
template double clip_grad_norm<double>(ad::ParameterStore<double>&, double);

}  // namespace wavesep::train
