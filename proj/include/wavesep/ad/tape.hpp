#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "wavesep/ad/parameter.hpp"
#include "wavesep/ad/tensor.hpp"

namespace wavesep::ad {

/// Handle to a value recorded on a Tape.
struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode recorder. Nodes are stored in execution order; backward walks
/// them in exact reverse order and each node adds its contribution into the
/// gradients of its inputs. Parameter leaves accumulate into Parameter::grad.
template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, Var self)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Tensor<T> value);
  Var variable(Tensor<T> value);
  Var parameter(Parameter<T>& p);

  const Tensor<T>& value(Var v) const;
  const Shape& shape(Var v) const { return value(v).shape; }
  bool requires_grad(Var v) const { return v.valid() && nodes_[static_cast<std::size_t>(v.id)].requires_grad; }

  /// Gradient buffer of a node, allocated zero-filled on first access.
  std::vector<T>& grad(Var v);

  /// Appends an op result. The backward closure is kept only when gradients
  /// are enabled and at least one valid input requires them.
  Var record(Tensor<T> value, std::initializer_list<Var> inputs, Backward backward);

  /// Seeds a scalar root with 1 and propagates.
  void backward(Var root);
  /// Seeds the root with an explicit cotangent of the root's size.
  void backward(Var root, std::span<const T> seed);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Parameter<T>* param = nullptr;
    std::vector<T> grad;
    bool requires_grad = false;
    Backward backward;
  };

  Var push(Node node);
  void run_backward(Var root);

  bool grad_enabled_;
  std::vector<Node> nodes_;
};

}  // namespace wavesep::ad
