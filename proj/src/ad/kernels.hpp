#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

#include "wavesep/ad/tape.hpp"

namespace wavesep::ad::detail {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

// Adds g into the gradient of v when v takes part in differentiation.
template <typename T>
bool wants_grad(Tape<T>& tape, Var v) {
  return v.valid() && tape.requires_grad(v);
}

}  // namespace wavesep::ad::detail
