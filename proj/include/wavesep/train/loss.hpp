#pragma once

#include <string>
#include <vector>

#include "wavesep/ad/tape.hpp"

namespace wavesep::train {

enum class LossKind { l1, l2 };

LossKind parse_loss(const std::string& name);
std::string loss_name(LossKind kind);

// Both losses average over every coordinate of (B, S, C, T), so the source
// axis is averaged too. The per-source sum objective is S times this value.

/// mean |estimate - target|. The subgradient at zero is 0.
template <typename T>
ad::Var loss_l1(ad::Tape<T>& tape, ad::Var estimate, ad::Var target);

/// mean (estimate - target)^2.
template <typename T>
ad::Var loss_l2(ad::Tape<T>& tape, ad::Var estimate, ad::Var target);

template <typename T>
ad::Var loss(ad::Tape<T>& tape, LossKind kind, ad::Var estimate, ad::Var target);

/// Loss of each source slice (axis 1) computed separately, without a tape.
template <typename T>
std::vector<double> per_source_loss(LossKind kind, const ad::Tensor<T>& estimate, const ad::Tensor<T>& target);

}  // namespace wavesep::train
