#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wavesep/ad/tape.hpp"

namespace wavesep::ad {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;  // compared coordinates
  std::size_t skipped = 0;      // kinks, see GradCheckOptions::skip_kinks
  std::string worst;  // "input0[12]" or "<param name>[3]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

using AnalyticFunction = std::function<Var(Tape<double>&, std::span<const Var>)>;
using ReferenceFunction = std::function<Var(Tape<long double>&, std::span<const Var>)>;

struct GradCheckOptions {
  double eps = 1e-5;
  std::uint64_t seed = 7;
  /// When nonzero, each input or parameter tensor larger than this is checked
  /// on a seeded random subset of this many coordinates.
  std::size_t max_per_tensor = 0;
  /// Skip (and count) coordinates whose left and right difference quotients
  /// differ by more than kink_tolerance relative: a ReLU-type kink sits
  /// inside the stencil there and no finite difference is meaningful.
  bool skip_kinks = false;
  double kink_tolerance = 0.1;
};

/// Compares reverse-mode gradients (64-bit) of the scalar sum(f(inputs) * R),
/// R a seeded Gaussian projection, with central differences
/// (f(x+eps) - f(x-eps)) / 2eps over every input and parameter coordinate.
/// The difference quotients are evaluated in extended precision so that
/// cancellation does not swamp small gradients; `shadow` mirrors `params`
/// (same names and shapes) for that evaluation and is overwritten from it.
/// Relative error uses the denominator max(|analytic|, |numeric|, 1e-8).
/// Throws NumericError if any value is non-finite.
GradCheckResult grad_check(const AnalyticFunction& f, const ReferenceFunction& reference,
                           std::vector<Tensor<double>> inputs, ParameterStore<double>* params = nullptr,
                           ParameterStore<long double>* shadow = nullptr, GradCheckOptions options = {});

/// Convenience form for a generic callable `f(auto& tape, std::span<const Var>)`.
template <typename F>
GradCheckResult grad_check(F&& f, std::vector<Tensor<double>> inputs, ParameterStore<double>* params = nullptr,
                           ParameterStore<long double>* shadow = nullptr, GradCheckOptions options = {}) {
  AnalyticFunction a = [&f](Tape<double>& t, std::span<const Var> v) { return f(t, v); };
  ReferenceFunction r = [&f](Tape<long double>& t, std::span<const Var> v) { return f(t, v); };
  return grad_check(a, r, std::move(inputs), params, shadow, options);
}

}  // namespace wavesep::ad
