#include "wavesep/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <stdexcept>

#include "wavesep/ad/ops.hpp"
#include "wavesep/error.hpp"

namespace wavesep::ad {

namespace {

template <typename T>
void require_finite(std::span<const T> values, const char* what) {
  for (T v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string("grad_check: non-finite ") + what);
  }
}

Tensor<double> projection(const Shape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor<double> r(shape);
  for (double& v : r.data) v = normal(rng);
  return r;
}

std::vector<std::size_t> coordinates(std::size_t size, std::size_t limit, std::uint64_t seed) {
  std::vector<std::size_t> all(size);
  for (std::size_t i = 0; i < size; ++i) all[i] = i;
  if (limit == 0 || size <= limit) return all;
  std::vector<std::size_t> picked;
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), limit, rng);
  return picked;
}

}  // namespace

GradCheckResult grad_check(const AnalyticFunction& f, const ReferenceFunction& reference,
                           std::vector<Tensor<double>> inputs, ParameterStore<double>* params,
                           ParameterStore<long double>* shadow, GradCheckOptions options) {
  if (params && !shadow) throw std::invalid_argument("grad_check: parameters need an extended-precision shadow");
  if (params) {
    if (params->size() != shadow->size()) throw std::invalid_argument("grad_check: shadow parameter count differs");
    for (std::size_t p = 0; p < params->size(); ++p) {
      auto& src = (*params)[p];
      auto& dst = (*shadow)[p];
      if (src.name != dst.name || src.value.shape != dst.value.shape) {
        throw std::invalid_argument("grad_check: shadow parameter " + dst.name + " does not mirror " + src.name);
      }
      dst.value = tensor_cast<long double>(src.value);
    }
  }

  for (const auto& in : inputs) require_finite<double>(in.data, "input");
  if (params) {
    for (std::size_t p = 0; p < params->size(); ++p) require_finite<double>((*params)[p].value.data, "parameter");
  }

  // Analytic pass.
  if (params) params->zero_grad();
  Tape<double> tape(true);
  std::vector<Var> vars;
  for (auto& in : inputs) vars.push_back(tape.variable(in));
  const Var out = f(tape, vars);
  require_finite<double>(tape.value(out).data, "forward value");
  const Tensor<double> r = projection(tape.shape(out), options.seed);
  tape.backward(inner_product(tape, out, r));
  std::vector<std::vector<double>> input_grads;
  for (Var v : vars) input_grads.push_back(tape.grad(v));

  const Tensor<long double> r_ext = tensor_cast<long double>(r);
  std::vector<Tensor<long double>> ext_inputs;
  for (const auto& in : inputs) ext_inputs.push_back(tensor_cast<long double>(in));
  auto loss = [&]() -> long double {
    Tape<long double> t(false);
    std::vector<Var> v;
    for (auto& in : ext_inputs) v.push_back(t.constant(in));
    const Var o = reference(t, v);
    require_finite<long double>(t.value(o).data, "forward value");
    return t.value(inner_product(t, o, r_ext)).data[0];
  };

  GradCheckResult result;
  const long double eps = options.eps;
  auto compare = [&](double analytic, long double& coordinate, const std::string& label) {
    const long double saved = coordinate;
    auto at = [&](long double offset) {
      coordinate = saved + offset;
      return loss();
    };
    const long double up = at(eps), down = at(-eps);
    if (options.skip_kinks) {
      // One-sided slopes that disagree far beyond the O(eps) curvature term
      // mean a non-differentiable point lies within the stencil.
      const long double centre = at(0);
      const long double right = (up - centre) / eps, left = (centre - down) / eps;
      const long double scale = std::max({std::abs(right), std::abs(left), static_cast<long double>(1e-8)});
      if (std::abs(right - left) > options.kink_tolerance * scale) {
        coordinate = saved;
        ++result.skipped;
        return;
      }
    }
    coordinate = saved;
    const double numeric = static_cast<double>((up - down) / (2 * eps));
    if (!std::isfinite(analytic) || !std::isfinite(numeric)) {
      throw NumericError("grad_check: non-finite gradient at " + label);
    }
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double err = std::abs(analytic - numeric) / denom;
    ++result.coordinates;
    if (result.coordinates == 1 || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst = label;
      result.worst_analytic = analytic;
      result.worst_numeric = numeric;
    }
  };

  for (std::size_t i = 0; i < ext_inputs.size(); ++i) {
    for (std::size_t j : coordinates(ext_inputs[i].size(), options.max_per_tensor, options.seed + 101 * i)) {
      compare(input_grads[i][j], ext_inputs[i].data[j], "input" + std::to_string(i) + "[" + std::to_string(j) + "]");
    }
  }
  if (params) {
    for (std::size_t p = 0; p < params->size(); ++p) {
      const auto& grad = (*params)[p].grad;
      auto& value = (*shadow)[p].value;
      for (std::size_t j : coordinates(value.size(), options.max_per_tensor, options.seed + 7919 * (p + 1))) {
        compare(grad[j], value.data[j], (*shadow)[p].name + "[" + std::to_string(j) + "]");
      }
    }
  }
  return result;
}

}  // namespace wavesep::ad
