#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace wavesep::testing {

/// Projection onto span(basis) through a modified Gram-Schmidt orthonormal
/// basis, run twice for stability. Independent of the Gram/Cholesky route.
inline std::vector<double> least_squares_projection(std::span<const double> x,
                                                    const std::vector<std::span<const double>>& basis) {
  std::vector<std::vector<double>> q;
  for (const auto& b : basis) {
    std::vector<double> v(b.begin(), b.end());
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : q) {
        double d = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) d += u[i] * v[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * u[i];
      }
    }
    double n = 0.0;
    for (double e : v) n += e * e;
    n = std::sqrt(n);
    for (double& e : v) e /= n;
    q.push_back(std::move(v));
  }
  std::vector<double> out(x.size(), 0.0);
  for (const auto& u : q) {
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d += u[i] * x[i];
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += d * u[i];
  }
  return out;
}

inline double relative_error(const std::vector<double>& a, const std::vector<double>& reference) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - reference[i]) * (a[i] - reference[i]);
    norm += reference[i] * reference[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-300);
}

}  // namespace wavesep::testing
