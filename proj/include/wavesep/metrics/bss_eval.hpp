#pragma once

#include <span>
#include <vector>

#include "wavesep/error.hpp"

namespace wavesep::metrics {

inline constexpr double kMaxDb = 100.0;

/// Raised when the references do not span a full-rank subspace or one of them
/// has zero energy.
class DegenerateReferences : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Estimate split into the target component, interference from the other
/// references and the remaining artifacts; the three sum to the estimate.
struct Decomposition {
  std::vector<double> target;
  std::vector<double> interference;
  std::vector<double> artifacts;
};

/// Orthogonal projection of `x` onto span(basis). Solves the Gram system by
/// Cholesky; throws DegenerateReferences when it is singular.
std::vector<double> project(std::span<const double> x, const std::vector<std::span<const double>>& basis);

/// s_target = P_{s_j}(est), e_interf = P_s(est) - s_target, e_artif = est - P_s(est).
Decomposition decompose(std::span<const double> estimate, const std::vector<std::span<const double>>& references,
                        std::size_t j);

/// 10 log10(num / den) clamped to [-kMaxDb, kMaxDb]; den = 0 reads as +inf and
/// num = 0 as -inf.
double ratio_db(double num, double den);

double sdr(const Decomposition& d);
double sir(const Decomposition& d);
double sar(const Decomposition& d);

}  // namespace wavesep::metrics
