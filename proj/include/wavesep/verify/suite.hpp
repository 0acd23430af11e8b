#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavesep/ad/tensor.hpp"
#include "wavesep/models/specs.hpp"

namespace wavesep::verify {

struct CheckOutcome {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

constexpr double kGradTolerance = 1e-4;
constexpr double kAdjointTolerance = 1e-6;

/// Names accepted by grad_check_op, in registration order.
std::vector<std::string> grad_op_names();

/// Finite-difference check of one differentiable op on seeded random inputs.
/// Unknown names throw std::invalid_argument listing the known ones.
CheckOutcome grad_check_op(const std::string& name, std::uint64_t seed = 7);
std::vector<CheckOutcome> grad_check_ops(std::uint64_t seed = 7);

/// Small complete models for whole-network checks: Demucs with two blocks of
/// two initial channels, Conv-Tasnet with one repeat of two blocks.
models::DemucsSpec grad_check_demucs();
models::ConvTasnetSpec grad_check_convtasnet();

/// Checks a whole model built from `spec` on a random mixture of `length`
/// samples (256 for Demucs and 200 for Conv-Tasnet when 0). Every parameter
/// tensor is probed on up to `max_per_tensor` coordinates (0 = all).
CheckOutcome grad_check_model(const models::ModelSpec& spec, std::uint64_t seed = 7, std::size_t length = 0,
                              std::size_t max_per_tensor = 0);

std::vector<std::string> adjoint_op_names();

/// <A x, y> against <x, A^T y> (A^T y from reverse mode) on `instances`
/// random shapes and values. The error is |difference| / (|A x| |y|).
CheckOutcome adjoint_check(const std::string& name, int instances = 100, std::uint64_t seed = 11);
std::vector<CheckOutcome> adjoint_checks(int instances = 100, std::uint64_t seed = 11);

/// Standard deviations of the first encoder block output and of the final
/// decoder output of a freshly built Demucs on seeded Gaussian input.
struct FeatureScale {
  double first = 0.0;
  double last = 0.0;
  double ratio() const { return last / first; }
};
FeatureScale demucs_feature_scale(const models::DemucsSpec& spec, std::uint64_t seed, std::size_t length = 8192);

/// Builds `spec` with and without rescaling from the same seed and checks
/// std(w') against sqrt(a * std(w)) for every convolution weight.
CheckOutcome rescale_identity_check(const models::DemucsSpec& spec, std::uint64_t seed);

/// Seeded Gaussian mixture (1, channels, length) that is zero on the first
/// and last `margin` samples. With a margin wider than the receptive field
/// plus the shift, a circular shift only moves the signal through silence,
/// so the zero padding inside convolutions sees the same context.
ad::Tensor<float> equivariance_probe(int channels, std::size_t length, std::size_t margin, std::uint64_t seed);

/// Fixed-width text table, one row per outcome.
std::string format_table(std::span<const CheckOutcome> outcomes);

}  // namespace wavesep::verify
