#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include "wavesep/ad/parameter.hpp"
#include "wavesep/ad/tape.hpp"
#include "wavesep/models/specs.hpp"

namespace wavesep::models {

/// A waveform-to-waveform separator: mixture (B, C, T) -> sources (B, S, C, T).
template <typename T>
class SeparationModel {
 public:
  virtual ~SeparationModel() = default;

  virtual ModelSpec spec() const = 0;
  virtual int sources() const = 0;
  virtual int audio_channels() const = 0;
  virtual ad::Var forward(ad::Tape<T>& tape, ad::Var mixture) = 0;

  ad::ParameterStore<T>& parameters() { return params_; }
  const ad::ParameterStore<T>& parameters() const { return params_; }

 protected:
  ad::ParameterStore<T> params_;
};

template <typename T>
std::unique_ptr<SeparationModel<T>> build_model(const ModelSpec& spec, std::uint64_t seed);

/// Forward pass without recording gradients.
template <typename T>
ad::Tensor<T> run_model(SeparationModel<T>& model, const ad::Tensor<T>& mixture);

/// Writes `<dir>/spec.txt` and the `<dir>/weights` checkpoint.
template <typename T>
void save_model(const SeparationModel<T>& model, const std::filesystem::path& dir);

template <typename T>
std::unique_ptr<SeparationModel<T>> load_model(const std::filesystem::path& dir);

ModelSpec load_model_spec(const std::filesystem::path& dir);

/// max |f(roll(x, shift)) - roll(f(x), shift)| with circular shifts on time.
template <typename T>
double check_equivariance(SeparationModel<T>& model, const ad::Tensor<T>& mixture, long long shift);

/// Circular shift of the last axis by `shift` samples (positive = later).
template <typename T>
ad::Tensor<T> roll_time(const ad::Tensor<T>& x, long long shift);

}  // namespace wavesep::models
