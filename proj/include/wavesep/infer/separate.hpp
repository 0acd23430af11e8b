#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "wavesep/ad/tensor.hpp"
#include "wavesep/data/source_set.hpp"
#include "wavesep/dsp/waveform.hpp"
#include "wavesep/models/model.hpp"

namespace wavesep::infer {

/// Whole-input separator: mixture -> aligned stems.
using Separator = std::function<data::SourceSet(const dsp::Waveform&)>;

/// (1, C, T) tensor of a waveform.
template <typename T>
ad::Tensor<T> to_tensor(const dsp::Waveform& w);

/// Stems from item `batch` of a (B, S, C, T) tensor. Four sources get the
/// usual stem names, other counts `source0`, `source1`, ...
template <typename T>
data::SourceSet to_sources(const ad::Tensor<T>& output, std::size_t batch, int sample_rate);

/// One forward pass over the whole input.
template <typename T>
data::SourceSet separate_whole(models::SeparationModel<T>& model, const dsp::Waveform& mixture);

/// Consecutive non-overlapping chunks; the last one is zero-padded and the
/// outputs are concatenated and trimmed to the input length.
template <typename T>
data::SourceSet separate_chunked(models::SeparationModel<T>& model, const dsp::Waveform& mixture,
                                 double chunk_seconds = 8.0);

struct ShiftOptions {
  int shifts = 10;
  double max_shift_seconds = 0.5;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Uniform integer shifts in [0, max_shift * sample_rate).
std::vector<std::size_t> draw_shifts(const ShiftOptions& options, int sample_rate);

/// Averages base(x delayed by d zeros) with the first d outputs dropped, for
/// each given shift. Sums run in shift order.
data::SourceSet shift_average(const Separator& base, const dsp::Waveform& mixture, std::span<const std::size_t> shifts,
                              int threads = 1);

data::SourceSet shift_stabilize(const Separator& base, const dsp::Waveform& mixture, const ShiftOptions& options);

struct SeparateOptions {
  int shifts = 0;  // 0 disables stabilization
  double max_shift_seconds = 0.5;
  std::uint64_t seed = 0;
  double chunk_seconds = 8.0;  // Conv-Tasnet only
  int threads = 1;
};

/// Demucs runs on the whole track, Conv-Tasnet chunk by chunk; either may be
/// wrapped in shift stabilization.
template <typename T>
data::SourceSet separate(models::SeparationModel<T>& model, const dsp::Waveform& mixture,
                         const SeparateOptions& options);

/// Loads a saved model and a WAV file and writes `<stem>.wav` per source into
/// `out_dir`. Returns the written paths.
std::vector<std::filesystem::path> separate_file(const std::filesystem::path& model_dir,
                                                 const std::filesystem::path& input,
                                                 const std::filesystem::path& out_dir, const SeparateOptions& options);

}  // namespace wavesep::infer
