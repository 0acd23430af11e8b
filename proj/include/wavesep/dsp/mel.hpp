#pragma once

#include <cstddef>
#include <vector>

#include "wavesep/dsp/stft.hpp"

namespace wavesep::dsp {

/// Row-major real matrix used for spectrogram-style dumps.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular HTK-scale filters over [0, sample_rate / 2]; shape (n_mels, bins).
Grid mel_filterbank(std::size_t n_mels, std::size_t window_length, int sample_rate);

/// log(1 + mel power), channel powers averaged; shape (n_mels, frames).
Grid mel_spectrogram(const Waveform& w, std::size_t n_mels, StftParams params);

}  // namespace wavesep::dsp
