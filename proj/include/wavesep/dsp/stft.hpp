#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "wavesep/dsp/waveform.hpp"

namespace wavesep::dsp {

struct StftParams {
  std::size_t window_length = 4096;
  std::size_t hop = 1024;
};

/// Centered STFT frames of a Hann-windowed signal; layout (channel, bin, frame).
class ComplexSpectrogram {
 public:
  ComplexSpectrogram() = default;
  ComplexSpectrogram(int channels, std::size_t frames, StftParams params);

  int channels() const { return channels_; }
  std::size_t bins() const { return bins_; }
  std::size_t frames() const { return frames_; }
  const StftParams& params() const { return params_; }

  std::complex<double> at(int c, std::size_t bin, std::size_t frame) const {
    const std::size_t i = index(c, bin, frame);
    return {real_[i], imag_[i]};
  }
  void set(int c, std::size_t bin, std::size_t frame, std::complex<double> v) {
    const std::size_t i = index(c, bin, frame);
    real_[i] = v.real();
    imag_[i] = v.imag();
  }

  std::vector<double>& real() { return real_; }
  std::vector<double>& imag() { return imag_; }
  const std::vector<double>& real() const { return real_; }
  const std::vector<double>& imag() const { return imag_; }

 private:
  std::size_t index(int c, std::size_t bin, std::size_t frame) const {
    return (static_cast<std::size_t>(c) * bins_ + bin) * frames_ + frame;
  }

  int channels_ = 0;
  std::size_t bins_ = 0;
  std::size_t frames_ = 0;
  StftParams params_;
  std::vector<double> real_;
  std::vector<double> imag_;
};

/// Periodic Hann window of the given length.
std::vector<double> hann_window(std::size_t length);

/// Frame count for a centered STFT: 1 + length / hop.
std::size_t stft_frame_count(std::size_t length, std::size_t hop);

ComplexSpectrogram stft(const Waveform& w, StftParams params);

/// Weighted overlap-add inverse, normalized by the summed squared window.
/// The result is trimmed or zero-padded to `target_length`.
Waveform istft(const ComplexSpectrogram& s, std::size_t hop, std::size_t target_length, int sample_rate);

}  // namespace wavesep::dsp
