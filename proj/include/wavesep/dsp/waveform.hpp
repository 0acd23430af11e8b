#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wavesep::dsp {

/// Multichannel audio: `channels` rows of `length` samples, stored row-major.
class Waveform {
 public:
  Waveform() = default;
  Waveform(int channels, std::size_t length, int sample_rate);
  Waveform(int channels, std::vector<double> samples, int sample_rate);

  int channels() const { return channels_; }
  std::size_t length() const { return length_; }
  int sample_rate() const { return sample_rate_; }
  double duration_seconds() const;

  double& at(int channel, std::size_t t) { return samples_[index(channel, t)]; }
  double at(int channel, std::size_t t) const { return samples_[index(channel, t)]; }

  std::span<double> channel(int c);
  std::span<const double> channel(int c) const;

  std::vector<double>& samples() { return samples_; }
  const std::vector<double>& samples() const { return samples_; }

  /// Equal channel count, length and sample rate.
  bool aligned_with(const Waveform& other) const;
  bool all_finite() const;
  double peak() const;

  /// Copy of samples [begin, begin + count); reads past the end are zero.
  Waveform slice(std::size_t begin, std::size_t count) const;
  /// Zero-extends or truncates at the end.
  Waveform resized(std::size_t new_length) const;

  Waveform& operator+=(const Waveform& other);
  Waveform& operator*=(double gain);

 private:
  std::size_t index(int channel, std::size_t t) const { return static_cast<std::size_t>(channel) * length_ + t; }

  int channels_ = 1;
  std::size_t length_ = 0;
  int sample_rate_ = 44100;
  std::vector<double> samples_;
};

Waveform operator+(Waveform a, const Waveform& b);
Waveform operator-(Waveform a, const Waveform& b);

}  // namespace wavesep::dsp
