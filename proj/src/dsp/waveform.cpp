#include "wavesep/dsp/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wavesep::dsp {

namespace {

void check_geometry(int channels, int sample_rate) {
  if (channels != 1 && channels != 2) {
    throw std::invalid_argument("waveform must have 1 or 2 channels, got " + std::to_string(channels));
  }
  if (sample_rate <= 0) {
    throw std::invalid_argument("sample rate must be positive");
  }
}

}  // namespace

Waveform::Waveform(int channels, std::size_t length, int sample_rate)
    : channels_(channels), length_(length), sample_rate_(sample_rate),
      samples_(static_cast<std::size_t>(channels) * length, 0.0) {
  check_geometry(channels, sample_rate);
}

Waveform::Waveform(int channels, std::vector<double> samples, int sample_rate)
    : channels_(channels), sample_rate_(sample_rate), samples_(std::move(samples)) {
  check_geometry(channels, sample_rate);
  if (samples_.size() % static_cast<std::size_t>(channels) != 0) {
    throw std::invalid_argument("sample count is not a multiple of the channel count");
  }
  length_ = samples_.size() / static_cast<std::size_t>(channels);
}

double Waveform::duration_seconds() const {
  return static_cast<double>(length_) / static_cast<double>(sample_rate_);
}

std::span<double> Waveform::channel(int c) {
  return {samples_.data() + index(c, 0), length_};
}

std::span<const double> Waveform::channel(int c) const {
  return {samples_.data() + index(c, 0), length_};
}

bool Waveform::aligned_with(const Waveform& other) const {
  return channels_ == other.channels_ && length_ == other.length_ && sample_rate_ == other.sample_rate_;
}

bool Waveform::all_finite() const {
  return std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); });
}

double Waveform::peak() const {
  double p = 0.0;
  for (double v : samples_) p = std::max(p, std::abs(v));
  return p;
}

Waveform Waveform::slice(std::size_t begin, std::size_t count) const {
  Waveform out(channels_, count, sample_rate_);
  for (int c = 0; c < channels_; ++c) {
    auto src = channel(c);
    auto dst = out.channel(c);
    for (std::size_t t = 0; t < count && begin + t < length_; ++t) dst[t] = src[begin + t];
  }
  return out;
}

Waveform Waveform::resized(std::size_t new_length) const {
  return slice(0, new_length);
}

Waveform& Waveform::operator+=(const Waveform& other) {
  if (!aligned_with(other)) throw std::invalid_argument("waveforms are not aligned");
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
  return *this;
}

Waveform& Waveform::operator*=(double gain) {
  for (double& v : samples_) v *= gain;
  return *this;
}

Waveform operator+(Waveform a, const Waveform& b) {
  a += b;
  return a;
}

Waveform operator-(Waveform a, const Waveform& b) {
  if (!a.aligned_with(b)) throw std::invalid_argument("waveforms are not aligned");
  auto& s = a.samples();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] -= b.samples()[i];
  return a;
}

}  // namespace wavesep::dsp
