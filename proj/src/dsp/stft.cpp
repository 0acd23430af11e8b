#include "wavesep/dsp/stft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace wavesep::dsp {

namespace {

// Mirror an out-of-range index back into [0, n) without repeating the edge sample.
std::size_t reflect_index(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * (static_cast<long long>(n) - 1);
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<long long>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

void check_params(const StftParams& params) {
  if (params.window_length == 0) throw std::invalid_argument("stft window length must be positive");
  if (params.hop == 0) throw std::invalid_argument("stft hop must be positive");
  if (params.hop > params.window_length) throw std::invalid_argument("stft hop exceeds window length");
}

}  // namespace

ComplexSpectrogram::ComplexSpectrogram(int channels, std::size_t frames, StftParams params)
    : channels_(channels),
      bins_(params.window_length / 2 + 1),
      frames_(frames),
      params_(params),
      real_(static_cast<std::size_t>(channels) * bins_ * frames, 0.0),
      imag_(real_.size(), 0.0) {}

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(length));
  }
  return w;
}

std::size_t stft_frame_count(std::size_t length, std::size_t hop) {
  return 1 + length / hop;
}

ComplexSpectrogram stft(const Waveform& w, StftParams params) {
  check_params(params);
  const std::size_t n = params.window_length;
  const std::size_t pad = n / 2;
  const std::size_t frames = w.length() == 0 ? 0 : stft_frame_count(w.length(), params.hop);
  ComplexSpectrogram out(w.channels(), frames, params);
  if (frames == 0) return out;

  const auto window = hann_window(n);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(n);
  std::vector<std::complex<double>> spectrum;

  for (int c = 0; c < w.channels(); ++c) {
    auto x = w.channel(c);
    for (std::size_t m = 0; m < frames; ++m) {
      const long long start = static_cast<long long>(m * params.hop) - static_cast<long long>(pad);
      for (std::size_t k = 0; k < n; ++k) {
        frame[k] = window[k] * x[reflect_index(start + static_cast<long long>(k), x.size())];
      }
      fft.fwd(spectrum, frame);
      for (std::size_t f = 0; f < out.bins(); ++f) out.set(c, f, m, spectrum[f]);
    }
  }
  return out;
}

Waveform istft(const ComplexSpectrogram& s, std::size_t hop, std::size_t target_length, int sample_rate) {
  const std::size_t n = s.params().window_length;
  if (hop == 0 || hop > n) throw std::invalid_argument("istft hop must be in [1, window_length]");
  if (s.bins() != n / 2 + 1) throw std::invalid_argument("istft: bin count inconsistent with window length");
  if (s.real().size() != static_cast<std::size_t>(s.channels()) * s.bins() * s.frames()) {
    throw std::invalid_argument("istft: spectrogram buffer inconsistent with its geometry");
  }
  const int channels = s.channels() == 0 ? 1 : s.channels();
  Waveform out(channels, target_length, sample_rate);
  if (s.frames() == 0 || target_length == 0) return out;

  const std::size_t pad = n / 2;
  const std::size_t padded = (s.frames() - 1) * hop + n;
  const auto window = hann_window(n);
  std::vector<double> norm(padded, 0.0);
  for (std::size_t m = 0; m < s.frames(); ++m) {
    for (std::size_t k = 0; k < n; ++k) norm[m * hop + k] += window[k] * window[k];
  }

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> spectrum(s.bins());
  std::vector<double> frame;
  std::vector<double> acc(padded);

  for (int c = 0; c < s.channels(); ++c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t m = 0; m < s.frames(); ++m) {
      for (std::size_t f = 0; f < s.bins(); ++f) spectrum[f] = s.at(c, f, m);
      fft.inv(frame, spectrum, static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k) acc[m * hop + k] += window[k] * frame[k];
    }
    auto y = out.channel(c);
    for (std::size_t t = 0; t < target_length && t + pad < padded; ++t) {
      const double wsum = norm[t + pad];
      y[t] = wsum > 1e-11 ? acc[t + pad] / wsum : 0.0;
    }
  }
  return out;
}

}  // namespace wavesep::dsp
