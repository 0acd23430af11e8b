#include "wavesep/dsp/mel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wavesep::dsp {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Grid mel_filterbank(std::size_t n_mels, std::size_t window_length, int sample_rate) {
  const std::size_t bins = window_length / 2 + 1;
  if (n_mels == 0) throw std::invalid_argument("n_mels must be at least 1");
  if (n_mels > bins) {
    throw std::invalid_argument("n_mels (" + std::to_string(n_mels) + ") exceeds frequency bins (" +
                                std::to_string(bins) + ")");
  }
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }

  Grid fb{n_mels, bins, std::vector<double>(n_mels * bins, 0.0)};
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m];
    const double mid = edges[m + 1];
    const double hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(window_length);
      double weight = 0.0;
      if (f > lo && f <= mid) {
        weight = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        weight = (hi - f) / (hi - mid);
      }
      fb.at(m, k) = weight;
    }
  }
  return fb;
}

Grid mel_spectrogram(const Waveform& w, std::size_t n_mels, StftParams params) {
  const Grid fb = mel_filterbank(n_mels, params.window_length, w.sample_rate());
  const ComplexSpectrogram spec = stft(w, params);
  Grid out{n_mels, spec.frames(), std::vector<double>(n_mels * spec.frames(), 0.0)};
  std::vector<double> power(spec.bins());
  for (std::size_t m = 0; m < spec.frames(); ++m) {
    std::fill(power.begin(), power.end(), 0.0);
    for (int c = 0; c < spec.channels(); ++c) {
      for (std::size_t f = 0; f < spec.bins(); ++f) power[f] += std::norm(spec.at(c, f, m));
    }
    for (std::size_t b = 0; b < n_mels; ++b) {
      double energy = 0.0;
      for (std::size_t f = 0; f < spec.bins(); ++f) energy += fb.at(b, f) * power[f];
      out.at(b, m) = std::log1p(energy / spec.channels());
    }
  }
  return out;
}

}  // namespace wavesep::dsp
