#include "wavesep/metrics/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace wavesep::metrics {

namespace {

std::vector<dsp::ComplexSpectrogram> source_spectrograms(const data::SourceSet& refs, const dsp::Waveform& mixture,
                                                         const dsp::StftParams& params) {
  if (refs.empty()) throw std::invalid_argument("oracle: no reference stems");
  std::vector<dsp::ComplexSpectrogram> out;
  for (const auto& [name, w] : refs.stems()) {
    if (!w.aligned_with(mixture)) throw std::invalid_argument("oracle: stem '" + name + "' not aligned with mixture");
    out.push_back(dsp::stft(w, params));
  }
  return out;
}

double magnitude(const dsp::ComplexSpectrogram& s, std::size_t i) { return std::hypot(s.real()[i], s.imag()[i]); }

}  // namespace

MaskSet ratio_masks(const std::vector<dsp::ComplexSpectrogram>& sources, double exponent) {
  if (sources.empty()) throw std::invalid_argument("ratio_masks: no sources");
  const std::size_t n = sources.front().real().size();
  MaskSet masks(sources.size(), std::vector<double>(n));
  const double uniform = 1.0 / static_cast<double>(sources.size());
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      masks[s][i] = std::pow(magnitude(sources[s], i), exponent);
      total += masks[s][i];
    }
    for (auto& m : masks) m[i] = total > 0.0 ? m[i] / total : uniform;
  }
  return masks;
}

MaskSet binary_masks(const std::vector<dsp::ComplexSpectrogram>& sources) {
  if (sources.empty()) throw std::invalid_argument("binary_masks: no sources");
  const std::size_t n = sources.front().real().size();
  MaskSet masks(sources.size(), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_mag = magnitude(sources[0], i);
    for (std::size_t s = 1; s < sources.size(); ++s) {
      const double m = magnitude(sources[s], i);
      if (m > best_mag) {
        best = s;
        best_mag = m;
      }
    }
    masks[best][i] = 1.0;
  }
  return masks;
}

data::SourceSet apply_spectral_masks(const data::SourceSet& references, const dsp::Waveform& mixture,
                                     const MaskSet& masks, const dsp::StftParams& params) {
  if (masks.size() != references.size()) throw std::invalid_argument("apply_spectral_masks: mask count mismatch");
  const dsp::ComplexSpectrogram mix = dsp::stft(mixture, params);
  data::SourceSet out;
  const auto names = references.names();
  for (std::size_t s = 0; s < names.size(); ++s) {
    if (masks[s].size() != mix.real().size()) throw std::invalid_argument("apply_spectral_masks: mask size mismatch");
    dsp::ComplexSpectrogram masked = mix;
    for (std::size_t i = 0; i < masks[s].size(); ++i) {
      masked.real()[i] *= masks[s][i];
      masked.imag()[i] *= masks[s][i];
    }
    out.set(names[s], dsp::istft(masked, params.hop, mixture.length(), mixture.sample_rate()));
  }
  out.set_mixture(mixture);
  return out;
}

data::SourceSet irm_oracle(const data::SourceSet& references, const dsp::Waveform& mixture,
                           const dsp::StftParams& params, double exponent) {
  const auto specs = source_spectrograms(references, mixture, params);
  return apply_spectral_masks(references, mixture, ratio_masks(specs, exponent), params);
}

data::SourceSet ibm_oracle(const data::SourceSet& references, const dsp::Waveform& mixture,
                           const dsp::StftParams& params) {
  const auto specs = source_spectrograms(references, mixture, params);
  return apply_spectral_masks(references, mixture, binary_masks(specs), params);
}

}  // namespace wavesep::metrics
