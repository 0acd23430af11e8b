#pragma once

#include <vector>

#include "wavesep/data/source_set.hpp"
#include "wavesep/dsp/stft.hpp"

namespace wavesep::metrics {

/// One mask per source over the (channel, bin, frame) grid of the mixture STFT.
using MaskSet = std::vector<std::vector<double>>;

/// mask_s = |S_s|^e / sum_k |S_k|^e per bin and channel; bins where every
/// source is zero get 1 / S.
MaskSet ratio_masks(const std::vector<dsp::ComplexSpectrogram>& sources, double exponent = 2.0);

/// One-hot masks selecting the loudest source per bin; ties go to the lowest index.
MaskSet binary_masks(const std::vector<dsp::ComplexSpectrogram>& sources);

/// Applies each mask to the mixture spectrogram (keeping the mixture phase) and
/// inverts, trimming to the mixture length.
data::SourceSet apply_spectral_masks(const data::SourceSet& references, const dsp::Waveform& mixture,
                                     const MaskSet& masks, const dsp::StftParams& params);

data::SourceSet irm_oracle(const data::SourceSet& references, const dsp::Waveform& mixture,
                           const dsp::StftParams& params, double exponent = 2.0);

data::SourceSet ibm_oracle(const data::SourceSet& references, const dsp::Waveform& mixture,
                           const dsp::StftParams& params);

}  // namespace wavesep::metrics
