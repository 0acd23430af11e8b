#pragma once

#include <cstdint>
#include <vector>

#include "wavesep/data/source_set.hpp"

namespace wavesep::data {

struct AugmentOptions {
  bool shuffle_sources = true;     // draw each stem slot from a random batch item
  double swap_probability = 0.5;   // per stem, stereo only
  double sign_probability = 0.5;   // per stem
};

/// For each output item and stem slot: take the stem from a uniformly chosen
/// batch item (or the same item without shuffling), swap its channels and
/// negate it with the configured probabilities, then remix.
std::vector<SourceSet> augment_batch(const std::vector<SourceSet>& batch, const AugmentOptions& options,
                                     std::uint64_t seed);

void flip_sign(dsp::Waveform& w);
/// No-op for mono.
void swap_channels(dsp::Waveform& w);

}  // namespace wavesep::data
