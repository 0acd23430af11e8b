#pragma once

#include <cstdint>

#include "wavesep/data/source_set.hpp"

namespace wavesep::data {

/// Deterministic four-stem track: drums (decaying noise bursts on a beat
/// grid), bass (40-120 Hz note sequence), other (mid-band chords), vocals
/// (vibrato melody with formant emphasis). Stems are panned independently in
/// stereo, scaled so that no stem or mixture sample exceeds 0.9, and the
/// mixture is their exact sum. Throws for durations below one second.
SourceSet synth_track(std::uint64_t seed, double duration_seconds, int sample_rate, bool stereo);

}  // namespace wavesep::data
