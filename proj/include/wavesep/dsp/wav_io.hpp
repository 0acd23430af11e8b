#pragma once

#include <filesystem>

#include "wavesep/dsp/waveform.hpp"

namespace wavesep::dsp {

enum class WavEncoding { pcm16, float32 };

/// Reads a RIFF/WAVE file holding 16-bit PCM or 32-bit IEEE float samples.
/// Integer samples are scaled by 1/32768. Throws IoError on malformed input.
Waveform load_wav(const std::filesystem::path& path);

/// PCM16 output clamps to [-1, 1 - 1/32768]; float32 output is exact for
/// float-representable samples.
void save_wav(const Waveform& w, const std::filesystem::path& path, WavEncoding encoding = WavEncoding::float32);

}  // namespace wavesep::dsp
