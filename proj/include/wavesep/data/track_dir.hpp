#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "wavesep/data/source_set.hpp"
#include "wavesep/dsp/wav_io.hpp"

namespace wavesep::data {

struct LoadedTrack {
  SourceSet sources;
  /// max |sum(stems) - mixture| as read from disk.
  double mixture_error = 0.0;
  /// Set when the mixture deviates from the stem sum by more than the tolerance.
  std::optional<std::string> warning;
};

/// Reads mixture.wav and the four stem files. Missing files and misaligned
/// stems are errors (IoError naming the file); a mixture further than
/// `tolerance` from the stem sum only produces a warning.
LoadedTrack load_track_dir(const std::filesystem::path& dir, double tolerance = 1e-3);

/// Writes mixture.wav (the attached mixture, or the stem sum) and one file per stem.
void save_track_dir(const SourceSet& set, const std::filesystem::path& dir,
                    dsp::WavEncoding encoding = dsp::WavEncoding::float32);

}  // namespace wavesep::data
