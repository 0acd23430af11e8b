#include "wavesep/data/track_dir.hpp"

#include <cstdio>

#include "wavesep/error.hpp"

namespace wavesep::data {

LoadedTrack load_track_dir(const std::filesystem::path& dir, double tolerance) {
  if (!std::filesystem::is_directory(dir)) throw IoError("track directory not found: " + dir.string());
  auto read = [&](const std::string& stem) {
    const auto path = dir / (stem + ".wav");
    if (!std::filesystem::exists(path)) throw IoError("missing stem '" + stem + "': " + path.string());
    return dsp::load_wav(path);
  };
  LoadedTrack track;
  const dsp::Waveform mixture = read("mixture");
  for (const auto& name : kStemNames) {
    dsp::Waveform w = read(name);
    if (!w.aligned_with(mixture)) throw IoError("stem '" + name + "' is not aligned with mixture in " + dir.string());
    track.sources.set(name, std::move(w));
  }
  track.sources.set_mixture(mixture);
  track.mixture_error = track.sources.mixture_error();
  if (track.mixture_error > tolerance) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "mixture differs from stem sum by %.3g (tolerance %.3g)", track.mixture_error,
                  tolerance);
    track.warning = dir.string() + ": " + buf;
  }
  return track;
}

void save_track_dir(const SourceSet& set, const std::filesystem::path& dir, dsp::WavEncoding encoding) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  dsp::save_wav(set.mixture() ? *set.mixture() : set.sum(), dir / "mixture.wav", encoding);
  for (const auto& [name, w] : set.stems()) dsp::save_wav(w, dir / (name + ".wav"), encoding);
}

}  // namespace wavesep::data
