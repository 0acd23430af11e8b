#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wavesep/data/source_set.hpp"

namespace wavesep::data {

struct ExtractOptions {
  double extract_seconds = 11.0;
  double stride_seconds = 1.0;
  double crop_seconds = 10.0;
};

struct ExtractRef {
  std::size_t track = 0;         // index into the track list
  std::size_t window_start = 0;  // sample offset of the extract window
  std::size_t offset = 0;        // sample offset of the crop (window_start + random shift)
};

struct EpochPlan {
  std::vector<ExtractRef> extracts;
  std::vector<std::size_t> skipped_tracks;  // shorter than one extract
};

/// Every (track, stride-multiple window) pair of an epoch once, shuffled; each
/// window gets a uniform shift in [0, extract - crop) samples. A pure function
/// of (lengths, options, seed, epoch).
EpochPlan plan_epoch(std::span<const std::size_t> track_lengths, int sample_rate, const ExtractOptions& options,
                     std::uint64_t seed, std::uint64_t epoch);

/// Number of samples in one crop.
std::size_t crop_samples(const ExtractOptions& options, int sample_rate);

/// The crop of `track` described by `ref`, mixture included when present.
SourceSet take_extract(const SourceSet& track, const ExtractRef& ref, const ExtractOptions& options);

}  // namespace wavesep::data
