#include "wavesep/data/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace wavesep::data {

namespace {

std::size_t to_samples(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

}  // namespace

std::size_t crop_samples(const ExtractOptions& options, int sample_rate) {
  return to_samples(options.crop_seconds, sample_rate);
}

EpochPlan plan_epoch(std::span<const std::size_t> track_lengths, int sample_rate, const ExtractOptions& options,
                     std::uint64_t seed, std::uint64_t epoch) {
  const std::size_t extract = to_samples(options.extract_seconds, sample_rate);
  const std::size_t stride = to_samples(options.stride_seconds, sample_rate);
  const std::size_t crop = crop_samples(options, sample_rate);
  if (extract == 0 || stride == 0 || crop == 0 || crop > extract) {
    throw std::invalid_argument("plan_epoch: need 0 < crop <= extract and a positive stride");
  }

  EpochPlan plan;
  for (std::size_t t = 0; t < track_lengths.size(); ++t) {
    if (track_lengths[t] < extract) {
      plan.skipped_tracks.push_back(t);
      continue;
    }
    const std::size_t windows = (track_lengths[t] - extract) / stride + 1;
    for (std::size_t w = 0; w < windows; ++w) plan.extracts.push_back({t, w * stride, w * stride});
  }

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(plan.extracts.begin(), plan.extracts.end(), rng);
  const std::size_t slack = extract - crop;
  for (auto& e : plan.extracts) {
    if (slack > 0) e.offset = e.window_start + std::uniform_int_distribution<std::size_t>(0, slack - 1)(rng);
  }
  return plan;
}

SourceSet take_extract(const SourceSet& track, const ExtractRef& ref, const ExtractOptions& options) {
  return track.slice(ref.offset, crop_samples(options, track.sample_rate()));
}

}  // namespace wavesep::data
