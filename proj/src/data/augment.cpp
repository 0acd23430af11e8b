#include "wavesep/data/augment.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace wavesep::data {

void flip_sign(dsp::Waveform& w) {
  for (double& v : w.samples()) v = -v;
}

void swap_channels(dsp::Waveform& w) {
  if (w.channels() != 2) return;
  auto left = w.channel(0);
  auto right = w.channel(1);
  std::swap_ranges(left.begin(), left.end(), right.begin());
}

std::vector<SourceSet> augment_batch(const std::vector<SourceSet>& batch, const AugmentOptions& options,
                                     std::uint64_t seed) {
  if (batch.empty()) throw std::invalid_argument("augment_batch: empty batch");
  const auto names = batch.front().names();
  for (const auto& item : batch) {
    if (item.names() != names) throw std::invalid_argument("augment_batch: items carry different stems");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, batch.size() - 1);
  std::bernoulli_distribution swap(options.swap_probability);
  std::bernoulli_distribution sign(options.sign_probability);

  std::vector<SourceSet> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    SourceSet item;
    for (const auto& name : names) {
      const std::size_t from = options.shuffle_sources ? pick(rng) : i;
      dsp::Waveform w = batch[from].get(name);
      // Both draws happen unconditionally so the stream does not depend on the outcome.
      const bool do_swap = swap(rng);
      const bool do_sign = sign(rng);
      if (do_swap) swap_channels(w);
      if (do_sign) flip_sign(w);
      item.set(name, std::move(w));
    }
    item.remix();
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace wavesep::data
