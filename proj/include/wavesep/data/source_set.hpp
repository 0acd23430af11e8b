#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wavesep/dsp/waveform.hpp"

namespace wavesep::data {

/// Stem names in model output order.
inline const std::array<std::string, 4> kStemNames = {"drums", "bass", "other", "vocals"};

/// Named, time-aligned stems kept in insertion order, plus an optional mixture.
class SourceSet {
 public:
  /// Adds or replaces a stem. Throws if it is not aligned with existing stems.
  void set(const std::string& name, dsp::Waveform w);
  const dsp::Waveform& get(const std::string& name) const;
  dsp::Waveform& get(const std::string& name);
  bool has(const std::string& name) const;
  std::size_t size() const { return stems_.size(); }
  bool empty() const { return stems_.empty(); }
  std::vector<std::string> names() const;
  const std::vector<std::pair<std::string, dsp::Waveform>>& stems() const { return stems_; }
  std::vector<std::pair<std::string, dsp::Waveform>>& stems() { return stems_; }

  const std::optional<dsp::Waveform>& mixture() const { return mixture_; }
  void set_mixture(dsp::Waveform w);
  void clear_mixture() { mixture_.reset(); }
  /// Replaces the mixture by the exact sum of the stems.
  void remix();

  /// Sum of all stems; throws on an empty set.
  dsp::Waveform sum() const;
  /// max |sum(stems) - mixture|; throws if no mixture is attached.
  double mixture_error() const;

  int sample_rate() const;
  int channels() const;
  std::size_t length() const;

  /// Copy of [begin, begin + count) of every stem and of the mixture.
  SourceSet slice(std::size_t begin, std::size_t count) const;

 private:
  std::vector<std::pair<std::string, dsp::Waveform>> stems_;
  std::optional<dsp::Waveform> mixture_;
};

}  // namespace wavesep::data
