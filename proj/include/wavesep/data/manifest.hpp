#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wavesep/data/source_set.hpp"

namespace wavesep::data {

enum class Split { train, valid, test };

std::string split_name(Split s);
Split parse_split(const std::string& name);

/// A track is either a directory on disk or a synthetic seed.
struct TrackEntry {
  Split split = Split::train;
  std::string id;
  double duration_seconds = 0.0;
  int sample_rate = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> path;  // relative paths resolve against the manifest directory
};

/// Text format, one track per line after a `# wavesep manifest v1` header:
/// `split id duration sample_rate seed path`, with `-` for an absent seed or path.
class DatasetManifest {
 public:
  DatasetManifest() = default;
  explicit DatasetManifest(std::vector<TrackEntry> entries, std::filesystem::path base = {});

  static DatasetManifest load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

  const std::vector<TrackEntry>& entries() const { return entries_; }
  std::vector<TrackEntry> split(Split s) const;
  const std::filesystem::path& base() const { return base_; }

  /// Loads a directory entry from disk or synthesizes a seed entry (stereo).
  SourceSet load_track(const TrackEntry& entry) const;

 private:
  void validate() const;

  std::vector<TrackEntry> entries_;
  std::filesystem::path base_;
};

/// Split tags by track order: the first `train` tracks, then `valid`, then the rest.
std::vector<Split> assign_splits(std::size_t tracks, std::size_t train, std::size_t valid);
/// 70/15/15 by track order (valid and test take floor(15%) each).
std::vector<Split> default_splits(std::size_t tracks);

/// Entries for `count` synthetic tracks with seeds derived from `seed`.
std::vector<TrackEntry> synthetic_entries(const std::vector<Split>& splits, double duration_seconds, int sample_rate,
                                          std::uint64_t seed);

}  // namespace wavesep::data
