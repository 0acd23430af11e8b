#include "wavesep/data/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "wavesep/data/synth.hpp"
#include "wavesep/data/track_dir.hpp"
#include "wavesep/error.hpp"

namespace wavesep::data {

namespace {
constexpr const char* kHeader = "# wavesep manifest v1";
}

std::string split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "valid") return Split::valid;
  if (name == "test") return Split::test;
  throw std::invalid_argument("unknown split '" + name + "'");
}

DatasetManifest::DatasetManifest(std::vector<TrackEntry> entries, std::filesystem::path base)
    : entries_(std::move(entries)), base_(std::move(base)) {
  validate();
}

void DatasetManifest::validate() const {
  std::set<std::string> ids;
  for (const auto& e : entries_) {
    if (e.id.empty()) throw std::invalid_argument("manifest: empty track id");
    if (!ids.insert(e.id).second) throw std::invalid_argument("manifest: duplicate track id '" + e.id + "'");
    if (!e.seed && !e.path) throw std::invalid_argument("manifest: track '" + e.id + "' has neither seed nor path");
    if (!(e.duration_seconds > 0.0) || e.sample_rate <= 0) {
      throw std::invalid_argument("manifest: track '" + e.id + "' needs positive duration and sample rate");
    }
  }
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read manifest " + file.string());
  std::vector<TrackEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string split, id, seed, path;
    TrackEntry e;
    if (!(ls >> split >> id >> e.duration_seconds >> e.sample_rate >> seed >> path)) {
      throw IoError(file.string() + ":" + std::to_string(line_no) + ": malformed manifest line");
    }
    e.split = parse_split(split);
    e.id = id;
    if (seed != "-") e.seed = std::stoull(seed);
    if (path != "-") e.path = path;
    entries.push_back(std::move(e));
  }
  return DatasetManifest(std::move(entries), file.parent_path());
}

void DatasetManifest::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  out << kHeader << "\n# split id duration_seconds sample_rate seed path\n";
  for (const auto& e : entries_) {
    char dur[32];
    std::snprintf(dur, sizeof dur, "%.17g", e.duration_seconds);
    out << split_name(e.split) << ' ' << e.id << ' ' << dur << ' ' << e.sample_rate << ' '
        << (e.seed ? std::to_string(*e.seed) : "-") << ' ' << (e.path ? e.path->generic_string() : "-") << '\n';
  }
  if (!out) throw IoError("cannot write manifest " + file.string());
}

std::vector<TrackEntry> DatasetManifest::split(Split s) const {
  std::vector<TrackEntry> out;
  for (const auto& e : entries_) {
    if (e.split == s) out.push_back(e);
  }
  return out;
}

SourceSet DatasetManifest::load_track(const TrackEntry& entry) const {
  if (entry.path) {
    const auto dir = entry.path->is_absolute() ? *entry.path : base_ / *entry.path;
    LoadedTrack t = load_track_dir(dir);
    if (t.warning) std::clog << "warning: " << *t.warning << '\n';
    return std::move(t.sources);
  }
  return synth_track(*entry.seed, entry.duration_seconds, entry.sample_rate, true);
}

std::vector<Split> assign_splits(std::size_t tracks, std::size_t train, std::size_t valid) {
  std::vector<Split> out(tracks, Split::test);
  for (std::size_t i = 0; i < tracks; ++i) {
    if (i < train) out[i] = Split::train;
    else if (i < train + valid) out[i] = Split::valid;
  }
  return out;
}

std::vector<Split> default_splits(std::size_t tracks) {
  const std::size_t held = tracks * 15 / 100;
  return assign_splits(tracks, tracks - 2 * held, held);
}

std::vector<TrackEntry> synthetic_entries(const std::vector<Split>& splits, double duration_seconds, int sample_rate,
                                          std::uint64_t seed) {
  std::vector<TrackEntry> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    TrackEntry e;
    e.split = splits[i];
    char id[32];
    std::snprintf(id, sizeof id, "track%03zu", i);
    e.id = id;
    e.duration_seconds = duration_seconds;
    e.sample_rate = sample_rate;
    e.seed = seed * 1000003ULL + i;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace wavesep::data
