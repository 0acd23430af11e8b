#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wavesep/data/source_set.hpp"

namespace wavesep::metrics {

struct EvalOptions {
  double frame_seconds = 1.0;
  double hop_seconds = 1.0;
  /// Reference frames whose mean square falls below this are silent.
  double silence_threshold = 1e-8;
};

/// Metrics of one frame; `evaluated` is false for silent or degenerate frames,
/// in which case the values are NaN.
struct FrameMetrics {
  std::size_t index = 0;
  bool evaluated = false;
  double sdr = 0.0;
  double sir = 0.0;
  double sar = 0.0;
};

struct SourceReport {
  std::string source;
  std::vector<FrameMetrics> frames;
  /// Medians over evaluated frames; empty when no frame was evaluated.
  std::optional<double> median_sdr;
  std::optional<double> median_sir;
  std::optional<double> median_sar;
};

struct TrackReport {
  std::string track;
  std::vector<SourceReport> sources;
};

enum class Metric { sdr, sir, sar };

struct EvalReport {
  double frame_seconds = 1.0;
  double hop_seconds = 1.0;
  std::vector<TrackReport> tracks;

  /// Source names in first-seen order.
  std::vector<std::string> source_names() const;
  /// Median over tracks of the per-track median; empty if no track evaluated it.
  std::optional<double> global_median(const std::string& source, Metric metric) const;
};

/// Median of a non-empty list (mean of the two middle values for even sizes).
double median(std::vector<double> values);

/// Framewise BSS-eval of every reference stem against the estimate stem of the
/// same name. Stereo channels are concatenated per frame.
TrackReport evaluate_track(const data::SourceSet& estimates, const data::SourceSet& references,
                           const std::string& track_id, const EvalOptions& options = {});

/// One estimate/reference pair per track, evaluated in order (in parallel
/// when `threads` > 1; the report order never changes).
struct TrackPair {
  std::string id;
  data::SourceSet estimates;
  data::SourceSet references;
};
EvalReport evaluate_tracks(const std::vector<TrackPair>& tracks, const EvalOptions& options = {}, int threads = 1);

/// Track directories below `root`: `root` itself when it holds stem files,
/// otherwise every sub-directory that does, sorted by name.
std::vector<std::filesystem::path> track_directories(const std::filesystem::path& root);

/// Pairs `<estimates>/<track>/<stem>.wav` with the reference track directories.
EvalReport evaluate_directories(const std::filesystem::path& estimates, const std::filesystem::path& references,
                                const EvalOptions& options = {}, int threads = 1);

/// Every reference track scored with its own mixture as the estimate of each stem.
EvalReport evaluate_mixture_baseline(const std::filesystem::path& references, const EvalOptions& options = {},
                                     int threads = 1);

/// CSV with header `track,source,frame_index,sdr,sir,sar`, one row per frame.
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
std::string report_csv(const EvalReport& report);

/// Structured-text summary: per-track medians and global medians.
std::string report_summary(const EvalReport& report);

}  // namespace wavesep::metrics
