#include "wavesep/metrics/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wavesep/util/parallel.hpp"

#include "wavesep/data/track_dir.hpp"
#include "wavesep/dsp/wav_io.hpp"
#include "wavesep/error.hpp"
#include "wavesep/metrics/bss_eval.hpp"

namespace wavesep::metrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Channels of [begin, begin + count) laid end to end.
std::vector<double> flatten(const dsp::Waveform& w, std::size_t begin, std::size_t count) {
  std::vector<double> out;
  out.reserve(count * static_cast<std::size_t>(w.channels()));
  for (int c = 0; c < w.channels(); ++c) {
    const auto ch = w.channel(c);
    out.insert(out.end(), ch.begin() + static_cast<std::ptrdiff_t>(begin),
               ch.begin() + static_cast<std::ptrdiff_t>(begin + count));
  }
  return out;
}

double mean_square(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x * x;
  return s / static_cast<double>(v.size());
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : "null"; }

const std::optional<double>& pick(const SourceReport& s, Metric m) {
  return m == Metric::sdr ? s.median_sdr : m == Metric::sir ? s.median_sir : s.median_sar;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<std::string> EvalReport::source_names() const {
  std::vector<std::string> names;
  for (const auto& t : tracks) {
    for (const auto& s : t.sources) {
      if (std::find(names.begin(), names.end(), s.source) == names.end()) names.push_back(s.source);
    }
  }
  return names;
}

std::optional<double> EvalReport::global_median(const std::string& source, Metric metric) const {
  std::vector<double> per_track;
  for (const auto& t : tracks) {
    for (const auto& s : t.sources) {
      if (s.source == source && pick(s, metric)) per_track.push_back(*pick(s, metric));
    }
  }
  if (per_track.empty()) return std::nullopt;
  return median(per_track);
}

TrackReport evaluate_track(const data::SourceSet& estimates, const data::SourceSet& references,
                           const std::string& track_id, const EvalOptions& options) {
  if (references.empty()) throw std::invalid_argument("evaluate_track: no reference stems");
  if (!(options.frame_seconds > 0.0) || !(options.hop_seconds > 0.0)) {
    throw std::invalid_argument("evaluate_track: frame and hop must be positive");
  }
  const auto names = references.names();
  const dsp::Waveform& first = references.get(names.front());
  for (const auto& n : names) {
    if (!estimates.has(n)) throw std::invalid_argument("evaluate_track: missing estimate for '" + n + "'");
    if (!estimates.get(n).aligned_with(first)) {
      throw std::invalid_argument("evaluate_track: estimate '" + n + "' is not aligned with the references");
    }
  }

  const std::size_t length = first.length();
  const double sr = first.sample_rate();
  const std::size_t win = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(options.frame_seconds * sr)));
  const std::size_t hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(options.hop_seconds * sr)));
  // Whole windows only; a track shorter than one window is one frame.
  std::size_t frame_count = length >= win ? (length - win) / hop + 1 : (length > 0 ? 1 : 0);
  const std::size_t frame_len = std::min(win, length);

  TrackReport report;
  report.track = track_id;
  for (const auto& n : names) report.sources.push_back({n, {}, {}, {}, {}});

  for (std::size_t f = 0; f < frame_count; ++f) {
    const std::size_t begin = f * hop;
    std::vector<std::vector<double>> refs;
    std::vector<bool> silent;
    for (const auto& n : names) {
      refs.push_back(flatten(references.get(n), begin, frame_len));
      silent.push_back(mean_square(refs.back()) < options.silence_threshold);
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
      FrameMetrics fm{f, false, kNaN, kNaN, kNaN};
      if (!silent[j]) {
        // Silent references carry no direction; they are left out of the span.
        std::vector<std::span<const double>> basis;
        std::size_t target = 0;
        for (std::size_t k = 0; k < names.size(); ++k) {
          if (k == j) target = basis.size();
          if (k == j || !silent[k]) basis.emplace_back(refs[k]);
        }
        const auto est = flatten(estimates.get(names[j]), begin, frame_len);
        try {
          const Decomposition d = decompose(est, basis, target);
          fm = {f, true, sdr(d), sir(d), sar(d)};
        } catch (const DegenerateReferences&) {
          // Rank-deficient frame: reported as not evaluated.
        }
      }
      report.sources[j].frames.push_back(fm);
    }
  }

  for (auto& s : report.sources) {
    std::vector<double> a, b, c;
    for (const auto& fm : s.frames) {
      if (!fm.evaluated) continue;
      a.push_back(fm.sdr);
      b.push_back(fm.sir);
      c.push_back(fm.sar);
    }
    if (!a.empty()) {
      s.median_sdr = median(a);
      s.median_sir = median(b);
      s.median_sar = median(c);
    }
  }
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "track,source,frame_index,sdr,sir,sar\n";
  for (const auto& t : report.tracks) {
    for (const auto& s : t.sources) {
      for (const auto& f : s.frames) {
        out << t.track << ',' << s.source << ',' << f.index << ',' << number(f.sdr) << ',' << number(f.sir) << ','
            << number(f.sar) << '\n';
      }
    }
  }
  return out.str();
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << report_csv(report);
  if (!out) throw IoError("cannot write " + path.string());
}

std::string report_summary(const EvalReport& report) {
  std::ostringstream out;
  out << "{\n  \"frame_seconds\": " << number(report.frame_seconds) << ",\n  \"hop_seconds\": "
      << number(report.hop_seconds) << ",\n  \"tracks\": [\n";
  for (std::size_t i = 0; i < report.tracks.size(); ++i) {
    const auto& t = report.tracks[i];
    out << "    {\"track\": \"" << t.track << "\", \"medians\": {";
    for (std::size_t k = 0; k < t.sources.size(); ++k) {
      const auto& s = t.sources[k];
      out << (k ? ", " : "") << '"' << s.source << "\": {\"sdr\": " << optional_number(s.median_sdr)
          << ", \"sir\": " << optional_number(s.median_sir) << ", \"sar\": " << optional_number(s.median_sar) << '}';
    }
    out << "}}" << (i + 1 < report.tracks.size() ? "," : "") << '\n';
  }
  out << "  ],\n  \"global\": {";
  const auto names = report.source_names();
  for (std::size_t k = 0; k < names.size(); ++k) {
    out << (k ? ", " : "") << '"' << names[k] << "\": {\"sdr\": "
        << optional_number(report.global_median(names[k], Metric::sdr))
        << ", \"sir\": " << optional_number(report.global_median(names[k], Metric::sir))
        << ", \"sar\": " << optional_number(report.global_median(names[k], Metric::sar)) << '}';
  }
  out << "}\n}\n";
  return out.str();
}

EvalReport evaluate_tracks(const std::vector<TrackPair>& tracks, const EvalOptions& options, int threads) {
  EvalReport report;
  report.frame_seconds = options.frame_seconds;
  report.hop_seconds = options.hop_seconds;
  report.tracks.resize(tracks.size());
  util::parallel_for(tracks.size(), threads, [&](std::size_t i) {
    report.tracks[i] = evaluate_track(tracks[i].estimates, tracks[i].references, tracks[i].id, options);
  });
  return report;
}

std::vector<std::filesystem::path> track_directories(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  auto holds_stems = [](const fs::path& dir) {
    for (const auto& name : data::kStemNames) {
      if (fs::exists(dir / (name + ".wav"))) return true;
    }
    return false;
  };
  if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());
  if (holds_stems(root)) return {root};
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && holds_stems(entry.path())) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IoError("no track directories under " + root.string());
  return dirs;
}

EvalReport evaluate_directories(const std::filesystem::path& estimates, const std::filesystem::path& references,
                                const EvalOptions& options, int threads) {
  const auto dirs = track_directories(references);
  const bool single = dirs.size() == 1 && dirs[0] == references;
  std::vector<TrackPair> pairs;
  for (const auto& dir : dirs) {
    TrackPair p;
    p.id = dir.filename().string();
    p.references = data::load_track_dir(dir).sources;
    p.references.clear_mixture();
    const auto est_dir = single && !std::filesystem::is_directory(estimates / p.id) ? estimates : estimates / p.id;
    for (const auto& name : p.references.names()) {
      const auto file = est_dir / (name + ".wav");
      if (!std::filesystem::exists(file)) throw IoError("missing estimate " + file.string());
      p.estimates.set(name, dsp::load_wav(file));
    }
    pairs.push_back(std::move(p));
  }
  return evaluate_tracks(pairs, options, threads);
}

EvalReport evaluate_mixture_baseline(const std::filesystem::path& references, const EvalOptions& options,
                                     int threads) {
  std::vector<TrackPair> pairs;
  for (const auto& dir : track_directories(references)) {
    TrackPair p;
    p.id = dir.filename().string();
    p.references = data::load_track_dir(dir).sources;
    const dsp::Waveform mix = *p.references.mixture();
    p.references.clear_mixture();
    for (const auto& name : p.references.names()) p.estimates.set(name, mix);
    pairs.push_back(std::move(p));
  }
  return evaluate_tracks(pairs, options, threads);
}

}  // namespace wavesep::metrics
