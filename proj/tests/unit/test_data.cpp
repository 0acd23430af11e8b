#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "wavesep/data/augment.hpp"
#include "wavesep/data/manifest.hpp"
#include "wavesep/data/sampler.hpp"
#include "wavesep/data/synth.hpp"
#include "wavesep/data/track_dir.hpp"
#include "wavesep/dsp/stft.hpp"
#include "wavesep/error.hpp"

using namespace wavesep;
using data::SourceSet;
using testing::TempDir;

namespace {

double energy(const dsp::Waveform& w) {
  double e = 0.0;
  for (double v : w.samples()) e += v * v;
  return e;
}

// Share of spectral energy below `hz`, from a long-window STFT.
double low_band_share(const dsp::Waveform& w, double hz) {
  const dsp::StftParams p{2048, 512};
  const auto s = dsp::stft(w, p);
  const auto cutoff = static_cast<std::size_t>(hz * static_cast<double>(p.window_length) / w.sample_rate());
  double low = 0.0, total = 0.0;
  for (int c = 0; c < w.channels(); ++c)
    for (std::size_t b = 0; b < s.bins(); ++b)
      for (std::size_t f = 0; f < s.frames(); ++f) {
        const double e = std::norm(s.at(static_cast<std::size_t>(c), b, f));
        total += e;
        if (b <= cutoff) low += e;
      }
  return low / total;
}

SourceSet small_set(std::uint64_t seed, std::size_t length = 64, int channels = 2) {
  SourceSet s;
  for (std::size_t i = 0; i < data::kStemNames.size(); ++i) {
    s.set(data::kStemNames[i], testing::noise_waveform(channels, length, 8000, seed * 10 + i));
  }
  s.remix();
  return s;
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("source set alignment and mixture") {
    SourceSet s;
    s.set("drums", dsp::Waveform(2, 10, 8000));
    CHECK_THROWS(s.set("bass", dsp::Waveform(2, 11, 8000)));
    CHECK_THROWS(s.set("bass", dsp::Waveform(1, 10, 8000)));
    CHECK_THROWS(s.mixture_error());
    auto full = small_set(1);
    CHECK(full.mixture_error() == 0.0);
    CHECK(full.names() == std::vector<std::string>(data::kStemNames.begin(), data::kStemNames.end()));
    const auto part = full.slice(10, 20);
    CHECK(part.length() == 20);
    CHECK(part.mixture_error() <= 1e-12);
    CHECK(part.get("bass").at(1, 0) == full.get("bass").at(1, 10));
  }

  TEST_CASE("synth is deterministic, exact and bounded") {
    const auto a = data::synth_track(5, 4.0, 8000, true);
    const auto b = data::synth_track(5, 4.0, 8000, true);
    const auto c = data::synth_track(6, 4.0, 8000, true);
    REQUIRE(a.size() == 4);
    CHECK(a.length() == 32000);
    CHECK(a.channels() == 2);
    bool differs = false;
    for (const auto& name : data::kStemNames) {
      CHECK(a.get(name).samples() == b.get(name).samples());
      differs = differs || a.get(name).samples() != c.get(name).samples();
      for (double v : a.get(name).samples()) CHECK(std::abs(v) <= 0.9);
      CHECK(energy(a.get(name)) > 0.0);
    }
    CHECK(differs);
    CHECK(a.mixture_error() == 0.0);
    for (double v : a.mixture()->samples()) CHECK(std::abs(v) <= 0.9);
    CHECK(data::synth_track(1, 2.0, 8000, false).channels() == 1);
    CHECK_THROWS(data::synth_track(1, 0.5, 8000, true));
  }

  TEST_CASE("synth stems occupy their bands") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto t = data::synth_track(seed, 8.0, 8000, true);
      CHECK(low_band_share(t.get("bass"), 200.0) >= 0.7);
      CHECK(low_band_share(t.get("drums"), 200.0) < 0.5);
      CHECK(low_band_share(t.get("other"), 200.0) < 0.5);
      CHECK(low_band_share(t.get("vocals"), 200.0) < 0.5);
    }
  }

  TEST_CASE("track directory round trips") {
    TempDir dir("track");
    const auto t = data::synth_track(2, 3.0, 8000, true);
    data::save_track_dir(t, dir / "f32");
    const auto f = data::load_track_dir(dir / "f32");
    CHECK(f.mixture_error <= 1e-6);
    CHECK_FALSE(f.warning.has_value());
    for (const auto& name : data::kStemNames) {
      CHECK(testing::max_abs_diff(f.sources.get(name).samples(), t.get(name).samples()) <= 1e-7);
    }
    data::save_track_dir(t, dir / "pcm", dsp::WavEncoding::pcm16);
    const auto p = data::load_track_dir(dir / "pcm");
    CHECK(p.mixture_error <= 1e-3);
    CHECK_FALSE(p.warning.has_value());
  }

  TEST_CASE("missing stem and misaligned stems") {
    TempDir dir("track_bad");
    const auto t = data::synth_track(2, 2.0, 8000, true);
    data::save_track_dir(t, dir / "a");
    std::filesystem::remove(dir / "a" / "vocals.wav");
    try {
      data::load_track_dir(dir / "a");
      FAIL("expected an error");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("vocals") != std::string::npos);
    }
    data::save_track_dir(t, dir / "b");
    dsp::save_wav(dsp::Waveform(2, 100, 8000), dir / "b" / "bass.wav");
    CHECK_THROWS_AS(data::load_track_dir(dir / "b"), IoError);
  }

  TEST_CASE("inconsistent mixture only warns") {
    TempDir dir("track_warn");
    auto t = data::synth_track(2, 2.0, 8000, true);
    auto mix = *t.mixture();
    mix.at(0, 5) += 0.1;
    t.set_mixture(mix);
    data::save_track_dir(t, dir / "w");
    const auto loaded = data::load_track_dir(dir / "w");
    CHECK(loaded.warning.has_value());
    CHECK(loaded.mixture_error == doctest::Approx(0.1).epsilon(1e-5));
  }

  TEST_CASE("manifest round trip, splits and validation") {
    TempDir dir("manifest");
    const auto splits = data::assign_splits(20, 12, 4);
    CHECK(std::count(splits.begin(), splits.end(), data::Split::train) == 12);
    CHECK(std::count(splits.begin(), splits.end(), data::Split::test) == 4);
    const auto d = data::default_splits(20);
    CHECK(std::count(d.begin(), d.end(), data::Split::valid) == 3);
    CHECK(std::count(d.begin(), d.end(), data::Split::test) == 3);

    auto entries = data::synthetic_entries(splits, 30.0, 8000, 9);
    entries.push_back({data::Split::test, "disk_track", 3.0, 8000, std::nullopt, std::filesystem::path("tracks/a")});
    data::DatasetManifest m(entries);
    m.save(dir / "manifest.txt");
    const auto r = data::DatasetManifest::load(dir / "manifest.txt");
    REQUIRE(r.entries().size() == 21);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < 21; ++i) {
      CHECK(r.entries()[i].id == entries[i].id);
      CHECK(r.entries()[i].seed == entries[i].seed);
      CHECK(r.entries()[i].split == entries[i].split);
      CHECK(r.entries()[i].duration_seconds == entries[i].duration_seconds);
      ids.insert(r.entries()[i].id);
    }
    CHECK(ids.size() == 21);
    CHECK(r.split(data::Split::train).size() == 12);
    CHECK(r.base() == dir.path());

    auto dup = entries;
    dup.push_back(dup.front());
    CHECK_THROWS_AS(data::DatasetManifest{dup}, std::invalid_argument);
    CHECK_THROWS_AS(data::parse_split("holdout"), std::invalid_argument);
    CHECK_THROWS_AS(data::DatasetManifest::load(dir / "none.txt"), IoError);

    const auto track = r.load_track(r.entries()[0]);
    CHECK(track.length() == 240000);
    CHECK(track.mixture_error() == 0.0);
  }

  TEST_CASE("sampler: 20 extracts per 30 s track, exact coverage") {
    const std::vector<std::size_t> lengths{30 * 8000, 30 * 8000, 5 * 8000, 15 * 8000 + 7};
    const data::ExtractOptions opts;
    const auto plan = data::plan_epoch(lengths, 8000, opts, 1, 0);
    CHECK(plan.skipped_tracks == std::vector<std::size_t>{2});
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::vector<int> per_track(4, 0);
    for (const auto& e : plan.extracts) {
      CHECK(seen.insert({e.track, e.window_start}).second);
      CHECK(e.window_start % 8000 == 0);
      CHECK(e.offset >= e.window_start);
      CHECK(e.offset < e.window_start + 8000);
      CHECK(e.offset + data::crop_samples(opts, 8000) <= lengths[e.track]);
      ++per_track[e.track];
    }
    CHECK(per_track[0] == 20);
    CHECK(per_track[1] == 20);
    CHECK(per_track[2] == 0);
    CHECK(per_track[3] == 5);
    CHECK(data::crop_samples(opts, 8000) == 80000);

    const auto again = data::plan_epoch(lengths, 8000, opts, 1, 0);
    const auto next = data::plan_epoch(lengths, 8000, opts, 1, 1);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < plan.extracts.size(); ++i) {
      same = same && plan.extracts[i].track == again.extracts[i].track &&
             plan.extracts[i].offset == again.extracts[i].offset;
      differs = differs || plan.extracts[i].offset != next.extracts[i].offset;
    }
    CHECK(same);
    CHECK(differs);
  }

  TEST_CASE("extracts keep the mixture property and exact crop length") {
    const auto t = data::synth_track(3, 13.0, 8000, true);
    const std::vector<std::size_t> lengths{t.length()};
    const data::ExtractOptions opts;
    for (const auto& e : data::plan_epoch(lengths, 8000, opts, 4, 0).extracts) {
      const auto x = data::take_extract(t, e, opts);
      CHECK(x.length() == 80000);
      CHECK(x.mixture_error() <= 1e-12);
      CHECK(x.get("drums").at(0, 0) == t.get("drums").at(0, e.offset));
    }
  }

  TEST_CASE("augmentation identity, involutions and remix") {
    const auto item = small_set(1);
    data::AugmentOptions off{false, 0.0, 0.0};
    const auto same = data::augment_batch({item}, off, 3);
    for (const auto& name : data::kStemNames) CHECK(same[0].get(name).samples() == item.get(name).samples());

    auto w = item.get("vocals");
    data::flip_sign(w);
    data::flip_sign(w);
    CHECK(w.samples() == item.get("vocals").samples());
    data::swap_channels(w);
    CHECK(w.at(0, 3) == item.get("vocals").at(1, 3));
    data::swap_channels(w);
    CHECK(w.samples() == item.get("vocals").samples());
    auto mono = testing::noise_waveform(1, 10, 8000, 1);
    const auto mono_before = mono.samples();
    data::swap_channels(mono);
    CHECK(mono.samples() == mono_before);

    const std::vector<SourceSet> batch{small_set(1), small_set(2), small_set(3)};
    const auto out = data::augment_batch(batch, {}, 11);
    REQUIRE(out.size() == 3);
    for (const auto& o : out) {
      CHECK(o.mixture_error() == 0.0);
      // Every stem is some batch item's stem, possibly swapped and negated.
      for (const auto& name : data::kStemNames) {
        bool found = false;
        for (const auto& b : batch) {
          auto v = b.get(name);
          for (int flip = 0; flip < 2 && !found; ++flip) {
            for (int swap = 0; swap < 2 && !found; ++swap) {
              auto u = v;
              if (flip) data::flip_sign(u);
              if (swap) data::swap_channels(u);
              found = u.samples() == o.get(name).samples();
            }
          }
        }
        CHECK(found);
      }
    }
    const auto repeat = data::augment_batch(batch, {}, 11);
    for (std::size_t i = 0; i < 3; ++i) CHECK(repeat[i].mixture()->samples() == out[i].mixture()->samples());
  }

  TEST_CASE("augmentation probabilities are honoured") {
    const std::vector<SourceSet> batch{small_set(4)};
    data::AugmentOptions sign_only{false, 0.0, 0.5};
    int flipped = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto out = data::augment_batch(batch, sign_only, seed);
      for (const auto& name : data::kStemNames) {
        ++total;
        if (out[0].get(name).at(0, 0) == -batch[0].get(name).at(0, 0)) ++flipped;
      }
    }
    const double rate = static_cast<double>(flipped) / total;
    CHECK(rate > 0.4);
    CHECK(rate < 0.6);
  }
}
