#include "wavesep/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace wavesep::data {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPeak = 0.9;

struct Grid {
  double beat_seconds;
  std::size_t beats;
};

double midi_to_hz(double note) { return 440.0 * std::pow(2.0, (note - 69.0) / 12.0); }

// Attack/release envelope for a note of `len` samples.
double note_envelope(std::size_t i, std::size_t len, double sr, double attack_s, double release_s) {
  const double t = static_cast<double>(i) / sr;
  const double rem = static_cast<double>(len - i) / sr;
  return std::min({1.0, t / attack_s, rem / release_s});
}

std::vector<double> drums(std::mt19937_64& rng, std::size_t n, double sr, const Grid& g) {
  std::vector<double> out(n, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t steps = g.beats * 2;
  for (std::size_t step = 0; step < steps; ++step) {
    // Kick-like bursts on beats, snare/hat-like on off-beats, some steps empty.
    const bool on_beat = step % 2 == 0;
    if (u(rng) > (on_beat ? 0.85 : 0.55)) continue;
    const std::size_t start = static_cast<std::size_t>(static_cast<double>(step) * g.beat_seconds * 0.5 * sr);
    if (start >= n) break;
    const double decay = on_beat ? 0.06 + 0.04 * u(rng) : 0.02 + 0.03 * u(rng);
    const double gain = 0.6 + 0.4 * u(rng);
    // One-pole smoothing makes beat bursts darker than off-beat ones.
    const double smooth = on_beat ? 0.6 + 0.2 * u(rng) : 0.05 * u(rng);
    const std::size_t len = std::min(n - start, static_cast<std::size_t>(6.0 * decay * sr));
    double state = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      state = smooth * state + (1.0 - smooth) * noise(rng);
      out[start + i] += gain * state * std::exp(-static_cast<double>(i) / (decay * sr));
    }
  }
  return out;
}

std::vector<double> bass(std::mt19937_64& rng, std::size_t n, double sr, const Grid& g) {
  std::vector<double> out(n, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Notes between 40 and 120 Hz (MIDI 28 .. 46).
  const double root = 28.0 + std::floor(u(rng) * 8.0);
  const int pattern[] = {0, 0, 7, 5, 0, 3, 7, 10};
  double phase = 0.0;
  std::size_t t = 0, k = 0;
  while (t < n) {
    const std::size_t len = std::min(n - t, static_cast<std::size_t>(g.beat_seconds * sr * (u(rng) < 0.7 ? 1.0 : 0.5)));
    double note = root + pattern[(k + static_cast<std::size_t>(u(rng) * 2.0)) % 8];
    note = std::clamp(note, 28.0, 46.0);
    const double f = midi_to_hz(note);
    for (std::size_t i = 0; i < len; ++i) {
      phase += kTwoPi * f / sr;
      const double env = note_envelope(i, len, sr, 0.01, 0.03);
      out[t + i] = env * (std::sin(phase) + 0.25 * std::sin(2.0 * phase));
    }
    t += len;
    ++k;
  }
  return out;
}

std::vector<double> other(std::mt19937_64& rng, std::size_t n, double sr, const Grid& g) {
  std::vector<double> out(n, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int chords[4][3] = {{0, 4, 7}, {5, 9, 12}, {7, 11, 14}, {-3, 0, 4}};
  const double base = 57.0 + std::floor(u(rng) * 6.0);  // about 220-330 Hz
  std::size_t t = 0;
  while (t < n) {
    const std::size_t len = std::min(n - t, static_cast<std::size_t>(2.0 * g.beat_seconds * sr));
    const auto& chord = chords[static_cast<std::size_t>(u(rng) * 4.0) % 4];
    double ph[3] = {kTwoPi * u(rng), kTwoPi * u(rng), kTwoPi * u(rng)};
    for (std::size_t i = 0; i < len; ++i) {
      const double env = note_envelope(i, len, sr, 0.05, 0.1);
      double v = 0.0;
      for (int c = 0; c < 3; ++c) {
        ph[c] += kTwoPi * midi_to_hz(base + chord[c]) / sr;
        // A few decaying harmonics give an organ-like mid-band timbre.
        v += std::sin(ph[c]) + 0.4 * std::sin(2.0 * ph[c]) + 0.15 * std::sin(3.0 * ph[c]);
      }
      out[t + i] = env * v / 3.0;
    }
    t += len;
  }
  return out;
}

std::vector<double> vocals(std::mt19937_64& rng, std::size_t n, double sr, const Grid& g) {
  std::vector<double> out(n, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int scale[] = {0, 2, 4, 5, 7, 9, 11, 12};
  const double base = 62.0 + std::floor(u(rng) * 8.0);  // about 290-470 Hz
  const double vib_rate = 5.0 + u(rng);
  const double formant = 700.0 + 500.0 * u(rng);
  const double nyquist = sr / 2.0;
  double phase = 0.0, vib_phase = 0.0;
  std::size_t t = 0;
  while (t < n) {
    const bool rest = u(rng) < 0.2;
    const std::size_t len = std::min(n - t, static_cast<std::size_t>(g.beat_seconds * sr * (1 + static_cast<int>(u(rng) * 2.0))));
    const double f0 = midi_to_hz(base + scale[static_cast<std::size_t>(u(rng) * 8.0) % 8]);
    for (std::size_t i = 0; i < len && !rest; ++i) {
      vib_phase += kTwoPi * vib_rate / sr;
      const double f = f0 * (1.0 + 0.02 * std::sin(vib_phase));
      phase += kTwoPi * f / sr;
      double v = 0.0;
      for (int h = 1; h <= 8; ++h) {
        const double fh = h * f;
        if (fh >= nyquist) break;
        const double emphasis = 0.3 + std::exp(-std::pow((fh - formant) / 300.0, 2.0));
        v += emphasis * std::sin(h * phase) / h;
      }
      out[t + i] = note_envelope(i, len, sr, 0.04, 0.06) * v;
    }
    t += len;
  }
  return out;
}

}  // namespace

SourceSet synth_track(std::uint64_t seed, double duration_seconds, int sample_rate, bool stereo) {
  if (!(duration_seconds >= 1.0)) throw std::invalid_argument("synth_track: duration must be at least 1 s");
  if (sample_rate < 1000) throw std::invalid_argument("synth_track: sample rate must be at least 1000 Hz");
  const double sr = sample_rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_seconds * sr));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double bpm = 90.0 + 50.0 * u(rng);
  const Grid grid{60.0 / bpm, static_cast<std::size_t>(std::ceil(duration_seconds * bpm / 60.0)) + 1};

  using Generator = std::vector<double> (*)(std::mt19937_64&, std::size_t, double, const Grid&);
  const Generator generators[4] = {drums, bass, other, vocals};
  const int channels = stereo ? 2 : 1;

  std::vector<dsp::Waveform> stems;
  for (std::size_t s = 0; s < 4; ++s) {
    std::mt19937_64 stem_rng(seed * 4 + s + 0x9e3779b97f4a7c15ULL);
    std::vector<double> mono = generators[s](stem_rng, n, sr, grid);
    // Unit RMS before the random level keeps the stems comparably loud.
    double energy = 0.0;
    for (double v : mono) energy += v * v;
    const double rms = std::sqrt(energy / static_cast<double>(std::max<std::size_t>(n, 1)));
    if (rms > 0.0) {
      for (double& v : mono) v /= rms;
    }
    const double level = 0.5 + 0.5 * u(rng);
    const double pan = stereo ? 0.2 + 0.6 * u(rng) : 0.5;  // 0 = left, 1 = right
    dsp::Waveform w(channels, n, sample_rate);
    for (int c = 0; c < channels; ++c) {
      const double gain = level * (stereo ? std::sqrt(c == 0 ? 1.0 - pan : pan) * std::sqrt(2.0) : 1.0);
      for (std::size_t i = 0; i < n; ++i) w.at(c, i) = gain * mono[i];
    }
    stems.push_back(std::move(w));
  }

  dsp::Waveform mix = stems[0];
  for (std::size_t s = 1; s < 4; ++s) mix += stems[s];
  double peak = mix.peak();
  for (const auto& w : stems) peak = std::max(peak, w.peak());
  const double gain = peak > 0.0 ? kPeak * (0.7 + 0.25 * u(rng)) / peak : 1.0;

  SourceSet set;
  for (std::size_t s = 0; s < 4; ++s) {
    stems[s] *= gain;
    set.set(kStemNames[s], std::move(stems[s]));
  }
  set.remix();
  return set;
}

}  // namespace wavesep::data
