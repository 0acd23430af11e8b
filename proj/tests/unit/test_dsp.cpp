#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>

#include "helpers.hpp"
#include "wavesep/dsp/mel.hpp"
#include "wavesep/dsp/stft.hpp"
#include "wavesep/dsp/text_grid.hpp"
#include "wavesep/dsp/wav_io.hpp"
#include "wavesep/dsp/waveform.hpp"
#include "wavesep/error.hpp"

using namespace wavesep;
using testing::TempDir;

namespace {

void put16(std::ofstream& out, std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); }
void put32(std::ofstream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

// Minimal PCM16 file written byte by byte, independent of save_wav.
void write_pcm16(const std::filesystem::path& path, int channels, int rate, const std::vector<std::int16_t>& samples) {
  std::ofstream out(path, std::ios::binary);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, 1);
  put16(out, static_cast<std::uint16_t>(channels));
  put32(out, static_cast<std::uint32_t>(rate));
  put32(out, static_cast<std::uint32_t>(rate * channels * 2));
  put16(out, static_cast<std::uint16_t>(channels * 2));
  put16(out, 16);
  out.write("data", 4);
  put32(out, data_bytes);
  for (auto s : samples) put16(out, static_cast<std::uint16_t>(s));
}

dsp::Waveform sine(double freq, std::size_t length, int rate, double amp = 0.5) {
  dsp::Waveform w(1, length, rate);
  for (std::size_t t = 0; t < length; ++t) {
    w.at(0, t) = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(t) / rate);
  }
  return w;
}

}  // namespace

TEST_SUITE("dsp") {
  TEST_CASE("waveform alignment and slicing") {
    dsp::Waveform a(2, 10, 8000), b(2, 10, 8000), c(2, 10, 16000), d(1, 10, 8000);
    CHECK(a.aligned_with(b));
    CHECK_FALSE(a.aligned_with(c));
    CHECK_FALSE(a.aligned_with(d));
    a.at(1, 9) = 2.0;
    const auto s = a.slice(8, 4);
    CHECK(s.length() == 4);
    CHECK(s.at(1, 1) == 2.0);
    CHECK(s.at(1, 2) == 0.0);
    CHECK(a.resized(3).length() == 3);
    CHECK(a.duration_seconds() == doctest::Approx(10.0 / 8000.0));
  }

  TEST_CASE("pcm16 value 16384 loads as 0.5") {
    TempDir dir("wav16");
    write_pcm16(dir / "half.wav", 1, 8000, {16384});
    const auto w = dsp::load_wav(dir / "half.wav");
    REQUIRE(w.channels() == 1);
    REQUIRE(w.length() == 1);
    CHECK(w.at(0, 0) == doctest::Approx(0.5).epsilon(1.0 / 32768.0));
  }

  TEST_CASE("stereo one-second header arithmetic") {
    TempDir dir("wavhdr");
    write_pcm16(dir / "s.wav", 2, 44100, std::vector<std::int16_t>(2 * 44100, 0));
    const auto w = dsp::load_wav(dir / "s.wav");
    CHECK(w.channels() == 2);
    CHECK(w.length() == 44100);
    CHECK(w.sample_rate() == 44100);
  }

  TEST_CASE("float32 round trip is exact") {
    TempDir dir("wavf32");
    auto w = testing::noise_waveform(2, 1000, 8000, 1);
    for (double& v : w.samples()) v = static_cast<float>(v);
    dsp::save_wav(w, dir / "n.wav", dsp::WavEncoding::float32);
    const auto r = dsp::load_wav(dir / "n.wav");
    CHECK(r.aligned_with(w));
    CHECK(r.samples() == w.samples());
  }

  TEST_CASE("pcm16 round trip error and clamp") {
    TempDir dir("wav16rt");
    auto w = testing::noise_waveform(1, 500, 8000, 2);
    w.at(0, 0) = 1.5;
    w.at(0, 1) = -1.0;
    dsp::save_wav(w, dir / "n.wav", dsp::WavEncoding::pcm16);
    const auto r = dsp::load_wav(dir / "n.wav");
    CHECK(r.at(0, 0) == 1.0 - 1.0 / 32768.0);
    CHECK(r.at(0, 1) == -1.0);
    for (std::size_t t = 2; t < w.length(); ++t) {
      const double expected = std::clamp(w.at(0, t), -1.0, 1.0 - 1.0 / 32768.0);
      CHECK(std::abs(r.at(0, t) - expected) <= 1.0 / 32768.0);
    }
  }

  TEST_CASE("empty waveform round trip") {
    TempDir dir("wavempty");
    dsp::save_wav(dsp::Waveform(2, 0, 8000), dir / "e.wav");
    const auto r = dsp::load_wav(dir / "e.wav");
    CHECK(r.length() == 0);
    CHECK(r.channels() == 2);
  }

  TEST_CASE("malformed and missing files raise IoError") {
    TempDir dir("wavbad");
    {
      std::ofstream out(dir / "bad.wav");
      out << "not a wave file at all";
    }
    CHECK_THROWS_AS(dsp::load_wav(dir / "bad.wav"), IoError);
    CHECK_THROWS_AS(dsp::load_wav(dir / "missing.wav"), IoError);
  }

  TEST_CASE("stft geometry and zero input") {
    const dsp::Waveform z(2, 1000, 8000);
    const auto s = dsp::stft(z, {256, 64});
    CHECK(s.bins() == 129);
    CHECK(s.frames() == dsp::stft_frame_count(1000, 64));
    CHECK(s.frames() == 1 + 1000 / 64);
    for (double v : s.real()) CHECK(v == 0.0);
    for (double v : s.imag()) CHECK(v == 0.0);
  }

  TEST_CASE("stft rejects zero hop and window") {
    const dsp::Waveform z(1, 100, 8000);
    CHECK_THROWS(dsp::stft(z, {256, 0}));
    CHECK_THROWS(dsp::stft(z, {0, 1}));
  }

  TEST_CASE("bin-centred sinusoid concentrates in its bin") {
    const std::size_t n = 512;
    const int rate = 8000;
    const std::size_t k = 37;
    const auto w = sine(static_cast<double>(k) * rate / n, 8000, rate);
    const auto s = dsp::stft(w, {n, n / 4});
    // Interior frames only: the edges see the reflection padding.
    for (std::size_t f = 4; f + 4 < s.frames(); ++f) {
      double total = 0.0, near = 0.0;
      for (std::size_t b = 0; b < s.bins(); ++b) {
        const double e = std::norm(s.at(0, b, f));
        total += e;
        if (b + 1 >= k && b <= k + 1) near += e;
      }
      // A Hann window spreads a bin-centred tone over k-1, k, k+1 exactly.
      CHECK(near / total >= 0.95);
      const double centre = std::norm(s.at(0, k, f));
      CHECK(centre / total >= 0.6);
    }
  }

  TEST_CASE("stft is linear") {
    const auto a = testing::noise_waveform(2, 3000, 8000, 3);
    const auto b = testing::noise_waveform(2, 3000, 8000, 4);
    const auto sa = dsp::stft(a, {512, 128}), sb = dsp::stft(b, {512, 128}), sab = dsp::stft(a + b, {512, 128});
    for (std::size_t i = 0; i < sab.real().size(); ++i) {
      const double scale = std::max(1.0, std::abs(sab.real()[i]));
      CHECK(std::abs(sa.real()[i] + sb.real()[i] - sab.real()[i]) <= 1e-6 * scale);
      CHECK(std::abs(sa.imag()[i] + sb.imag()[i] - sab.imag()[i]) <= 1e-6 * std::max(1.0, std::abs(sab.imag()[i])));
    }
  }

  TEST_CASE("istft reconstructs white noise") {
    for (std::uint64_t seed : {5u, 6u, 7u}) {
      const auto x = testing::noise_waveform(2, 10000 + seed * 17, 8000, seed);
      const auto s = dsp::stft(x, {1024, 256});
      const auto y = dsp::istft(s, 256, x.length(), 8000);
      REQUIRE(y.aligned_with(x));
      CHECK(testing::max_abs_diff(x.samples(), y.samples()) <= 1e-6);
    }
  }

  TEST_CASE("istft of zero spectrogram is zero") {
    const dsp::ComplexSpectrogram s(1, 20, {256, 64});
    const auto y = dsp::istft(s, 64, 1000, 8000);
    CHECK(y.length() == 1000);
    for (double v : y.samples()) CHECK(v == 0.0);
  }

  TEST_CASE("istft round trip on a tonal 0.8 s excerpt") {
    const int rate = 8000;
    dsp::Waveform x(1, 6400, rate);
    for (std::size_t t = 0; t < x.length(); ++t) {
      const double time = static_cast<double>(t) / rate;
      x.at(0, t) = 0.3 * std::sin(2 * std::numbers::pi * 220.0 * time) * std::exp(-2.0 * time) +
                   0.1 * std::sin(2 * std::numbers::pi * 660.0 * time + 0.3);
    }
    const auto y = dsp::istft(dsp::stft(x, {1024, 256}), 256, x.length(), rate);
    CHECK(testing::max_abs_diff(x.samples(), y.samples()) <= 1e-6);
  }

  TEST_CASE("mel scale round trip and filterbank shape") {
    for (double hz : {0.0, 100.0, 700.0, 3999.0}) CHECK(dsp::mel_to_hz(dsp::hz_to_mel(hz)) == doctest::Approx(hz));
    CHECK(dsp::hz_to_mel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
    const auto fb = dsp::mel_filterbank(20, 512, 8000);
    CHECK(fb.rows == 20);
    CHECK(fb.cols == 257);
    for (double v : fb.values) CHECK(v >= 0.0);
    CHECK_THROWS(dsp::mel_filterbank(300, 512, 8000));
  }

  TEST_CASE("mel spectrogram: zeros, monotonicity and tone placement") {
    const dsp::StftParams p{512, 128};
    const auto zero = dsp::mel_spectrogram(dsp::Waveform(1, 4000, 8000), 24, p);
    for (double v : zero.values) CHECK(v == 0.0);

    auto x = testing::noise_waveform(2, 4000, 8000, 9);
    const auto m1 = dsp::mel_spectrogram(x, 24, p);
    x *= 2.0;
    const auto m2 = dsp::mel_spectrogram(x, 24, p);
    for (std::size_t i = 0; i < m1.values.size(); ++i) CHECK(m2.values[i] >= m1.values[i]);

    const double freq = 1000.0;
    const auto tone = dsp::mel_spectrogram(sine(freq, 8000, 8000), 24, p);
    const auto fb = dsp::mel_filterbank(24, 512, 8000);
    const std::size_t bin = static_cast<std::size_t>(std::lround(freq * 512 / 8000));
    std::size_t best_band = 0;
    for (std::size_t r = 1; r < fb.rows; ++r) {
      if (fb.at(r, bin) > fb.at(best_band, bin)) best_band = r;
    }
    const std::size_t frame = tone.cols / 2;
    std::size_t argmax = 0;
    for (std::size_t r = 1; r < tone.rows; ++r) {
      if (tone.at(r, frame) > tone.at(argmax, frame)) argmax = r;
    }
    CHECK(argmax == best_band);
  }

  TEST_CASE("text grid round trip") {
    TempDir dir("grid");
    dsp::Grid g{2, 3, {1.0, -2.5, 3.25, 0.0, 1e-9, 7.0}};
    dsp::write_text_grid(g, dir / "g.txt");
    const auto r = dsp::read_text_grid(dir / "g.txt");
    CHECK(r.rows == 2);
    CHECK(r.cols == 3);
    CHECK(r.values == g.values);
  }
}
