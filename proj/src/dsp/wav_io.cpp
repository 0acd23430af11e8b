#include "wavesep/dsp/wav_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavesep/error.hpp"

namespace wavesep::dsp {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;
constexpr double kPcmScale = 32768.0;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Waveform load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw IoError(where + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    std::size_t size = read_u32(chunk + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Tolerate a truncated data chunk (streamed writers leave the size unset).
      if (std::memcmp(chunk, "data", 4) != 0) throw IoError(where + ": truncated chunk");
      size = bytes.size() - body;
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw IoError(where + ": fmt chunk too short");
      const std::uint8_t* f = bytes.data() + body;
      format = read_u16(f);
      channels = read_u16(f + 2);
      sample_rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 26) throw IoError(where + ": extensible fmt chunk too short");
        format = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) throw IoError(where + ": missing fmt chunk");
  if (data == nullptr) throw IoError(where + ": missing data chunk");
  if (channels == 0) throw IoError(where + ": zero channels");
  if (channels > 2) throw IoError(where + ": unsupported channel count " + std::to_string(channels));
  if (sample_rate == 0) throw IoError(where + ": zero sample rate");

  std::size_t bytes_per_sample = 0;
  if (format == kFormatPcm && bits == 16) {
    bytes_per_sample = 2;
  } else if (format == kFormatFloat && bits == 32) {
    bytes_per_sample = 4;
  } else {
    throw IoError(where + ": unsupported encoding (format " + std::to_string(format) + ", " +
                  std::to_string(bits) + " bits)");
  }

  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t length = data_size / frame_bytes;
  Waveform w(channels, length, static_cast<int>(sample_rate));
  for (std::size_t t = 0; t < length; ++t) {
    for (int c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + t * frame_bytes + static_cast<std::size_t>(c) * bytes_per_sample;
      if (bytes_per_sample == 2) {
        w.at(c, t) = static_cast<std::int16_t>(read_u16(p)) / kPcmScale;
      } else {
        w.at(c, t) = static_cast<double>(std::bit_cast<float>(read_u32(p)));
      }
    }
  }
  return w;
}

void save_wav(const Waveform& w, const std::filesystem::path& path, WavEncoding encoding) {
  if (!w.all_finite()) throw std::invalid_argument("cannot save non-finite samples to " + path.string());
  const bool pcm = encoding == WavEncoding::pcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t channels = static_cast<std::uint16_t>(w.channels());
  const std::uint32_t block_align = channels * bits / 8;
  const std::uint64_t data_size = static_cast<std::uint64_t>(w.length()) * block_align;
  if (data_size > 0xFFFFFFFFull - 36) throw IoError(path.string() + ": waveform too long for RIFF");

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, static_cast<std::uint32_t>(36 + data_size));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, pcm ? kFormatPcm : kFormatFloat);
  put_u16(out, channels);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate()) * block_align);
  put_u16(out, static_cast<std::uint16_t>(block_align));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, static_cast<std::uint32_t>(data_size));

  for (std::size_t t = 0; t < w.length(); ++t) {
    for (int c = 0; c < w.channels(); ++c) {
      const double v = w.at(c, t);
      if (pcm) {
        const double q = std::clamp(std::nearbyint(v * kPcmScale), -32768.0, 32767.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed for " + path.string());
}

}  // namespace wavesep::dsp
