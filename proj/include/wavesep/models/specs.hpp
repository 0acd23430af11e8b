#pragma once

#include <set>
#include <string>
#include <variant>
#include <vector>

#include "wavesep/util/key_value.hpp"

namespace wavesep::models {

/// Demucs U-net hyperparameters. Defaults are the desk-scale preset.
struct DemucsSpec {
  int depth = 4;                   // encoder/decoder blocks L
  int initial_channels = 8;        // C_1
  int growth = 2;                  // C_i = C_1 * growth^(i-1)
  int kernel = 8;
  int stride = 4;
  int lstm_layers = 2;             // 0 removes the recurrent bottleneck
  int context = 3;                 // decoder context convolution width
  int sources = 4;
  int audio_channels = 2;          // C_0
  double rescale_reference = 0.1;  // a
  bool rescale = true;
  bool glu = true;                 // false: ReLU after the 1x1 encoder convolutions
  bool decoder_glu = true;         // false: ReLU after the decoder context convolution

  static DemucsSpec full();
  static DemucsSpec desk() { return {}; }

  /// C_1 .. C_L.
  std::vector<int> channels() const;
  void validate() const;
};

/// Conv-Tasnet hyperparameters. Defaults are the music preset.
struct ConvTasnetSpec {
  int frontend_kernel = 20;
  int frontend_stride = 10;
  int frontend_channels = 256;
  int block_channels = 256;   // bottleneck width fed to and returned by every block
  int hidden_channels = 512;  // width inside a block
  int repeats = 4;            // R
  int blocks_per_repeat = 10; // N
  int block_kernel = 3;
  int sources = 4;
  int audio_channels = 2;

  static ConvTasnetSpec music() { return {}; }
  static ConvTasnetSpec speech();
  static ConvTasnetSpec desk();

  int block_count() const { return repeats * blocks_per_repeat; }
  /// 2^(n mod N) for the flattened block index n.
  int dilation(int block) const;
  /// 1 + sum over blocks of (block_kernel - 1) * dilation, in frontend frames.
  long long receptive_field_frames() const;
  /// Span of input samples reaching one output sample.
  long long receptive_field_samples() const;
  void validate() const;
};

using ModelSpec = std::variant<DemucsSpec, ConvTasnetSpec>;

util::KeyValues spec_to_key_values(const ModelSpec& spec);
/// Reads `<prefix>kind` (demucs | convtasnet, default demucs), then
/// `<prefix>preset` (desk, full for Demucs; desk, music, speech for
/// Conv-Tasnet), then any individual field overrides.
ModelSpec spec_from_key_values(const util::KeyValues& kv, const std::string& prefix = "");
/// Field names accepted for a model kind, including "kind" and "preset".
std::set<std::string> spec_key_names(const std::string& kind);
std::string model_kind_name(const ModelSpec& spec);

}  // namespace wavesep::models
