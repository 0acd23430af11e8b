#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

#include "wavesep/data/augment.hpp"
#include "wavesep/data/sampler.hpp"
#include "wavesep/models/specs.hpp"
#include "wavesep/train/loss.hpp"
#include "wavesep/util/key_value.hpp"

namespace wavesep::train {

/// Everything a training run needs. File layout:
///
///     loss = l1
///     learning_rate = 3e-4
///     batch_size = 4
///     epochs = 20
///     seed = 1
///     manifest = data/manifest.txt
///     checkpoint = runs/demucs
///     [model]
///     kind = demucs
///     preset = desk
///     [augment]
///     swap_probability = 0.5
///     [data]
///     crop_seconds = 10
///
/// Relative paths resolve against the config file's directory.
struct TrainConfig {
  LossKind loss = LossKind::l1;
  double learning_rate = 3e-4;
  int batch_size = 4;
  int epochs = 20;
  std::uint64_t seed = 0;
  models::ModelSpec model = models::DemucsSpec::desk();
  data::AugmentOptions augment;
  data::ExtractOptions extract;
  double clip_norm = 5.0;
  double valid_chunk_seconds = 8.0;  // chunked validation for Conv-Tasnet
  double max_wall_seconds = 0.0;     // stop after the epoch that crosses it; 0 = no limit
  std::filesystem::path manifest;
  std::filesystem::path checkpoint_dir;

  /// Throws std::invalid_argument on non-positive sizes, rates or lengths.
  void validate() const;

  /// Unknown keys are rejected by name. Extract lengths default per model:
  /// 11 s windows with 10 s crops for Demucs, 3 s windows with 2 s crops for Conv-Tasnet.
  static TrainConfig from_key_values(const util::KeyValues& kv, const std::filesystem::path& base_dir = {});
  static TrainConfig load(const std::filesystem::path& file);

  util::KeyValues to_key_values() const;
};

data::ExtractOptions default_extract(const models::ModelSpec& spec);

std::set<std::string> config_key_names(const std::string& model_kind);

}  // namespace wavesep::train
