#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "wavesep/ad/tensor.hpp"
#include "wavesep/data/manifest.hpp"
#include "wavesep/data/source_set.hpp"
#include "wavesep/models/model.hpp"
#include "wavesep/train/adam.hpp"
#include "wavesep/train/config.hpp"

namespace wavesep::train {

/// One CSV row. Epoch 0 is the untrained model; its train_loss is NaN.
struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_l1 = 0.0;
  double wall_seconds = 0.0;
};

struct TrainOptions {
  bool resume = false;
  std::ostream* progress = nullptr;
  int threads = 1;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  int best_epoch = 0;
  double best_valid_l1 = 0.0;
  bool stopped_on_time = false;
};

/// Mixture (B, C, T) and stems (B, S, C, T) in the usual stem order.
struct Batch {
  ad::Tensor<float> mixture;
  ad::Tensor<float> sources;
};

Batch make_batch(std::span<const data::SourceSet> items);

/// Forward, loss, backward, clipping and one Adam update. Returns the loss
/// before the update; throws NumericError on a non-finite loss.
double train_step(models::SeparationModel<float>& model, Adam<float>& optimizer, LossKind loss, const Batch& batch,
                  double clip_norm);

/// Loss of a batch without touching parameters.
double batch_loss(models::SeparationModel<float>& model, LossKind loss, const Batch& batch);

/// Mean absolute error over every coordinate of every track. Conv-Tasnet
/// separates chunk by chunk, Demucs in one pass.
double validation_l1(models::SeparationModel<float>& model, std::span<const data::SourceSet> tracks,
                     double chunk_seconds, int threads = 1);

/// Trains on the manifest's train split and selects on its valid split.
/// Writes `<checkpoint>/best`, `<checkpoint>/last` (model, optimizer moments
/// and loop state), `<checkpoint>/log.csv` and `<checkpoint>/config.txt`.
TrainResult train(const TrainConfig& config, const data::DatasetManifest& manifest, const TrainOptions& options = {});
/// Loads the manifest named by the config.
TrainResult train(const TrainConfig& config, const TrainOptions& options = {});

void write_log_csv(std::span<const EpochRecord> log, const std::filesystem::path& path);
std::vector<EpochRecord> read_log_csv(const std::filesystem::path& path);

}  // namespace wavesep::train
