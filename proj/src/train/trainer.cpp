#include "wavesep/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "wavesep/ad/checkpoint.hpp"
#include "wavesep/data/augment.hpp"
#include "wavesep/data/sampler.hpp"
#include "wavesep/error.hpp"
#include "wavesep/infer/separate.hpp"
#include "wavesep/util/key_value.hpp"
#include "wavesep/util/parallel.hpp"

namespace wavesep::train {

namespace {

std::string number_text(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

std::uint64_t batch_seed(std::uint64_t seed, int epoch, std::size_t batch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(batch), 0xa11u};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<data::SourceSet> load_split(const data::DatasetManifest& manifest, data::Split split) {
  std::vector<data::SourceSet> tracks;
  for (const auto& entry : manifest.split(split)) tracks.push_back(manifest.load_track(entry));
  return tracks;
}

void write_state(const std::filesystem::path& dir, int epoch, int best_epoch, double best_valid) {
  util::KeyValues kv;
  kv.set("epoch", std::to_string(epoch));
  kv.set("best_epoch", std::to_string(best_epoch));
  kv.set("best_valid_l1", number_text(best_valid));
  std::ofstream out(dir / "state.txt");
  out << kv.to_text();
  if (!out) throw IoError("cannot write " + (dir / "state.txt").string());
}

}  // namespace

Batch make_batch(std::span<const data::SourceSet> items) {
  if (items.empty()) throw std::invalid_argument("make_batch: empty batch");
  const std::size_t channels = static_cast<std::size_t>(items[0].channels());
  const std::size_t length = items[0].length();
  const std::size_t sources = data::kStemNames.size();
  Batch b;
  b.mixture = ad::Tensor<float>(ad::Shape{items.size(), channels, length});
  b.sources = ad::Tensor<float>(ad::Shape{items.size(), sources, channels, length});
  const std::size_t plane = channels * length;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    if (static_cast<std::size_t>(item.channels()) != channels || item.length() != length) {
      throw std::invalid_argument("make_batch: items differ in shape");
    }
    const dsp::Waveform mix = item.mixture() ? *item.mixture() : item.sum();
    for (std::size_t k = 0; k < plane; ++k) b.mixture.data[i * plane + k] = static_cast<float>(mix.samples()[k]);
    for (std::size_t s = 0; s < sources; ++s) {
      const auto& w = item.get(data::kStemNames[s]);
      float* dst = b.sources.data.data() + (i * sources + s) * plane;
      for (std::size_t k = 0; k < plane; ++k) dst[k] = static_cast<float>(w.samples()[k]);
    }
  }
  return b;
}

double train_step(models::SeparationModel<float>& model, Adam<float>& optimizer, LossKind loss_kind,
                  const Batch& batch, double clip_norm) {
  auto& params = model.parameters();
  params.zero_grad();
  ad::Tape<float> tape;
  const ad::Var x = tape.constant(batch.mixture);
  const ad::Var target = tape.constant(batch.sources);
  const ad::Var estimate = model.forward(tape, x);
  const ad::Var l = loss(tape, loss_kind, estimate, target);
  const double value = static_cast<double>(tape.value(l).data[0]);
  if (!std::isfinite(value)) throw NumericError("training: non-finite loss " + number_text(value));
  tape.backward(l);
  clip_grad_norm(params, clip_norm);
  optimizer.step();
  return value;
}

double batch_loss(models::SeparationModel<float>& model, LossKind loss_kind, const Batch& batch) {
  ad::Tape<float> tape(false);
  const ad::Var x = tape.constant(batch.mixture);
  const ad::Var target = tape.constant(batch.sources);
  const ad::Var l = loss(tape, loss_kind, model.forward(tape, x), target);
  return static_cast<double>(tape.value(l).data[0]);
}

double validation_l1(models::SeparationModel<float>& model, std::span<const data::SourceSet> tracks,
                     double chunk_seconds, int threads) {
  if (tracks.empty()) throw std::invalid_argument("validation: no tracks");
  const bool chunked = std::holds_alternative<models::ConvTasnetSpec>(model.spec());
  std::vector<double> sums(tracks.size(), 0.0);
  std::vector<double> counts(tracks.size(), 0.0);
  util::parallel_for(tracks.size(), threads, [&](std::size_t i) {
    const auto& track = tracks[i];
    const dsp::Waveform mix = track.mixture() ? *track.mixture() : track.sum();
    const data::SourceSet est =
        chunked ? infer::separate_chunked(model, mix, chunk_seconds) : infer::separate_whole(model, mix);
    for (const auto& name : data::kStemNames) {
      const auto& a = est.get(name).samples();
      const auto& b = track.get(name).samples();
      for (std::size_t k = 0; k < a.size(); ++k) sums[i] += std::abs(a[k] - b[k]);
      counts[i] += static_cast<double>(a.size());
    }
  });
  double sum = 0.0, count = 0.0;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    sum += sums[i];
    count += counts[i];
  }
  const double value = sum / count;
  if (!std::isfinite(value)) throw NumericError("validation: non-finite L1");
  return value;
}

void write_log_csv(std::span<const EpochRecord> log, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "epoch,train_loss,valid_l1,wall_seconds\n";
  for (const auto& r : log) {
    out << r.epoch << ',' << number_text(r.train_loss) << ',' << number_text(r.valid_l1) << ','
        << number_text(r.wall_seconds) << '\n';
  }
  if (!out) throw IoError("cannot write " + path.string());
}

std::vector<EpochRecord> read_log_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "epoch,train_loss,valid_l1,wall_seconds") throw IoError(path.string() + ": unexpected header");
  std::vector<EpochRecord> log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field[4];
    for (auto& f : field) std::getline(ss, f, ',');
    try {
      log.push_back({std::stoi(field[0]), parse_number(field[1]), parse_number(field[2]), parse_number(field[3])});
    } catch (const std::exception&) {
      throw IoError(path.string() + ": malformed row '" + line + "'");
    }
  }
  return log;
}

TrainResult train(const TrainConfig& config, const TrainOptions& options) {
  if (config.manifest.empty()) throw std::invalid_argument("config: manifest is required");
  return train(config, data::DatasetManifest::load(config.manifest), options);
}

TrainResult train(const TrainConfig& config, const data::DatasetManifest& manifest, const TrainOptions& options) {
  config.validate();
  if (config.checkpoint_dir.empty()) throw std::invalid_argument("config: checkpoint is required");
  const auto& dir = config.checkpoint_dir;
  const auto start = std::chrono::steady_clock::now();
  auto say = [&](const std::string& line) {
    if (options.progress) *options.progress << line << std::endl;
  };

  const std::vector<data::SourceSet> train_tracks = load_split(manifest, data::Split::train);
  const std::vector<data::SourceSet> valid_tracks = load_split(manifest, data::Split::valid);
  if (train_tracks.empty()) throw std::invalid_argument("training: the manifest has no train tracks");
  if (valid_tracks.empty()) throw std::invalid_argument("training: the manifest has no valid tracks");
  const int sample_rate = train_tracks[0].sample_rate();
  std::vector<std::size_t> lengths;
  for (const auto& t : train_tracks) {
    if (t.sample_rate() != sample_rate) throw std::invalid_argument("training: mixed sample rates");
    lengths.push_back(t.length());
  }

  auto model = models::build_model<float>(config.model, config.seed);
  if (model->sources() != static_cast<int>(data::kStemNames.size())) {
    throw std::invalid_argument("training: the model must produce four sources");
  }
  AdamOptions adam_options;
  adam_options.learning_rate = config.learning_rate;
  Adam<float> optimizer(model->parameters(), adam_options);

  TrainResult result;
  int first_epoch = 1;
  double wall_offset = 0.0;
  if (options.resume) {
    const auto last = dir / "last";
    const auto saved = models::load_model_spec(last);
    if (models::spec_to_key_values(saved).to_text() != models::spec_to_key_values(config.model).to_text()) {
      throw std::invalid_argument("resume: checkpoint model does not match the config");
    }
    ad::load_parameters(model->parameters(), last / "weights");
    optimizer.load_state(ad::read_checkpoint<double>(last / "optimizer"));
    const auto state = util::KeyValues::load(last / "state.txt");
    const int epoch = state.get_int("epoch", -1);
    if (epoch < 0) throw IoError("resume: invalid state in " + last.string());
    result.best_epoch = state.get_int("best_epoch", 0);
    result.best_valid_l1 = parse_number(state.require("best_valid_l1"));
    for (const auto& r : read_log_csv(dir / "log.csv")) {
      if (r.epoch <= epoch) result.log.push_back(r);
    }
    if (!result.log.empty()) wall_offset = result.log.back().wall_seconds;
    first_epoch = epoch + 1;
    say("resuming after epoch " + std::to_string(epoch));
  } else {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::ofstream cfg(dir / "config.txt");
    cfg << config.to_key_values().to_text();
    if (!cfg) throw IoError("cannot write " + (dir / "config.txt").string());
    cfg.close();
    const double v0 = validation_l1(*model, valid_tracks, config.valid_chunk_seconds, options.threads);
    result.log.push_back({0, std::numeric_limits<double>::quiet_NaN(), v0, 0.0});
    result.best_epoch = 0;
    result.best_valid_l1 = v0;
    models::save_model(*model, dir / "best");
    write_log_csv(result.log, dir / "log.csv");
    say("epoch 0 valid_l1 " + number_text(v0));
  }

  auto elapsed = [&] {
    return wall_offset + std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  for (int epoch = first_epoch; epoch <= config.epochs; ++epoch) {
    const data::EpochPlan plan =
        data::plan_epoch(lengths, sample_rate, config.extract, config.seed, static_cast<std::uint64_t>(epoch));
    if (plan.extracts.empty()) throw std::invalid_argument("training: every train track is shorter than one extract");
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < plan.extracts.size(); begin += batch_size) {
      const std::size_t end = std::min(begin + batch_size, plan.extracts.size());
      std::vector<data::SourceSet> items;
      for (std::size_t k = begin; k < end; ++k) {
        const auto& ref = plan.extracts[k];
        items.push_back(data::take_extract(train_tracks[ref.track], ref, config.extract));
      }
      items = data::augment_batch(items, config.augment, batch_seed(config.seed, epoch, batches));
      const Batch batch = make_batch(items);
      double value = 0.0;
      try {
        value = train_step(*model, optimizer, config.loss, batch, config.clip_norm);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches) + ")");
      }
      loss_sum += value;
      ++batches;
    }
    const double train_loss = loss_sum / static_cast<double>(batches);
    const double valid = validation_l1(*model, valid_tracks, config.valid_chunk_seconds, options.threads);
    result.log.push_back({epoch, train_loss, valid, elapsed()});
    if (valid < result.best_valid_l1) {
      result.best_valid_l1 = valid;
      result.best_epoch = epoch;
      models::save_model(*model, dir / "best");
    }
    models::save_model(*model, dir / "last");
    ad::write_checkpoint(dir / "last" / "optimizer", optimizer.state());
    write_state(dir / "last", epoch, result.best_epoch, result.best_valid_l1);
    write_log_csv(result.log, dir / "log.csv");
    char line[160];
    std::snprintf(line, sizeof line, "epoch %d/%d train_loss %.6g valid_l1 %.6g (%.1f s)", epoch, config.epochs,
                  train_loss, valid, result.log.back().wall_seconds);
    say(line);
    if (config.max_wall_seconds > 0.0 && elapsed() >= config.max_wall_seconds && epoch < config.epochs) {
      result.stopped_on_time = true;
      say("stopping: wall-clock budget reached");
      break;
    }
  }
  return result;
}

}  // namespace wavesep::train
