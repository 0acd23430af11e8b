#include "wavesep/train/config.hpp"

#include <cstdio>
#include <stdexcept>

namespace wavesep::train {

namespace {

std::string number_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  const std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("config: " + message);
}

}  // namespace

data::ExtractOptions default_extract(const models::ModelSpec& spec) {
  if (std::holds_alternative<models::ConvTasnetSpec>(spec)) return {3.0, 1.0, 2.0};
  return {11.0, 1.0, 10.0};
}

std::set<std::string> config_key_names(const std::string& model_kind) {
  std::set<std::string> keys = {"loss",         "learning_rate",  "batch_size",
                                "epochs",       "seed",           "manifest",
                                "checkpoint",   "clip_norm",      "valid_chunk_seconds",
                                "max_wall_seconds",
                                "augment.shuffle_sources",        "augment.swap_probability",
                                "augment.sign_probability",       "data.extract_seconds",
                                "data.stride_seconds",            "data.crop_seconds"};
  for (const auto& k : models::spec_key_names(model_kind)) keys.insert("model." + k);
  return keys;
}

void TrainConfig::validate() const {
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(epochs > 0, "epochs must be positive");
  require(clip_norm > 0.0, "clip_norm must be positive");
  require(valid_chunk_seconds > 0.0, "valid_chunk_seconds must be positive");
  require(max_wall_seconds >= 0.0, "max_wall_seconds must be non-negative");
  require(extract.crop_seconds > 0.0, "data.crop_seconds must be positive");
  require(extract.stride_seconds > 0.0, "data.stride_seconds must be positive");
  require(extract.extract_seconds >= extract.crop_seconds, "data.extract_seconds must be at least data.crop_seconds");
  require(augment.swap_probability >= 0.0 && augment.swap_probability <= 1.0,
          "augment.swap_probability must lie in [0, 1]");
  require(augment.sign_probability >= 0.0 && augment.sign_probability <= 1.0,
          "augment.sign_probability must lie in [0, 1]");
  std::visit([](const auto& s) { s.validate(); }, model);
}

TrainConfig TrainConfig::from_key_values(const util::KeyValues& kv, const std::filesystem::path& base_dir) {
  const std::string kind = kv.get("model.kind", "demucs");
  require(kind == "demucs" || kind == "convtasnet", "model.kind must be demucs or convtasnet, got '" + kind + "'");
  kv.reject_unknown(config_key_names(kind));

  TrainConfig c;
  c.loss = parse_loss(kv.get("loss", "l1"));
  c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
  c.batch_size = kv.get_int("batch_size", c.batch_size);
  c.epochs = kv.get_int("epochs", c.epochs);
  const long long seed = kv.get_int64("seed", 0);
  require(seed >= 0, "seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.model = models::spec_from_key_values(kv, "model.");
  c.augment.shuffle_sources = kv.get_bool("augment.shuffle_sources", c.augment.shuffle_sources);
  c.augment.swap_probability = kv.get_double("augment.swap_probability", c.augment.swap_probability);
  c.augment.sign_probability = kv.get_double("augment.sign_probability", c.augment.sign_probability);
  c.extract = default_extract(c.model);
  c.extract.extract_seconds = kv.get_double("data.extract_seconds", c.extract.extract_seconds);
  c.extract.stride_seconds = kv.get_double("data.stride_seconds", c.extract.stride_seconds);
  c.extract.crop_seconds = kv.get_double("data.crop_seconds", c.extract.crop_seconds);
  c.clip_norm = kv.get_double("clip_norm", c.clip_norm);
  c.valid_chunk_seconds = kv.get_double("valid_chunk_seconds", c.valid_chunk_seconds);
  c.max_wall_seconds = kv.get_double("max_wall_seconds", c.max_wall_seconds);
  if (kv.has("manifest")) c.manifest = resolve(base_dir, kv.get("manifest", ""));
  if (kv.has("checkpoint")) c.checkpoint_dir = resolve(base_dir, kv.get("checkpoint", ""));
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& file) {
  return from_key_values(util::KeyValues::load(file), file.parent_path());
}

util::KeyValues TrainConfig::to_key_values() const {
  util::KeyValues kv;
  kv.set("loss", loss_name(loss));
  kv.set("learning_rate", number_text(learning_rate));
  kv.set("batch_size", std::to_string(batch_size));
  kv.set("epochs", std::to_string(epochs));
  kv.set("seed", std::to_string(seed));
  const util::KeyValues spec = models::spec_to_key_values(model);
  for (const auto& [k, v] : spec.entries()) kv.set("model." + k, v);
  kv.set("augment.shuffle_sources", augment.shuffle_sources ? "true" : "false");
  kv.set("augment.swap_probability", number_text(augment.swap_probability));
  kv.set("augment.sign_probability", number_text(augment.sign_probability));
  kv.set("data.extract_seconds", number_text(extract.extract_seconds));
  kv.set("data.stride_seconds", number_text(extract.stride_seconds));
  kv.set("data.crop_seconds", number_text(extract.crop_seconds));
  kv.set("clip_norm", number_text(clip_norm));
  kv.set("valid_chunk_seconds", number_text(valid_chunk_seconds));
  kv.set("max_wall_seconds", number_text(max_wall_seconds));
  if (!manifest.empty()) kv.set("manifest", manifest.string());
  if (!checkpoint_dir.empty()) kv.set("checkpoint", checkpoint_dir.string());
  return kv;
}

}  // namespace wavesep::train
