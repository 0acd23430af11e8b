#include "wavesep/models/specs.hpp"

#include <cstdio>
#include <set>
#include <stdexcept>

namespace wavesep::models {

DemucsSpec DemucsSpec::full() {
  DemucsSpec s;
  s.depth = 6;
  s.initial_channels = 100;
  return s;
}

std::vector<int> DemucsSpec::channels() const {
  std::vector<int> out;
  long long c = initial_channels;
  for (int i = 0; i < depth; ++i) {
    out.push_back(static_cast<int>(c));
    c *= growth;
  }
  return out;
}

void DemucsSpec::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("demucs spec: " + what); };
  if (depth < 1) fail("depth must be >= 1");
  if (initial_channels < 1 || growth < 1) fail("channel counts must be positive");
  if (stride < 1 || kernel <= stride) fail("kernel must exceed stride >= 1");
  if (lstm_layers < 0) fail("lstm_layers must be >= 0");
  if (context < 1) fail("context must be >= 1");
  if (sources < 1) fail("sources must be >= 1");
  if (audio_channels < 1 || audio_channels > 2) fail("audio_channels must be 1 or 2");
  if (!(rescale_reference > 0.0)) fail("rescale_reference must be positive");
  long long c = initial_channels;
  for (int i = 1; i < depth; ++i) {
    c *= growth;
    if (c > (1 << 20)) fail("channel count overflow");
  }
}

ConvTasnetSpec ConvTasnetSpec::speech() {
  ConvTasnetSpec s;
  s.frontend_kernel = 16;
  s.frontend_stride = 8;
  s.frontend_channels = 128;
  s.block_channels = 128;
  s.hidden_channels = 512;
  s.repeats = 3;
  s.blocks_per_repeat = 8;
  s.sources = 2;
  s.audio_channels = 1;
  return s;
}

ConvTasnetSpec ConvTasnetSpec::desk() {
  ConvTasnetSpec s;
  s.frontend_channels = 64;
  s.block_channels = 32;
  s.hidden_channels = 64;
  s.repeats = 2;
  s.blocks_per_repeat = 4;
  return s;
}

int ConvTasnetSpec::dilation(int block) const { return 1 << (block % blocks_per_repeat); }

long long ConvTasnetSpec::receptive_field_frames() const {
  long long rf = 1;
  for (int n = 0; n < block_count(); ++n) rf += static_cast<long long>(block_kernel - 1) * dilation(n);
  return rf;
}

long long ConvTasnetSpec::receptive_field_samples() const {
  return (receptive_field_frames() - 1) * frontend_stride + frontend_kernel;
}

void ConvTasnetSpec::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("convtasnet spec: " + what); };
  if (frontend_stride < 1 || frontend_kernel < frontend_stride) fail("frontend kernel must be >= stride >= 1");
  if (frontend_channels < 1 || block_channels < 1 || hidden_channels < 1) fail("channel counts must be positive");
  if (repeats < 1 || blocks_per_repeat < 1 || blocks_per_repeat > 24) fail("repeats and blocks_per_repeat out of range");
  if (block_kernel < 1 || block_kernel % 2 == 0) fail("block_kernel must be odd");
  if (sources < 1) fail("sources must be >= 1");
  if (audio_channels < 1 || audio_channels > 2) fail("audio_channels must be 1 or 2");
}

namespace {

const std::set<std::string> kDemucsKeys = {"kind",    "depth",          "initial_channels",  "growth",
                                           "kernel",  "stride",         "lstm_layers",       "context",
                                           "sources", "audio_channels", "rescale_reference", "rescale",
                                           "glu",     "decoder_glu"};
const std::set<std::string> kTasnetKeys = {"kind",           "frontend_kernel", "frontend_stride",
                                           "frontend_channels", "block_channels", "hidden_channels",
                                           "repeats",        "blocks_per_repeat", "block_kernel",
                                           "sources",        "audio_channels"};

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string number_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::set<std::string> spec_key_names(const std::string& kind) {
  std::set<std::string> keys = kind == "convtasnet" ? kTasnetKeys : kDemucsKeys;
  keys.insert("preset");
  return keys;
}

std::string model_kind_name(const ModelSpec& spec) {
  return std::holds_alternative<DemucsSpec>(spec) ? "demucs" : "convtasnet";
}

util::KeyValues spec_to_key_values(const ModelSpec& spec) {
  util::KeyValues kv;
  kv.set("kind", model_kind_name(spec));
  if (const auto* d = std::get_if<DemucsSpec>(&spec)) {
    kv.set("depth", std::to_string(d->depth));
    kv.set("initial_channels", std::to_string(d->initial_channels));
    kv.set("growth", std::to_string(d->growth));
    kv.set("kernel", std::to_string(d->kernel));
    kv.set("stride", std::to_string(d->stride));
    kv.set("lstm_layers", std::to_string(d->lstm_layers));
    kv.set("context", std::to_string(d->context));
    kv.set("sources", std::to_string(d->sources));
    kv.set("audio_channels", std::to_string(d->audio_channels));
    kv.set("rescale_reference", number_text(d->rescale_reference));
    kv.set("rescale", bool_text(d->rescale));
    kv.set("glu", bool_text(d->glu));
    kv.set("decoder_glu", bool_text(d->decoder_glu));
  } else {
    const auto& c = std::get<ConvTasnetSpec>(spec);
    kv.set("frontend_kernel", std::to_string(c.frontend_kernel));
    kv.set("frontend_stride", std::to_string(c.frontend_stride));
    kv.set("frontend_channels", std::to_string(c.frontend_channels));
    kv.set("block_channels", std::to_string(c.block_channels));
    kv.set("hidden_channels", std::to_string(c.hidden_channels));
    kv.set("repeats", std::to_string(c.repeats));
    kv.set("blocks_per_repeat", std::to_string(c.blocks_per_repeat));
    kv.set("block_kernel", std::to_string(c.block_kernel));
    kv.set("sources", std::to_string(c.sources));
    kv.set("audio_channels", std::to_string(c.audio_channels));
  }
  return kv;
}

ModelSpec spec_from_key_values(const util::KeyValues& kv, const std::string& prefix) {
  const std::string kind = kv.get(prefix + "kind", "demucs");
  const std::string preset = kv.get(prefix + "preset", "desk");
  auto key = [&](const char* name) { return prefix + name; };

  if (kind == "demucs") {
    DemucsSpec d;
    if (preset == "full") d = DemucsSpec::full();
    else if (preset != "desk") throw std::invalid_argument("unknown demucs preset '" + preset + "'");
    d.depth = kv.get_int(key("depth"), d.depth);
    d.initial_channels = kv.get_int(key("initial_channels"), d.initial_channels);
    d.growth = kv.get_int(key("growth"), d.growth);
    d.kernel = kv.get_int(key("kernel"), d.kernel);
    d.stride = kv.get_int(key("stride"), d.stride);
    d.lstm_layers = kv.get_int(key("lstm_layers"), d.lstm_layers);
    d.context = kv.get_int(key("context"), d.context);
    d.sources = kv.get_int(key("sources"), d.sources);
    d.audio_channels = kv.get_int(key("audio_channels"), d.audio_channels);
    d.rescale_reference = kv.get_double(key("rescale_reference"), d.rescale_reference);
    d.rescale = kv.get_bool(key("rescale"), d.rescale);
    d.glu = kv.get_bool(key("glu"), d.glu);
    d.decoder_glu = kv.get_bool(key("decoder_glu"), d.decoder_glu);
    d.validate();
    return d;
  }
  if (kind == "convtasnet") {
    ConvTasnetSpec c = ConvTasnetSpec::desk();
    if (preset == "music") c = ConvTasnetSpec::music();
    else if (preset == "speech") c = ConvTasnetSpec::speech();
    else if (preset != "desk") throw std::invalid_argument("unknown convtasnet preset '" + preset + "'");
    c.frontend_kernel = kv.get_int(key("frontend_kernel"), c.frontend_kernel);
    c.frontend_stride = kv.get_int(key("frontend_stride"), c.frontend_stride);
    c.frontend_channels = kv.get_int(key("frontend_channels"), c.frontend_channels);
    c.block_channels = kv.get_int(key("block_channels"), c.block_channels);
    c.hidden_channels = kv.get_int(key("hidden_channels"), c.hidden_channels);
    c.repeats = kv.get_int(key("repeats"), c.repeats);
    c.blocks_per_repeat = kv.get_int(key("blocks_per_repeat"), c.blocks_per_repeat);
    c.block_kernel = kv.get_int(key("block_kernel"), c.block_kernel);
    c.sources = kv.get_int(key("sources"), c.sources);
    c.audio_channels = kv.get_int(key("audio_channels"), c.audio_channels);
    c.validate();
    return c;
  }
  throw std::invalid_argument("unknown model kind '" + kind + "' (expected demucs or convtasnet)");
}

}  // namespace wavesep::models
