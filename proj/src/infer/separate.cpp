#include "wavesep/infer/separate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "wavesep/dsp/wav_io.hpp"
#include "wavesep/error.hpp"
#include "wavesep/util/parallel.hpp"

namespace wavesep::infer {

template <typename T>
ad::Tensor<T> to_tensor(const dsp::Waveform& w) {
  ad::Tensor<T> out(ad::Shape{1, static_cast<std::size_t>(w.channels()), w.length()});
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = static_cast<T>(w.samples()[i]);
  return out;
}

template <typename T>
data::SourceSet to_sources(const ad::Tensor<T>& output, std::size_t batch, int sample_rate) {
  if (output.rank() != 4 || batch >= output.dim(0)) throw std::invalid_argument("to_sources: expected (B, S, C, T)");
  const std::size_t sources = output.dim(1), channels = output.dim(2), length = output.dim(3);
  data::SourceSet set;
  for (std::size_t s = 0; s < sources; ++s) {
    const std::size_t base = (batch * sources + s) * channels * length;
    std::vector<double> samples(output.data.begin() + static_cast<std::ptrdiff_t>(base),
                                output.data.begin() + static_cast<std::ptrdiff_t>(base + channels * length));
    const std::string name = sources == data::kStemNames.size() ? data::kStemNames[s] : "source" + std::to_string(s);
    set.set(name, dsp::Waveform(static_cast<int>(channels), std::move(samples), sample_rate));
  }
  return set;
}

template <typename T>
data::SourceSet separate_whole(models::SeparationModel<T>& model, const dsp::Waveform& mixture) {
  if (mixture.length() == 0) throw std::invalid_argument("separate: empty input");
  if (mixture.channels() != model.audio_channels()) {
    throw std::invalid_argument("separate: input has " + std::to_string(mixture.channels()) +
                                " channels, model expects " + std::to_string(model.audio_channels()));
  }
  const ad::Tensor<T> out = models::run_model(model, to_tensor<T>(mixture));
  return to_sources(out, 0, mixture.sample_rate());
}

template <typename T>
data::SourceSet separate_chunked(models::SeparationModel<T>& model, const dsp::Waveform& mixture,
                                 double chunk_seconds) {
  if (!(chunk_seconds > 0.0)) throw std::invalid_argument("separate_chunked: chunk_seconds must be positive");
  if (mixture.length() == 0) throw std::invalid_argument("separate_chunked: empty input");
  const auto chunk = static_cast<std::size_t>(std::llround(chunk_seconds * mixture.sample_rate()));
  if (chunk == 0) throw std::invalid_argument("separate_chunked: chunk shorter than one sample");
  const std::size_t length = mixture.length();
  data::SourceSet out;
  for (std::size_t begin = 0; begin < length; begin += chunk) {
    const data::SourceSet part = separate_whole(model, mixture.slice(begin, chunk));
    const std::size_t keep = std::min(chunk, length - begin);
    if (out.empty()) {
      for (const auto& [name, w] : part.stems()) {
        out.set(name, dsp::Waveform(w.channels(), length, w.sample_rate()));
      }
    }
    for (const auto& [name, w] : part.stems()) {
      dsp::Waveform& dst = out.get(name);
      for (int c = 0; c < w.channels(); ++c) {
        for (std::size_t t = 0; t < keep; ++t) dst.at(c, begin + t) = w.at(c, t);
      }
    }
  }
  return out;
}

std::vector<std::size_t> draw_shifts(const ShiftOptions& options, int sample_rate) {
  if (options.shifts < 1) throw std::invalid_argument("shift_stabilize: need at least one shift");
  if (!(options.max_shift_seconds >= 0.0)) throw std::invalid_argument("shift_stabilize: negative max shift");
  const auto range = static_cast<std::size_t>(std::llround(options.max_shift_seconds * sample_rate));
  std::vector<std::size_t> shifts(static_cast<std::size_t>(options.shifts), 0);
  if (range == 0) return shifts;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> dist(0, range - 1);
  for (auto& d : shifts) d = dist(rng);
  return shifts;
}

data::SourceSet shift_average(const Separator& base, const dsp::Waveform& mixture, std::span<const std::size_t> shifts,
                              int threads) {
  if (shifts.empty()) throw std::invalid_argument("shift_average: no shifts");
  const std::size_t length = mixture.length();
  std::vector<data::SourceSet> outputs(shifts.size());
  util::parallel_for(shifts.size(), threads, [&](std::size_t i) {
    const std::size_t d = shifts[i];
    dsp::Waveform delayed(mixture.channels(), length + d, mixture.sample_rate());
    for (int c = 0; c < mixture.channels(); ++c) {
      for (std::size_t t = 0; t < length; ++t) delayed.at(c, t + d) = mixture.at(c, t);
    }
    data::SourceSet raw = base(delayed);
    data::SourceSet aligned;
    for (const auto& [name, w] : raw.stems()) aligned.set(name, w.slice(d, length));
    outputs[i] = std::move(aligned);
  });
  data::SourceSet sum = std::move(outputs[0]);
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    for (auto& [name, w] : sum.stems()) w += outputs[i].get(name);
  }
  const double scale = 1.0 / static_cast<double>(shifts.size());
  for (auto& [name, w] : sum.stems()) w *= scale;
  return sum;
}

data::SourceSet shift_stabilize(const Separator& base, const dsp::Waveform& mixture, const ShiftOptions& options) {
  const auto shifts = draw_shifts(options, mixture.sample_rate());
  return shift_average(base, mixture, shifts, options.threads);
}

template <typename T>
data::SourceSet separate(models::SeparationModel<T>& model, const dsp::Waveform& mixture,
                         const SeparateOptions& options) {
  const bool chunked = std::holds_alternative<models::ConvTasnetSpec>(model.spec());
  Separator base = [&model, chunked, &options](const dsp::Waveform& x) {
    return chunked ? separate_chunked(model, x, options.chunk_seconds) : separate_whole(model, x);
  };
  if (options.shifts <= 0) return base(mixture);
  ShiftOptions shift;
  shift.shifts = options.shifts;
  shift.max_shift_seconds = options.max_shift_seconds;
  shift.seed = options.seed;
  shift.threads = options.threads;
  return shift_stabilize(base, mixture, shift);
}

std::vector<std::filesystem::path> separate_file(const std::filesystem::path& model_dir,
                                                 const std::filesystem::path& input,
                                                 const std::filesystem::path& out_dir, const SeparateOptions& options) {
  auto model = models::load_model<float>(model_dir);
  const dsp::Waveform mixture = dsp::load_wav(input);
  const data::SourceSet stems = separate(*model, mixture, options);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const auto& [name, w] : stems.stems()) {
    if (!w.all_finite()) throw NumericError("separate: non-finite output for " + name);
    const auto path = out_dir / (name + ".wav");
    dsp::save_wav(w, path);
    written.push_back(path);
  }
  return written;
}

#define WAVESEP_INSTANTIATE(T)                                                                                  \
  template ad::Tensor<T> to_tensor<T>(const dsp::Waveform&);                                                  \
  template data::SourceSet to_sources<T>(const ad::Tensor<T>&, std::size_t, int);                            \
  template data::SourceSet separate_whole<T>(models::SeparationModel<T>&, const dsp::Waveform&);            \
  template data::SourceSet separate_chunked<T>(models::SeparationModel<T>&, const dsp::Waveform&, double);  \
  template data::SourceSet separate<T>(models::SeparationModel<T>&, const dsp::Waveform&, const SeparateOptions&);
WAVESEP_INSTANTIATE(float)
WAVESEP_INSTANTIATE(double)
#undef WAVESEP_INSTANTIATE

}  // namespace wavesep::infer
