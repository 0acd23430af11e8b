#include "wavesep/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wavesep/ad/checkpoint.hpp"
#include "wavesep/error.hpp"
#include "wavesep/models/convtasnet.hpp"
#include "wavesep/models/demucs.hpp"

namespace wavesep::models {

template <typename T>
std::unique_ptr<SeparationModel<T>> build_model(const ModelSpec& spec, std::uint64_t seed) {
  if (const auto* d = std::get_if<DemucsSpec>(&spec)) return std::make_unique<DemucsModel<T>>(*d, seed);
  return std::make_unique<ConvTasnetModel<T>>(std::get<ConvTasnetSpec>(spec), seed);
}

template <typename T>
ad::Tensor<T> run_model(SeparationModel<T>& model, const ad::Tensor<T>& mixture) {
  ad::Tape<T> tape(false);
  const ad::Var x = tape.constant(mixture);
  return tape.value(model.forward(tape, x));
}

template <typename T>
void save_model(const SeparationModel<T>& model, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream out(dir / "spec.txt");
  out << spec_to_key_values(model.spec()).to_text();
  if (!out) throw IoError("cannot write " + (dir / "spec.txt").string());
  out.close();
  ad::save_parameters(model.parameters(), dir / "weights");
}

ModelSpec load_model_spec(const std::filesystem::path& dir) {
  return spec_from_key_values(util::KeyValues::load(dir / "spec.txt"));
}

template <typename T>
std::unique_ptr<SeparationModel<T>> load_model(const std::filesystem::path& dir) {
  auto model = build_model<T>(load_model_spec(dir), 0);
  ad::load_parameters(model->parameters(), dir / "weights");
  return model;
}

template <typename T>
ad::Tensor<T> roll_time(const ad::Tensor<T>& x, long long shift) {
  if (x.shape.empty()) throw std::invalid_argument("roll_time: scalar tensor");
  const std::size_t len = x.shape.back();
  ad::Tensor<T> out(x.shape, T(0));
  if (len == 0) return out;
  const long long n = static_cast<long long>(len);
  const std::size_t offset = static_cast<std::size_t>(((shift % n) + n) % n);
  const std::size_t rows = x.data.size() / len;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* src = x.data.data() + r * len;
    T* dst = out.data.data() + r * len;
    for (std::size_t t = 0; t < len; ++t) dst[(t + offset) % len] = src[t];
  }
  return out;
}

template <typename T>
double check_equivariance(SeparationModel<T>& model, const ad::Tensor<T>& mixture, long long shift) {
  const ad::Tensor<T> shifted_out = run_model(model, roll_time(mixture, shift));
  const ad::Tensor<T> out_shifted = roll_time(run_model(model, mixture), shift);
  double worst = 0.0;
  for (std::size_t i = 0; i < shifted_out.data.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(shifted_out.data[i]) - static_cast<double>(out_shifted.data[i])));
  }
  return worst;
}

#define WAVESEP_INSTANTIATE(T)                                                                        \
  template std::unique_ptr<SeparationModel<T>> build_model<T>(const ModelSpec&, std::uint64_t);       \
  template ad::Tensor<T> run_model<T>(SeparationModel<T>&, const ad::Tensor<T>&);                     \
  template void save_model<T>(const SeparationModel<T>&, const std::filesystem::path&);               \
  template std::unique_ptr<SeparationModel<T>> load_model<T>(const std::filesystem::path&);          \
  template ad::Tensor<T> roll_time<T>(const ad::Tensor<T>&, long long);                               \
  template double check_equivariance<T>(SeparationModel<T>&, const ad::Tensor<T>&, long long);

WAVESEP_INSTANTIATE(float)
WAVESEP_INSTANTIATE(double)

}  // namespace wavesep::models
