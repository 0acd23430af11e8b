#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wavesep/ad/parameter.hpp"

namespace wavesep::ad {

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

// A checkpoint is two files next to each other: `<base>.manifest`, one text
// line `name dims dtype offset` per tensor (dims joined by 'x', dtype f32 or
// f64, byte offset into the buffer), and `<base>.bin`, the raw little-endian
// values back to back.

template <typename T>
void write_checkpoint(const std::filesystem::path& base, const std::vector<NamedTensor<T>>& tensors);

/// Reads every tensor, converting to T when the stored dtype differs.
template <typename T>
std::vector<NamedTensor<T>> read_checkpoint(const std::filesystem::path& base);

template <typename T>
void save_parameters(const ParameterStore<T>& params, const std::filesystem::path& base);

/// Fills every parameter by name. Missing names, shape mismatches and unknown
/// extra tensors (unless `allow_extra`) are errors.
template <typename T>
void load_parameters(ParameterStore<T>& params, const std::filesystem::path& base, bool allow_extra = false);

std::filesystem::path manifest_path(const std::filesystem::path& base);
std::filesystem::path buffer_path(const std::filesystem::path& base);

}  // namespace wavesep::ad
