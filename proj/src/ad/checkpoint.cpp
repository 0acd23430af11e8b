#include "wavesep/ad/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include "wavesep/error.hpp"

namespace wavesep::ad {

static_assert(std::endian::native == std::endian::little, "checkpoint buffers assume a little-endian host");

namespace {

constexpr const char* kHeader = "# wavesep checkpoint v1";

template <typename T>
constexpr const char* dtype_name() {
  return sizeof(T) == 4 ? "f32" : "f64";
}

std::string join_dims(const Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) out += (i ? "x" : "") + std::to_string(shape[i]);
  return out.empty() ? "1" : out;
}

Shape parse_dims(const std::string& text) {
  Shape shape;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, 'x')) shape.push_back(std::stoull(part));
  return shape;
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& base) {
  return std::filesystem::path(base.string() + ".manifest");
}

std::filesystem::path buffer_path(const std::filesystem::path& base) {
  return std::filesystem::path(base.string() + ".bin");
}

template <typename T>
void write_checkpoint(const std::filesystem::path& base, const std::vector<NamedTensor<T>>& tensors) {
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
  std::ofstream manifest(manifest_path(base));
  std::ofstream buffer(buffer_path(base), std::ios::binary | std::ios::trunc);
  if (!manifest || !buffer) throw IoError("cannot write checkpoint " + base.string());
  manifest << kHeader << '\n';
  std::size_t offset = 0;
  for (const auto& nt : tensors) {
    if (nt.name.find_first_of(" \t\n") != std::string::npos) throw std::invalid_argument("tensor name has whitespace");
    manifest << nt.name << ' ' << join_dims(nt.tensor.shape) << ' ' << dtype_name<T>() << ' ' << offset << '\n';
    const std::size_t bytes = nt.tensor.size() * sizeof(T);
    buffer.write(reinterpret_cast<const char*>(nt.tensor.data.data()), static_cast<std::streamsize>(bytes));
    offset += bytes;
  }
  if (!manifest || !buffer) throw IoError("write failed for checkpoint " + base.string());
}

template <typename T>
std::vector<NamedTensor<T>> read_checkpoint(const std::filesystem::path& base) {
  std::ifstream manifest(manifest_path(base));
  std::ifstream buffer(buffer_path(base), std::ios::binary);
  if (!manifest || !buffer) throw IoError("cannot open checkpoint " + base.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(buffer)), std::istreambuf_iterator<char>());

  std::vector<NamedTensor<T>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string name, dims, dtype;
    std::size_t offset = 0;
    if (!(fields >> name >> dims >> dtype >> offset)) {
      throw IoError(manifest_path(base).string() + ":" + std::to_string(line_no) + ": malformed entry");
    }
    NamedTensor<T> nt{name, Tensor<T>(parse_dims(dims))};
    const std::size_t width = dtype == "f32" ? 4 : dtype == "f64" ? 8 : 0;
    if (width == 0) throw IoError("checkpoint " + base.string() + ": unknown dtype " + dtype);
    if (offset + nt.tensor.size() * width > bytes.size()) {
      throw IoError("checkpoint " + base.string() + ": buffer too short for " + name);
    }
    const char* src = bytes.data() + offset;
    for (std::size_t i = 0; i < nt.tensor.size(); ++i) {
      if (width == 4) {
        float v;
        std::memcpy(&v, src + i * 4, 4);
        nt.tensor.data[i] = static_cast<T>(v);
      } else {
        double v;
        std::memcpy(&v, src + i * 8, 8);
        nt.tensor.data[i] = static_cast<T>(v);
      }
    }
    out.push_back(std::move(nt));
  }
  return out;
}

template <typename T>
void save_parameters(const ParameterStore<T>& params, const std::filesystem::path& base) {
  std::vector<NamedTensor<T>> tensors;
  for (std::size_t i = 0; i < params.size(); ++i) tensors.push_back({params[i].name, params[i].value});
  write_checkpoint(base, tensors);
}

template <typename T>
void load_parameters(ParameterStore<T>& params, const std::filesystem::path& base, bool allow_extra) {
  auto tensors = read_checkpoint<T>(base);
  std::unordered_map<std::string, Tensor<T>*> by_name;
  for (auto& nt : tensors) by_name[nt.name] = &nt.tensor;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw IoError("checkpoint " + base.string() + " lacks parameter " + p.name);
    if (it->second->shape != p.value.shape) {
      throw IoError("checkpoint " + base.string() + ": parameter " + p.name + " has shape " +
                    shape_string(it->second->shape) + ", model expects " + shape_string(p.value.shape));
    }
    p.value = std::move(*it->second);
    by_name.erase(it);
  }
  if (!allow_extra && !by_name.empty()) {
    throw IoError("checkpoint " + base.string() + " has unknown tensor " + by_name.begin()->first);
  }
}

#define WAVESEP_INSTANTIATE(T)                                                                          \
  template void write_checkpoint<T>(const std::filesystem::path&, const std::vector<NamedTensor<T>>&); \
  template std::vector<NamedTensor<T>> read_checkpoint<T>(const std::filesystem::path&);                \
  template void save_parameters<T>(const ParameterStore<T>&, const std::filesystem::path&);             \
  template void load_parameters<T>(ParameterStore<T>&, const std::filesystem::path&, bool);

WAVESEP_INSTANTIATE(float)
WAVESEP_INSTANTIATE(double)
#undef WAVESEP_INSTANTIATE

}  // namespace wavesep::ad
