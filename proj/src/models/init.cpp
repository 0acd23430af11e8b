#include "wavesep/models/init.hpp"

#include <cmath>
#include <stdexcept>

namespace wavesep::models {

template <typename T>
void uniform_fill(ad::Tensor<T>& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (T& v : t.data) v = static_cast<T>(dist(rng));
}

template <typename T>
void kaiming_uniform(ad::Tensor<T>& t, std::size_t fan_in, std::mt19937_64& rng) {
  uniform_fill(t, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

template <typename T>
double weight_std(const ad::Tensor<T>& t) {
  if (t.size() < 2) return 0.0;
  double mean = 0.0;
  for (T v : t.data) mean += v;
  mean /= static_cast<double>(t.size());
  double ss = 0.0;
  for (T v : t.data) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(t.size() - 1));
}

template <typename T>
double rescale_weights(ad::Parameter<T>& weight, ad::Parameter<T>* bias, double reference) {
  const double std = weight_std(weight.value);
  if (!(std > 0.0)) throw std::invalid_argument("rescale_weights: zero-variance weights in " + weight.name);
  const double alpha = std / reference;
  const double factor = 1.0 / std::sqrt(alpha);
  for (T& v : weight.value.data) v = static_cast<T>(v * factor);
  if (bias) {
    for (T& v : bias->value.data) v = static_cast<T>(v * factor);
  }
  return alpha;
}

#define WAVESEP_INSTANTIATE(T)                                                          \
  template void uniform_fill<T>(ad::Tensor<T>&, double, std::mt19937_64&);             \
  template void kaiming_uniform<T>(ad::Tensor<T>&, std::size_t, std::mt19937_64&);     \
  template double weight_std<T>(const ad::Tensor<T>&);                                  \
  template double rescale_weights<T>(ad::Parameter<T>&, ad::Parameter<T>*, double);

WAVESEP_INSTANTIATE(float)
WAVESEP_INSTANTIATE(double)
WAVESEP_INSTANTIATE(long double)
#undef WAVESEP_INSTANTIATE

}  // namespace wavesep::models
