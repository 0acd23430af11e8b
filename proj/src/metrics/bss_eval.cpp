#include "wavesep/metrics/bss_eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wavesep::metrics {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double energy(std::span<const double> a) { return dot(a, a); }

double energy_of_sum(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] + b[i]) * (a[i] + b[i]);
  return s;
}

}  // namespace

std::vector<double> project(std::span<const double> x, const std::vector<std::span<const double>>& basis) {
  const std::size_t k = basis.size();
  for (const auto& b : basis) {
    if (b.size() != x.size()) throw std::invalid_argument("project: length mismatch");
  }
  std::vector<double> gram(k * k), rhs(k);
  double max_diag = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b <= a; ++b) gram[a * k + b] = gram[b * k + a] = dot(basis[a], basis[b]);
    rhs[a] = dot(basis[a], x);
    max_diag = std::max(max_diag, gram[a * k + a]);
  }
  if (k == 0) return std::vector<double>(x.size(), 0.0);
  if (!(max_diag > 0.0)) throw DegenerateReferences("project: zero-energy reference");

  // In-place lower Cholesky factor.
  std::vector<double> l(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = gram[i * k + j];
      for (std::size_t p = 0; p < j; ++p) s -= l[i * k + p] * l[j * k + p];
      if (i == j) {
        if (!(s > 1e-12 * max_diag)) {
          throw DegenerateReferences("project: references are linearly dependent (pivot " + std::to_string(i) + ")");
        }
        l[i * k + i] = std::sqrt(s);
      } else {
        l[i * k + j] = s / l[j * k + j];
      }
    }
  }
  std::vector<double> c(rhs);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t p = 0; p < i; ++p) c[i] -= l[i * k + p] * c[p];
    c[i] /= l[i * k + i];
  }
  for (std::size_t i = k; i-- > 0;) {
    for (std::size_t p = i + 1; p < k; ++p) c[i] -= l[p * k + i] * c[p];
    c[i] /= l[i * k + i];
  }

  std::vector<double> out(x.size(), 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t t = 0; t < x.size(); ++t) out[t] += c[a] * basis[a][t];
  }
  return out;
}

Decomposition decompose(std::span<const double> estimate, const std::vector<std::span<const double>>& references,
                        std::size_t j) {
  if (j >= references.size()) throw std::invalid_argument("decompose: target index out of range");
  const auto target_ref = references[j];
  if (target_ref.size() != estimate.size()) throw std::invalid_argument("decompose: length mismatch");
  const double ref_energy = energy(target_ref);
  if (!(ref_energy > 0.0)) throw DegenerateReferences("decompose: zero-energy target reference");

  Decomposition d;
  const double scale = dot(estimate, target_ref) / ref_energy;
  d.target.resize(estimate.size());
  for (std::size_t t = 0; t < estimate.size(); ++t) d.target[t] = scale * target_ref[t];
  const std::vector<double> all = project(estimate, references);
  d.interference.resize(estimate.size());
  d.artifacts.resize(estimate.size());
  for (std::size_t t = 0; t < estimate.size(); ++t) {
    d.interference[t] = all[t] - d.target[t];
    d.artifacts[t] = estimate[t] - all[t];
  }
  return d;
}

double ratio_db(double num, double den) {
  if (!(num > 0.0)) return -kMaxDb;
  if (!(den > 0.0)) return kMaxDb;
  return std::clamp(10.0 * std::log10(num / den), -kMaxDb, kMaxDb);
}

double sdr(const Decomposition& d) { return ratio_db(energy(d.target), energy_of_sum(d.interference, d.artifacts)); }

double sir(const Decomposition& d) { return ratio_db(energy(d.target), energy(d.interference)); }

double sar(const Decomposition& d) { return ratio_db(energy_of_sum(d.target, d.interference), energy(d.artifacts)); }

}  // namespace wavesep::metrics
