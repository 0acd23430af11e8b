#include "wavesep/data/source_set.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wavesep::data {

namespace {

void require_aligned(const dsp::Waveform& a, const dsp::Waveform& b, const std::string& what) {
  if (!a.aligned_with(b)) throw std::invalid_argument("source set: " + what + " is not aligned with existing stems");
}

}  // namespace

void SourceSet::set(const std::string& name, dsp::Waveform w) {
  if (!stems_.empty()) require_aligned(stems_.front().second, w, "stem '" + name + "'");
  if (mixture_) require_aligned(*mixture_, w, "stem '" + name + "'");
  for (auto& [n, existing] : stems_) {
    if (n == name) {
      existing = std::move(w);
      return;
    }
  }
  stems_.emplace_back(name, std::move(w));
}

const dsp::Waveform& SourceSet::get(const std::string& name) const {
  for (const auto& [n, w] : stems_) {
    if (n == name) return w;
  }
  throw std::out_of_range("source set: no stem named '" + name + "'");
}

dsp::Waveform& SourceSet::get(const std::string& name) {
  return const_cast<dsp::Waveform&>(static_cast<const SourceSet&>(*this).get(name));
}

bool SourceSet::has(const std::string& name) const {
  return std::any_of(stems_.begin(), stems_.end(), [&](const auto& s) { return s.first == name; });
}

std::vector<std::string> SourceSet::names() const {
  std::vector<std::string> out;
  for (const auto& s : stems_) out.push_back(s.first);
  return out;
}

void SourceSet::set_mixture(dsp::Waveform w) {
  if (!stems_.empty()) require_aligned(stems_.front().second, w, "mixture");
  mixture_ = std::move(w);
}

void SourceSet::remix() { mixture_ = sum(); }

dsp::Waveform SourceSet::sum() const {
  if (stems_.empty()) throw std::logic_error("source set: sum of an empty set");
  dsp::Waveform total = stems_.front().second;
  for (std::size_t i = 1; i < stems_.size(); ++i) total += stems_[i].second;
  return total;
}

double SourceSet::mixture_error() const {
  if (!mixture_) throw std::logic_error("source set: no mixture attached");
  const dsp::Waveform total = sum();
  double worst = 0.0;
  for (std::size_t i = 0; i < total.samples().size(); ++i) {
    worst = std::max(worst, std::abs(total.samples()[i] - mixture_->samples()[i]));
  }
  return worst;
}

int SourceSet::sample_rate() const {
  if (!stems_.empty()) return stems_.front().second.sample_rate();
  if (mixture_) return mixture_->sample_rate();
  throw std::logic_error("source set: empty");
}

int SourceSet::channels() const {
  if (!stems_.empty()) return stems_.front().second.channels();
  if (mixture_) return mixture_->channels();
  throw std::logic_error("source set: empty");
}

std::size_t SourceSet::length() const {
  if (!stems_.empty()) return stems_.front().second.length();
  if (mixture_) return mixture_->length();
  return 0;
}

SourceSet SourceSet::slice(std::size_t begin, std::size_t count) const {
  SourceSet out;
  for (const auto& [n, w] : stems_) out.set(n, w.slice(begin, count));
  if (mixture_) out.set_mixture(mixture_->slice(begin, count));
  return out;
}

}  // namespace wavesep::data
