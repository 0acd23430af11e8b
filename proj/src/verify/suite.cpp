#include "wavesep/verify/suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <utility>

#include "wavesep/ad/grad_check.hpp"
#include "wavesep/ad/ops.hpp"
#include "wavesep/models/convtasnet.hpp"
#include "wavesep/models/demucs.hpp"
#include "wavesep/models/init.hpp"
#include "wavesep/train/loss.hpp"

namespace wavesep::verify {

namespace {

using ad::Shape;
using ad::Tensor;
using ad::Var;
using Clock = std::chrono::steady_clock;

template <typename T>
T element_of(const ad::Tape<T>&);

class Random {
 public:
  explicit Random(std::uint64_t seed) : rng_(seed) {}

  Tensor<double> normal(Shape shape, double scale = 1.0) {
    Tensor<double> t(std::move(shape));
    for (double& v : t.data) v = scale * normal_(rng_);
    return t;
  }
  // Entries at least `margin` away from zero, for ops with a kink there.
  Tensor<double> away_from_zero(Shape shape, double margin = 0.1) {
    Tensor<double> t = normal(std::move(shape));
    for (double& v : t.data) v = v >= 0.0 ? v + margin : v - margin;
    return t;
  }
  std::size_t size(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

template <typename F>
CheckOutcome run_grad(const std::string& name, F&& f, std::vector<Tensor<double>> inputs, std::uint64_t seed) {
  const auto start = Clock::now();
  ad::GradCheckOptions options;
  options.seed = seed;
  const auto r = ad::grad_check(std::forward<F>(f), std::move(inputs), nullptr, nullptr, options);
  CheckOutcome out;
  out.name = name;
  out.error = r.max_rel_error;
  out.tolerance = kGradTolerance;
  out.passed = r.max_rel_error <= kGradTolerance;
  out.detail = std::to_string(r.coordinates) + " coords, worst " + r.worst;
  out.seconds = elapsed(start);
  return out;
}

using GradEntry = std::pair<std::string, std::function<CheckOutcome(std::uint64_t)>>;

const std::vector<GradEntry>& grad_registry() {
  static const std::vector<GradEntry> entries = [] {
    std::vector<GradEntry> e;
    auto add = [&e](std::string name, auto f, auto make_inputs) {
      e.emplace_back(name, [name, f, make_inputs](std::uint64_t seed) {
        Random rnd(seed);
        return run_grad(name, f, make_inputs(rnd), seed);
      });
    };
    add("conv1d", [](auto& t, std::span<const Var> v) { return ad::conv1d(t, v[0], v[1], v[2]); },
        [](Random& r) { return std::vector{r.normal({2, 3, 11}), r.normal({4, 3, 3}), r.normal({4})}; });
    add("conv1d_strided_dilated",
        [](auto& t, std::span<const Var> v) { return ad::conv1d(t, v[0], v[1], v[2], 2, 2); },
        [](Random& r) { return std::vector{r.normal({2, 3, 17}), r.normal({4, 3, 3}), r.normal({4})}; });
    add("conv1d_no_bias", [](auto& t, std::span<const Var> v) { return ad::conv1d(t, v[0], v[1], Var{}, 4); },
        [](Random& r) { return std::vector{r.normal({1, 2, 20}), r.normal({3, 2, 8})}; });
    add("conv_transpose1d",
        [](auto& t, std::span<const Var> v) { return ad::conv_transpose1d(t, v[0], v[1], v[2], 2); },
        [](Random& r) { return std::vector{r.normal({2, 3, 6}), r.normal({3, 4, 5}), r.normal({4})}; });
    add("depthwise_conv1d",
        [](auto& t, std::span<const Var> v) { return ad::depthwise_conv1d(t, v[0], v[1], v[2], 1, 2); },
        [](Random& r) { return std::vector{r.normal({2, 3, 13}), r.normal({3, 1, 3}), r.normal({3})}; });
    add("pointwise_conv1d",
        [](auto& t, std::span<const Var> v) { return ad::pointwise_conv1d(t, v[0], v[1], v[2]); },
        [](Random& r) { return std::vector{r.normal({2, 3, 7}), r.normal({5, 3, 1}), r.normal({5})}; });
    add("linear", [](auto& t, std::span<const Var> v) { return ad::linear(t, v[0], v[1], v[2]); },
        [](Random& r) { return std::vector{r.normal({2, 4, 3}), r.normal({5, 3}), r.normal({5})}; });
    add("relu", [](auto& t, std::span<const Var> v) { return ad::relu(t, v[0]); },
        [](Random& r) { return std::vector{r.away_from_zero({2, 3, 7})}; });
    add("prelu", [](auto& t, std::span<const Var> v) { return ad::prelu(t, v[0], v[1]); },
        [](Random& r) { return std::vector{r.away_from_zero({2, 3, 7}), r.normal({3})}; });
    add("glu", [](auto& t, std::span<const Var> v) { return ad::glu(t, v[0]); },
        [](Random& r) { return std::vector{r.normal({2, 4, 5})}; });
    add("add", [](auto& t, std::span<const Var> v) { return ad::add(t, v[0], v[1]); },
        [](Random& r) { return std::vector{r.normal({2, 3, 4}), r.normal({2, 3, 4})}; });
    add("scale",
        [](auto& t, std::span<const Var> v) {
          using E = decltype(element_of(t));
          return ad::scale(t, v[0], E(0.7));
        },
        [](Random& r) { return std::vector{r.normal({2, 3, 4})}; });
    add("global_layer_norm",
        [](auto& t, std::span<const Var> v) { return ad::global_layer_norm(t, v[0], v[1], v[2]); },
        [](Random& r) { return std::vector{r.normal({2, 3, 7}), r.normal({3}), r.normal({3})}; });
    add("lstm", [](auto& t, std::span<const Var> v) { return ad::lstm(t, v[0], v[1], v[2], v[3], false); },
        [](Random& r) {
          return std::vector{r.normal({2, 5, 3}), r.normal({16, 3}, 0.5), r.normal({16, 4}, 0.5), r.normal({16}, 0.5)};
        });
    add("lstm_reverse", [](auto& t, std::span<const Var> v) { return ad::lstm(t, v[0], v[1], v[2], v[3], true); },
        [](Random& r) {
          return std::vector{r.normal({2, 5, 3}), r.normal({16, 3}, 0.5), r.normal({16, 4}, 0.5), r.normal({16}, 0.5)};
        });
    add("bilstm",
        [](auto& t, std::span<const Var> v) {
          const ad::BiLstmLayer layers[2] = {{{v[1], v[2], v[3]}, {v[4], v[5], v[6]}},
                                             {{v[7], v[8], v[9]}, {v[10], v[11], v[12]}}};
          return ad::bilstm(t, v[0], std::span<const ad::BiLstmLayer>(layers));
        },
        [](Random& r) {
          std::vector<Tensor<double>> in{r.normal({1, 4, 2})};
          for (std::size_t input : {2u, 6u}) {
            for (int dir = 0; dir < 2; ++dir) {
              in.push_back(r.normal({12, input}, 0.5));
              in.push_back(r.normal({12, 3}, 0.5));
              in.push_back(r.normal({12}, 0.5));
            }
          }
          return in;
        });
    add("pad_time", [](auto& t, std::span<const Var> v) { return ad::pad_time(t, v[0], 1, 2); },
        [](Random& r) { return std::vector{r.normal({2, 3, 4})}; });
    add("crop_time", [](auto& t, std::span<const Var> v) { return ad::crop_time(t, v[0], 2, 3); },
        [](Random& r) { return std::vector{r.normal({2, 3, 7})}; });
    add("swap_last_axes", [](auto& t, std::span<const Var> v) { return ad::swap_last_axes(t, v[0]); },
        [](Random& r) { return std::vector{r.normal({2, 3, 5})}; });
    add("reshape", [](auto& t, std::span<const Var> v) { return ad::reshape(t, v[0], Shape{3, 2, 5}); },
        [](Random& r) { return std::vector{r.normal({2, 3, 5})}; });
    add("concat_last", [](auto& t, std::span<const Var> v) { return ad::concat_last(t, v[0], v[1]); },
        [](Random& r) { return std::vector{r.normal({2, 3, 4}), r.normal({2, 3, 2})}; });
    add("apply_masks", [](auto& t, std::span<const Var> v) { return ad::apply_masks(t, v[0], v[1], 2); },
        [](Random& r) { return std::vector{r.normal({2, 3, 5}), r.normal({2, 6, 5})}; });
    add("inner_product",
        [](auto& t, std::span<const Var> v) {
          using E = decltype(element_of(t));
          Tensor<E> w(Shape{2, 3});
          for (std::size_t i = 0; i < w.size(); ++i) w.data[i] = E(0.25) * E(i) - E(0.5);
          return ad::inner_product(t, v[0], w);
        },
        [](Random& r) { return std::vector{r.normal({2, 3})}; });
    add("loss_l1", [](auto& t, std::span<const Var> v) { return train::loss_l1(t, v[0], v[1]); },
        [](Random& r) {
          Tensor<double> est = r.normal({2, 4, 2, 5});
          Tensor<double> target = r.away_from_zero({2, 4, 2, 5});
          for (std::size_t i = 0; i < est.size(); ++i) target.data[i] += est.data[i];
          return std::vector{est, target};
        });
    add("loss_l2", [](auto& t, std::span<const Var> v) { return train::loss_l2(t, v[0], v[1]); },
        [](Random& r) { return std::vector{r.normal({2, 4, 2, 5}), r.normal({2, 4, 2, 5})}; });
    return e;
  }();
  return entries;
}

// Linear maps for the adjoint suite: each builds the op on random shapes and
// returns its inputs (the vector x) and output.
struct LinearInstance {
  std::vector<Tensor<double>> inputs;
  std::function<Var(ad::Tape<double>&, std::span<const Var>)> apply;
  // Explicit A^T for single-input maps; reverse mode is used when empty.
  std::function<Tensor<double>(const Tensor<double>&)> transpose = {};
};

using AdjointEntry = std::pair<std::string, std::function<LinearInstance(Random&)>>;

const std::vector<AdjointEntry>& adjoint_registry() {
  static const std::vector<AdjointEntry> entries = [] {
    std::vector<AdjointEntry> e;
    e.emplace_back("conv1d", [](Random& r) {
      const std::size_t cin = r.size(1, 4), cout = r.size(1, 4), k = r.size(1, 5), stride = r.size(1, 3),
                        dil = r.size(1, 3);
      const std::size_t t = (k - 1) * dil + 1 + r.size(0, 12);
      auto w = r.normal({cout, cin, k});
      return LinearInstance{{r.normal({r.size(1, 2), cin, t})},
                            [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::conv1d(tape, v[0], tape.constant(w), Var{}, stride, dil);
                            }};
    });
    e.emplace_back("conv1d_weight", [](Random& r) {
      const std::size_t cin = r.size(1, 4), cout = r.size(1, 4), k = r.size(1, 5);
      auto x = r.normal({r.size(1, 2), cin, k + r.size(0, 10)});
      return LinearInstance{{r.normal({cout, cin, k})}, [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::conv1d(tape, tape.constant(x), v[0], Var{}, 1, 1);
                            }};
    });
    e.emplace_back("conv_transpose1d", [](Random& r) {
      const std::size_t cin = r.size(1, 4), cout = r.size(1, 4), k = r.size(1, 8), stride = r.size(1, 4);
      auto w = r.normal({cin, cout, k});
      return LinearInstance{{r.normal({r.size(1, 2), cin, r.size(1, 10)})},
                            [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::conv_transpose1d(tape, v[0], tape.constant(w), Var{}, stride);
                            }};
    });
    e.emplace_back("depthwise_conv1d", [](Random& r) {
      const std::size_t c = r.size(1, 5), k = r.size(1, 4), dil = r.size(1, 4);
      auto w = r.normal({c, 1, k});
      return LinearInstance{{r.normal({r.size(1, 2), c, (k - 1) * dil + 1 + r.size(0, 10)})},
                            [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::depthwise_conv1d(tape, v[0], tape.constant(w), Var{}, 1, dil);
                            }};
    });
    e.emplace_back("pointwise_conv1d", [](Random& r) {
      const std::size_t cin = r.size(1, 6), cout = r.size(1, 6);
      auto w = r.normal({cout, cin, 1});
      return LinearInstance{{r.normal({r.size(1, 2), cin, r.size(1, 10)})},
                            [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::pointwise_conv1d(tape, v[0], tape.constant(w), Var{});
                            }};
    });
    e.emplace_back("linear", [](Random& r) {
      const std::size_t cin = r.size(1, 6), cout = r.size(1, 6);
      auto w = r.normal({cout, cin});
      return LinearInstance{{r.normal({r.size(1, 2), r.size(1, 5), cin})},
                            [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::linear(tape, v[0], tape.constant(w), Var{});
                            }};
    });
    e.emplace_back("scale", [](Random& r) {
      const double f = r.normal({1}).data[0];
      return LinearInstance{{r.normal({r.size(1, 3), r.size(1, 4), r.size(1, 6)})},
                            [=](ad::Tape<double>& tape, std::span<const Var> v) { return ad::scale(tape, v[0], f); }};
    });
    e.emplace_back("add", [](Random& r) {
      const Shape s{r.size(1, 3), r.size(1, 4), r.size(1, 6)};
      return LinearInstance{{r.normal(s), r.normal(s)},
                            [](ad::Tape<double>& tape, std::span<const Var> v) { return ad::add(tape, v[0], v[1]); }};
    });
    e.emplace_back("pad_time", [](Random& r) {
      const std::size_t left = r.size(0, 4), right = r.size(0, 4);
      return LinearInstance{{r.normal({r.size(1, 3), r.size(1, 4), r.size(1, 6)})},
                            [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::pad_time(tape, v[0], left, right);
                            }};
    });
    e.emplace_back("crop_time", [](Random& r) {
      const std::size_t t = r.size(1, 10), begin = r.size(0, t - 1), len = r.size(1, t - begin);
      return LinearInstance{{r.normal({r.size(1, 3), r.size(1, 4), t})},
                            [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::crop_time(tape, v[0], begin, len);
                            }};
    });
    e.emplace_back("swap_last_axes", [](Random& r) {
      return LinearInstance{{r.normal({r.size(1, 3), r.size(1, 5), r.size(1, 6)})},
                            [](ad::Tape<double>& tape, std::span<const Var> v) { return ad::swap_last_axes(tape, v[0]); }};
    });
    e.emplace_back("reshape", [](Random& r) {
      const std::size_t a = r.size(1, 3), b = r.size(1, 4), c = r.size(1, 6);
      return LinearInstance{{r.normal({a, b, c})}, [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::reshape(tape, v[0], Shape{a * b, c});
                            }};
    });
    e.emplace_back("concat_last", [](Random& r) {
      const std::size_t a = r.size(1, 3), b = r.size(1, 4);
      return LinearInstance{{r.normal({a, b, r.size(1, 5)}), r.normal({a, b, r.size(1, 5)})},
                            [](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::concat_last(tape, v[0], v[1]);
                            }};
    });
    e.emplace_back("apply_masks", [](Random& r) {
      const std::size_t b = r.size(1, 2), n = r.size(1, 4), f = r.size(1, 6), s = r.size(1, 4);
      auto masks = r.normal({b, s * n, f});
      return LinearInstance{{r.normal({b, n, f})}, [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::apply_masks(tape, v[0], tape.constant(masks), s);
                            }};
    });
    e.emplace_back("inner_product", [](Random& r) {
      const Shape s{r.size(1, 3), r.size(1, 6)};
      auto w = r.normal(s);
      return LinearInstance{{r.normal(s)}, [=](ad::Tape<double>& tape, std::span<const Var> v) {
                              return ad::inner_product(tape, v[0], w);
                            }};
    });
    // conv_transpose1d must be the adjoint of conv1d when the lengths line up.
    e.emplace_back("conv1d_transpose_pair", [](Random& r) {
      const std::size_t cin = r.size(1, 4), cout = r.size(1, 4), k = r.size(1, 8), stride = r.size(1, 4);
      const std::size_t t = (r.size(1, 8) - 1) * stride + k;
      auto w = r.normal({cout, cin, k});
      LinearInstance inst{{r.normal({1, cin, t})}, [=](ad::Tape<double>& tape, std::span<const Var> v) {
                            return ad::conv1d(tape, v[0], tape.constant(w), Var{}, stride);
                          }};
      inst.transpose = [=](const Tensor<double>& y) {
        ad::Tape<double> tape(false);
        return tape.value(ad::conv_transpose1d(tape, tape.constant(y), tape.constant(w), Var{}, stride));
      };
      return inst;
    });
    return e;
  }();
  return entries;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

std::vector<std::string> grad_op_names() {
  std::vector<std::string> names;
  for (const auto& [name, f] : grad_registry()) names.push_back(name);
  return names;
}

CheckOutcome grad_check_op(const std::string& name, std::uint64_t seed) {
  for (const auto& [n, f] : grad_registry()) {
    if (n == name) return f(seed);
  }
  throw std::invalid_argument("unknown op '" + name + "'; known ops: " + join_names(grad_op_names()));
}

std::vector<CheckOutcome> grad_check_ops(std::uint64_t seed) {
  std::vector<CheckOutcome> out;
  for (const auto& [name, f] : grad_registry()) out.push_back(f(seed));
  return out;
}

models::DemucsSpec grad_check_demucs() {
  models::DemucsSpec s = models::DemucsSpec::desk();
  s.depth = 2;
  s.initial_channels = 2;
  return s;
}

models::ConvTasnetSpec grad_check_convtasnet() {
  models::ConvTasnetSpec s = models::ConvTasnetSpec::desk();
  s.frontend_channels = 16;
  s.block_channels = 8;
  s.hidden_channels = 16;
  s.repeats = 1;
  s.blocks_per_repeat = 2;
  return s;
}

CheckOutcome grad_check_model(const models::ModelSpec& spec, std::uint64_t seed, std::size_t length,
                              std::size_t max_per_tensor) {
  const auto start = Clock::now();
  Random rnd(seed);
  ad::GradCheckOptions options;
  options.seed = seed;
  options.max_per_tensor = max_per_tensor;
  options.skip_kinks = true;
  ad::GradCheckResult r;
  std::string label;
  if (const auto* d = std::get_if<models::DemucsSpec>(&spec)) {
    if (length == 0) length = 256;
    models::DemucsModel<double> m(*d, seed);
    models::DemucsModel<long double> shadow(*d, seed);
    auto f = [&](auto& t, std::span<const Var> v) {
      if constexpr (std::is_same_v<std::decay_t<decltype(t)>, ad::Tape<double>>) {
        return m.forward(t, v[0]);
      } else {
        return shadow.forward(t, v[0]);
      }
    };
    r = ad::grad_check(f, {rnd.normal({1, static_cast<std::size_t>(d->audio_channels), length})}, &m.parameters(),
                       &shadow.parameters(), options);
    label = "model_demucs";
  } else {
    const auto& c = std::get<models::ConvTasnetSpec>(spec);
    if (length == 0) length = 200;
    models::ConvTasnetModel<double> m(c, seed);
    models::ConvTasnetModel<long double> shadow(c, seed);
    auto f = [&](auto& t, std::span<const Var> v) {
      if constexpr (std::is_same_v<std::decay_t<decltype(t)>, ad::Tape<double>>) {
        return m.forward(t, v[0]);
      } else {
        return shadow.forward(t, v[0]);
      }
    };
    r = ad::grad_check(f, {rnd.normal({1, static_cast<std::size_t>(c.audio_channels), length})}, &m.parameters(),
                       &shadow.parameters(), options);
    label = "model_convtasnet";
  }
  CheckOutcome out;
  out.name = label;
  out.error = r.max_rel_error;
  out.tolerance = kGradTolerance;
  // Kinks are rare isolated events; many of them would point at a broken op.
  const bool few_kinks = r.skipped * 100 <= r.coordinates + r.skipped;
  out.passed = r.max_rel_error <= kGradTolerance && few_kinks;
  out.detail = std::to_string(r.coordinates) + " coords, " + std::to_string(r.skipped) + " kinks skipped, worst " + r.worst;
  out.seconds = elapsed(start);
  return out;
}

std::vector<std::string> adjoint_op_names() {
  std::vector<std::string> names;
  for (const auto& [name, f] : adjoint_registry()) names.push_back(name);
  return names;
}

CheckOutcome adjoint_check(const std::string& name, int instances, std::uint64_t seed) {
  const AdjointEntry* entry = nullptr;
  for (const auto& e : adjoint_registry()) {
    if (e.first == name) entry = &e;
  }
  if (!entry) throw std::invalid_argument("unknown op '" + name + "'; known ops: " + join_names(adjoint_op_names()));
  const auto start = Clock::now();
  Random rnd(seed);
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    LinearInstance inst = entry->second(rnd);
    ad::Tape<double> tape;
    std::vector<Var> vars;
    for (auto& in : inst.inputs) vars.push_back(tape.variable(in));
    const Var out = inst.apply(tape, vars);
    const Tensor<double> ax = tape.value(out);
    const Tensor<double> y = rnd.normal(ax.shape);
    const double lhs = dot(ax.data, y.data);
    double rhs = 0.0;
    if (inst.transpose) {
      rhs = dot(inst.inputs[0].data, inst.transpose(y).data);
    } else {
      tape.backward(out, std::span<const double>(y.data));
      for (std::size_t i = 0; i < vars.size(); ++i) rhs += dot(inst.inputs[i].data, tape.grad(vars[i]));
    }
    const double scale = std::sqrt(dot(ax.data, ax.data) * dot(y.data, y.data));
    const double err = std::abs(lhs - rhs) / std::max(scale, 1e-300);
    worst = std::max(worst, scale == 0.0 ? std::abs(lhs - rhs) : err);
  }
  CheckOutcome o;
  o.name = name;
  o.error = worst;
  o.tolerance = kAdjointTolerance;
  o.passed = worst <= kAdjointTolerance;
  o.detail = std::to_string(instances) + " instances";
  o.seconds = elapsed(start);
  return o;
}

std::vector<CheckOutcome> adjoint_checks(int instances, std::uint64_t seed) {
  std::vector<CheckOutcome> out;
  for (const auto& [name, f] : adjoint_registry()) out.push_back(adjoint_check(name, instances, seed));
  return out;
}

FeatureScale demucs_feature_scale(const models::DemucsSpec& spec, std::uint64_t seed, std::size_t length) {
  models::DemucsModel<double> model(spec, seed);
  Random rng(seed ^ 0x5ca1eULL);
  ad::Tape<double> tape(false);
  const Var x = tape.constant(rng.normal({1, static_cast<std::size_t>(spec.audio_channels), length}));
  std::vector<Var> encoders, decoders;
  model.forward_traced(tape, x, &encoders, &decoders);
  auto stdev = [&](Var v) {
    const auto& d = tape.value(v).data;
    double mean = 0.0;
    for (double e : d) mean += e;
    mean /= static_cast<double>(d.size());
    double var = 0.0;
    for (double e : d) var += (e - mean) * (e - mean);
    return std::sqrt(var / static_cast<double>(d.size()));
  };
  return {stdev(encoders.front()), stdev(decoders.back())};
}

CheckOutcome rescale_identity_check(const models::DemucsSpec& spec, std::uint64_t seed) {
  const auto start = Clock::now();
  models::DemucsSpec plain = spec;
  plain.rescale = false;
  models::DemucsSpec scaled = spec;
  scaled.rescale = true;
  models::DemucsModel<double> before(plain, seed), after(scaled, seed);
  double worst = 0.0;
  std::size_t layers = 0;
  for (const auto& name : after.convolution_weight_names()) {
    const double s0 = models::weight_std(before.parameters().get(name).value);
    const double s1 = models::weight_std(after.parameters().get(name).value);
    const double expected = std::sqrt(spec.rescale_reference * s0);
    worst = std::max(worst, std::abs(s1 - expected) / expected);
    ++layers;
  }
  CheckOutcome o;
  o.name = "rescale_identity";
  o.error = worst;
  o.tolerance = 1e-6;
  o.passed = layers > 0 && worst <= o.tolerance;
  o.detail = std::to_string(layers) + " layers";
  o.seconds = elapsed(start);
  return o;
}

ad::Tensor<float> equivariance_probe(int channels, std::size_t length, std::size_t margin, std::uint64_t seed) {
  if (2 * margin >= length) throw std::invalid_argument("equivariance_probe: margin leaves no signal");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  ad::Tensor<float> x({1, static_cast<std::size_t>(channels), length});
  for (std::size_t c = 0; c < static_cast<std::size_t>(channels); ++c) {
    for (std::size_t t = margin; t + margin < length; ++t) x.data[c * length + t] = static_cast<float>(normal(rng));
  }
  return x;
}

std::string format_table(std::span<const CheckOutcome> outcomes) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %-6s %12s %10s %9s  %s\n", "check", "result", "error", "tolerance", "seconds",
                "detail");
  out << line;
  for (const auto& o : outcomes) {
    std::snprintf(line, sizeof line, "%-24s %-6s %12.3e %10.1e %9.2f  %s\n", o.name.c_str(), o.passed ? "pass" : "FAIL",
                  o.error, o.tolerance, o.seconds, o.detail.c_str());
    out << line;
  }
  return out.str();
}

}  // namespace wavesep::verify
