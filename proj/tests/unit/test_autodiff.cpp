#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "wavesep/ad/checkpoint.hpp"
#include "wavesep/ad/grad_check.hpp"
#include "wavesep/ad/ops.hpp"
#include "wavesep/error.hpp"
#include "wavesep/verify/suite.hpp"

using namespace wavesep;
using ad::Shape;
using ad::Tape;
using ad::Tensor;
using ad::Var;
using testing::random_tensor;

namespace {

Tensor<double> eval(const std::function<Var(Tape<double>&)>& f) {
  Tape<double> tape(false);
  return tape.value(f(tape));
}

// Dense cross-correlation straight from the definition.
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w, std::size_t stride, std::size_t dilation) {
  const std::size_t B = x.dim(0), Ci = x.dim(1), T = x.dim(2), Co = w.dim(0), K = w.dim(2);
  const std::size_t To = (T - (K - 1) * dilation - 1) / stride + 1;
  Tensor<double> y({B, Co, To});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < Co; ++o)
      for (std::size_t t = 0; t < To; ++t) {
        double s = 0.0;
        for (std::size_t i = 0; i < Ci; ++i)
          for (std::size_t k = 0; k < K; ++k)
            s += w.data[(o * Ci + i) * K + k] * x.data[(b * Ci + i) * T + t * stride + k * dilation];
        y.data[(b * Co + o) * To + t] = s;
      }
  return y;
}

double max_diff(const Tensor<double>& a, const Tensor<double>& b) {
  REQUIRE(a.shape == b.shape);
  return testing::max_abs_diff(a.data, b.data);
}

}  // namespace

TEST_SUITE("autodiff") {
  TEST_CASE("tensor and parameter store basics") {
    CHECK(ad::numel({2, 3, 4}) == 24);
    CHECK(ad::numel({}) == 1);
    CHECK_THROWS_AS(Tensor<double>({2, 2}, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    ad::ParameterStore<float> store;
    auto& p = store.add("encoder.0.conv.weight", {4, 2, 8});
    CHECK(p.value.size() == 64);
    CHECK_THROWS_AS(store.add("encoder.0.conv.weight", {1}), std::invalid_argument);
    CHECK(store.find("missing") == nullptr);
    CHECK(store.scalar_count() == 64);
  }

  TEST_CASE("conv1d hand examples") {
    Tensor<double> x({1, 1, 4}, {1, 2, 3, 4});
    Tensor<double> w({1, 1, 2}, {1, 1});
    const auto y = eval([&](auto& t) { return ad::conv1d(t, t.constant(x), t.constant(w), Var{}, 2); });
    CHECK(y.shape == Shape{1, 1, 2});
    CHECK(y.data == std::vector<double>{3, 7});

    const auto r = random_tensor<double>({2, 3, 10}, 1);
    Tensor<double> eye({3, 3, 1});
    for (std::size_t c = 0; c < 3; ++c) eye.data[c * 3 + c] = 1.0;
    const auto id = eval([&](auto& t) { return ad::conv1d(t, t.constant(r), t.constant(eye), Var{}); });
    CHECK(id.data == r.data);
  }

  TEST_CASE("conv1d output length and naive oracle") {
    const auto x = random_tensor<double>({2, 3, 32}, 2);
    const auto w = random_tensor<double>({5, 3, 8}, 3);
    const auto y = eval([&](auto& t) { return ad::conv1d(t, t.constant(x), t.constant(w), Var{}, 4); });
    CHECK(y.shape == Shape{2, 5, 7});
    CHECK(max_diff(y, naive_conv(x, w, 4, 1)) <= 1e-12);
    const auto yd = eval([&](auto& t) { return ad::conv1d(t, t.constant(x), t.constant(w), Var{}, 3, 2); });
    CHECK(max_diff(yd, naive_conv(x, w, 3, 2)) <= 1e-12);
  }

  TEST_CASE("conv1d rejects bad geometry") {
    const auto x = random_tensor<double>({1, 3, 5}, 2);
    const auto w = random_tensor<double>({2, 3, 8}, 3);
    const auto w2 = random_tensor<double>({2, 4, 2}, 3);
    Tape<double> tape(false);
    CHECK_THROWS(ad::conv1d(tape, tape.constant(x), tape.constant(w), Var{}));
    CHECK_THROWS(ad::conv1d(tape, tape.constant(x), tape.constant(w2), Var{}));
  }

  TEST_CASE("conv_transpose1d hand examples") {
    Tensor<double> x({1, 1, 2}, {1, 1});
    Tensor<double> w({1, 1, 2}, {1, 2});
    const auto y = eval([&](auto& t) { return ad::conv_transpose1d(t, t.constant(x), t.constant(w), Var{}, 2); });
    CHECK(y.data == std::vector<double>{1, 2, 1, 2});

    Tensor<double> one({1, 1, 1}, {3.0});
    const auto k = random_tensor<double>({1, 1, 8}, 4);
    const auto z = eval([&](auto& t) { return ad::conv_transpose1d(t, t.constant(one), t.constant(k), Var{}, 4); });
    REQUIRE(z.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(z.data[i] == doctest::Approx(3.0 * k.data[i]));
  }

  TEST_CASE("conv then conv_transpose length algebra") {
    for (std::size_t T = 8; T < 80; ++T) {
      const std::size_t frames = (T - 8) / 4 + 1;
      const std::size_t back = (frames - 1) * 4 + 8;
      CHECK((back == T) == ((T - 8) % 4 == 0));
      CHECK(back <= T);
    }
  }

  TEST_CASE("depthwise conv: delta kernel, independence, zero-stuffed oracle") {
    const auto x = random_tensor<double>({1, 2, 20}, 5);
    Tensor<double> delta({2, 1, 3});
    delta.data[1] = delta.data[4] = 1.0;
    const auto y = eval([&](auto& t) { return ad::depthwise_conv1d(t, t.constant(x), t.constant(delta), Var{}); });
    REQUIRE(y.shape == Shape{1, 2, 18});
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < 18; ++i) CHECK(y.data[c * 18 + i] == x.data[c * 20 + i + 1]);

    const auto w = random_tensor<double>({2, 1, 3}, 6);
    auto x2 = x;
    x2.data[3] += 1.0;  // channel 0 only
    const auto a = eval([&](auto& t) { return ad::depthwise_conv1d(t, t.constant(x), t.constant(w), Var{}, 1, 4); });
    const auto b = eval([&](auto& t) { return ad::depthwise_conv1d(t, t.constant(x2), t.constant(w), Var{}, 1, 4); });
    REQUIRE(a.shape == Shape{1, 2, 12});  // span 9
    for (std::size_t i = 0; i < 12; ++i) CHECK(a.data[12 + i] == b.data[12 + i]);

    // Dense kernel of width 9 with taps at 0, 4, 8 per channel.
    Tensor<double> dense({2, 2, 9});
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t k = 0; k < 3; ++k) dense.data[(c * 2 + c) * 9 + 4 * k] = w.data[c * 3 + k];
    CHECK(max_diff(a, naive_conv(x, dense, 1, 1)) <= 1e-12);
  }

  TEST_CASE("pointwise conv equals K=1 conv and identity") {
    const auto x = random_tensor<double>({2, 3, 9}, 7);
    const auto w = random_tensor<double>({4, 3, 1}, 8);
    const auto bias = random_tensor<double>({4}, 9);
    const auto p = eval([&](auto& t) { return ad::pointwise_conv1d(t, t.constant(x), t.constant(w), t.constant(bias)); });
    const auto c = eval([&](auto& t) { return ad::conv1d(t, t.constant(x), t.constant(w), t.constant(bias)); });
    CHECK(max_diff(p, c) <= 1e-14);
  }

  TEST_CASE("linear: identity and zero weight") {
    const auto x = random_tensor<double>({2, 5, 3}, 10);
    Tensor<double> eye({3, 3});
    for (std::size_t i = 0; i < 3; ++i) eye.data[i * 4] = 1.0;
    CHECK(eval([&](auto& t) { return ad::linear(t, t.constant(x), t.constant(eye), Var{}); }).data == x.data);
    Tensor<double> zero({2, 3});
    Tensor<double> bias({2}, {0.5, -1.5});
    const auto y = eval([&](auto& t) { return ad::linear(t, t.constant(x), t.constant(zero), t.constant(bias)); });
    CHECK(y.shape == Shape{2, 5, 2});
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y.data[i] == bias.data[i % 2]);
    Tensor<double> bad({2, 4});
    Tape<double> tape(false);
    CHECK_THROWS(ad::linear(tape, tape.constant(x), tape.constant(bad), Var{}));
  }

  TEST_CASE("relu and prelu values") {
    Tensor<double> x({1, 2, 2}, {-1, 2, -4, 3});
    CHECK(eval([&](auto& t) { return ad::relu(t, t.constant(x)); }).data == std::vector<double>{0, 2, 0, 3});
    Tensor<double> slope({2}, {0.25, 0.0});
    CHECK(eval([&](auto& t) { return ad::prelu(t, t.constant(x), t.constant(slope)); }).data ==
          std::vector<double>{-0.25, 2, 0, 3});
  }

  TEST_CASE("glu: zero gate, saturated gate, odd channels") {
    auto x = random_tensor<double>({1, 4, 3}, 11);
    for (std::size_t i = 6; i < 12; ++i) x.data[i] = 0.0;
    auto y = eval([&](auto& t) { return ad::glu(t, t.constant(x)); });
    REQUIRE(y.shape == Shape{1, 2, 3});
    for (std::size_t i = 0; i < 6; ++i) CHECK(y.data[i] == doctest::Approx(0.5 * x.data[i]));
    for (std::size_t i = 6; i < 12; ++i) x.data[i] = 100.0;
    y = eval([&](auto& t) { return ad::glu(t, t.constant(x)); });
    for (std::size_t i = 0; i < 6; ++i) CHECK(y.data[i] == doctest::Approx(x.data[i]).epsilon(1e-12));
    Tape<double> tape(false);
    CHECK_THROWS(ad::glu(tape, tape.constant(random_tensor<double>({1, 3, 2}, 1))));
  }

  TEST_CASE("global layer norm statistics") {
    Tensor<double> ones({3}, 1.0), zeros({3}, 0.0);
    const Tensor<double> constant({2, 3, 7}, 4.0);
    const auto c = eval([&](auto& t) {
      return ad::global_layer_norm(t, t.constant(constant), t.constant(ones), t.constant(zeros));
    });
    for (double v : c.data) CHECK(v == 0.0);
    const auto x = random_tensor<double>({2, 3, 50}, 12, 3.0);
    const auto y = eval([&](auto& t) { return ad::global_layer_norm(t, t.constant(x), t.constant(ones), t.constant(zeros)); });
    for (std::size_t b = 0; b < 2; ++b) {
      double mean = 0.0, var = 0.0;
      for (std::size_t i = 0; i < 150; ++i) mean += y.data[b * 150 + i];
      mean /= 150;
      for (std::size_t i = 0; i < 150; ++i) var += (y.data[b * 150 + i] - mean) * (y.data[b * 150 + i] - mean);
      var /= 150;
      CHECK(std::abs(mean) <= 1e-6);
      CHECK(std::abs(var - 1.0) <= 1e-5);
    }
  }

  TEST_CASE("bilstm: zero weights give zero output") {
    const std::size_t H = 3;
    const auto x = random_tensor<double>({1, 5, 2}, 13);
    Tape<double> tape(false);
    auto zeros = [&](Shape s) { return tape.constant(Tensor<double>(std::move(s))); };
    std::vector<ad::BiLstmLayer> layers;
    for (std::size_t l = 0; l < 2; ++l) {
      const std::size_t in = l == 0 ? 2 : 2 * H;
      layers.push_back({{zeros({4 * H, in}), zeros({4 * H, H}), zeros({4 * H})},
                        {zeros({4 * H, in}), zeros({4 * H, H}), zeros({4 * H})}});
    }
    const auto y = tape.value(ad::bilstm(tape, tape.constant(x), std::span<const ad::BiLstmLayer>(layers)));
    CHECK(y.shape == Shape{1, 5, 2 * H});
    for (double v : y.data) CHECK(v == 0.0);
  }

  TEST_CASE("bilstm: time reversal swaps directions when weights are shared") {
    const std::size_t H = 2, I = 3, T = 6;
    const auto x = random_tensor<double>({1, T, I}, 14);
    Tensor<double> xr({1, T, I});
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < I; ++i) xr.data[t * I + i] = x.data[(T - 1 - t) * I + i];
    const auto wih = random_tensor<double>({4 * H, I}, 15), whh = random_tensor<double>({4 * H, H}, 16),
               bias = random_tensor<double>({4 * H}, 17);
    auto run = [&](const Tensor<double>& in) {
      Tape<double> tape(false);
      ad::LstmWeights w{tape.constant(wih), tape.constant(whh), tape.constant(bias)};
      std::vector<ad::BiLstmLayer> layers{{w, w}};
      return tape.value(ad::bilstm(tape, tape.constant(in), std::span<const ad::BiLstmLayer>(layers)));
    };
    const auto y = run(x), yr = run(xr);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t h = 0; h < H; ++h) {
        CHECK(yr.data[t * 2 * H + h] == doctest::Approx(y.data[(T - 1 - t) * 2 * H + H + h]).epsilon(1e-12));
        CHECK(yr.data[t * 2 * H + H + h] == doctest::Approx(y.data[(T - 1 - t) * 2 * H + h]).epsilon(1e-12));
      }
  }

  TEST_CASE("shape ops") {
    const auto x = random_tensor<double>({2, 3, 4}, 18);
    const auto p = eval([&](auto& t) { return ad::pad_time(t, t.constant(x), 1, 2); });
    CHECK(p.shape == Shape{2, 3, 7});
    CHECK(p.data[0] == 0.0);
    CHECK(p.data[1] == x.data[0]);
    const auto c = eval([&](auto& t) { return ad::crop_time(t, ad::pad_time(t, t.constant(x), 1, 2), 1, 4); });
    CHECK(c.data == x.data);
    const auto s = eval([&](auto& t) { return ad::swap_last_axes(t, ad::swap_last_axes(t, t.constant(x))); });
    CHECK(s.data == x.data);
    const auto sw = eval([&](auto& t) { return ad::swap_last_axes(t, t.constant(x)); });
    CHECK(sw.shape == Shape{2, 4, 3});
    CHECK(sw.data[1 * 3 + 2] == x.data[2 * 4 + 1]);
    const auto cc = eval([&](auto& t) { return ad::concat_last(t, t.constant(x), t.constant(x)); });
    CHECK(cc.shape == Shape{2, 3, 8});
    CHECK(cc.data[4] == x.data[0]);
    Tape<double> tape(false);
    CHECK_THROWS(ad::reshape(tape, tape.constant(x), {5, 5}));
  }

  TEST_CASE("apply_masks semantics") {
    const std::size_t S = 2, N = 3, F = 4;
    const auto enc = random_tensor<double>({1, N, F}, 19);
    const auto masks = random_tensor<double>({1, S * N, F}, 20);
    const auto y = eval([&](auto& t) { return ad::apply_masks(t, t.constant(enc), t.constant(masks), S); });
    REQUIRE(y.shape == Shape{S, N, F});
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t i = 0; i < N * F; ++i) CHECK(y.data[s * N * F + i] == enc.data[i] * masks.data[s * N * F + i]);
  }

  TEST_CASE("backward accumulates additively") {
    Tape<double> tape;
    const Var x = tape.variable(Tensor<double>({3}, {1, -2, 3}));
    const Var y = ad::add(tape, x, ad::scale(tape, x, 2.0));
    const Tensor<double> w({3}, {1, 1, 1});
    tape.backward(ad::inner_product(tape, y, w));
    CHECK(tape.grad(x) == std::vector<double>{3, 3, 3});
  }

  TEST_CASE("grad_check: linear is exact, glu and bilstm within bounds") {
    ad::GradCheckOptions opts;
    const auto lin = ad::grad_check([](auto& t, std::span<const Var> v) { return ad::linear(t, v[0], v[1], v[2]); },
                                    {random_tensor<double>({2, 4, 3}, 1), random_tensor<double>({5, 3}, 2),
                                     random_tensor<double>({5}, 3)},
                                    nullptr, nullptr, opts);
    CHECK(lin.max_rel_error <= 1e-7);
    CHECK(lin.coordinates == 24 + 15 + 5);

    const auto g = ad::grad_check([](auto& t, std::span<const Var> v) { return ad::glu(t, v[0]); },
                                  {random_tensor<double>({2, 8, 5}, 4)}, nullptr, nullptr, opts);
    CHECK(g.max_rel_error <= 1e-5);

    const std::size_t H = 2;
    const auto b = ad::grad_check(
        [](auto& t, std::span<const Var> v) {
          std::vector<ad::BiLstmLayer> layers{{{v[1], v[2], v[3]}, {v[4], v[5], v[6]}},
                                              {{v[7], v[8], v[9]}, {v[10], v[11], v[12]}}};
          return ad::bilstm(t, v[0], std::span<const ad::BiLstmLayer>(layers));
        },
        {random_tensor<double>({1, 4, 3}, 5), random_tensor<double>({4 * H, 3}, 6, 0.5),
         random_tensor<double>({4 * H, H}, 7, 0.5), random_tensor<double>({4 * H}, 8, 0.5),
         random_tensor<double>({4 * H, 3}, 9, 0.5), random_tensor<double>({4 * H, H}, 10, 0.5),
         random_tensor<double>({4 * H}, 11, 0.5), random_tensor<double>({4 * H, 2 * H}, 12, 0.5),
         random_tensor<double>({4 * H, H}, 13, 0.5), random_tensor<double>({4 * H}, 14, 0.5),
         random_tensor<double>({4 * H, 2 * H}, 15, 0.5), random_tensor<double>({4 * H, H}, 16, 0.5),
         random_tensor<double>({4 * H}, 17, 0.5)},
        nullptr, nullptr, opts);
    CHECK(b.max_rel_error <= 1e-4);
  }

  TEST_CASE("grad_check flags non-finite values") {
    Tensor<double> x({2}, {1.0, std::nan("")});
    CHECK_THROWS_AS(ad::grad_check([](auto& t, std::span<const Var> v) { return ad::relu(t, v[0]); }, {x}),
                    NumericError);
  }

  TEST_CASE("every registered op passes the gradient check") {
    for (const auto& name : verify::grad_op_names()) {
      const auto outcome = verify::grad_check_op(name);
      INFO(name << " error " << outcome.error);
      CHECK(outcome.passed);
      CHECK(outcome.error <= verify::kGradTolerance);
    }
    CHECK_THROWS_AS(verify::grad_check_op("no_such_op"), std::invalid_argument);
  }

  TEST_CASE("adjoint identity for every linear operator") {
    for (const auto& name : verify::adjoint_op_names()) {
      const auto outcome = verify::adjoint_check(name, 20);
      INFO(name << " error " << outcome.error);
      CHECK(outcome.error <= verify::kAdjointTolerance);
    }
  }

  TEST_CASE("determinism of forward and backward") {
    const auto x = random_tensor<double>({2, 3, 32}, 21);
    const auto w = random_tensor<double>({4, 3, 8}, 22);
    auto run = [&] {
      Tape<double> tape;
      const Var xv = tape.variable(x);
      const Var y = ad::glu(tape, ad::conv1d(tape, xv, tape.constant(w), Var{}, 4));
      tape.backward(ad::inner_product(tape, y, random_tensor<double>(tape.shape(y), 23)));
      return std::make_pair(tape.value(y).data, tape.grad(xv));
    };
    CHECK(run() == run());
  }

  TEST_CASE("checkpoint round trip is bit exact") {
    testing::TempDir dir("ckpt");
    std::vector<ad::NamedTensor<float>> f{{"a.weight", random_tensor<float>({3, 4, 5}, 24)},
                                          {"b", random_tensor<float>({7}, 25)}};
    ad::write_checkpoint(dir / "f", f);
    const auto rf = ad::read_checkpoint<float>(dir / "f");
    REQUIRE(rf.size() == 2);
    CHECK(rf[0].name == "a.weight");
    CHECK(rf[0].tensor.shape == f[0].tensor.shape);
    CHECK(rf[0].tensor.data == f[0].tensor.data);
    CHECK(rf[1].tensor.data == f[1].tensor.data);

    std::vector<ad::NamedTensor<double>> d{{"x", random_tensor<double>({2, 2}, 26)}};
    ad::write_checkpoint(dir / "d", d);
    CHECK(ad::read_checkpoint<double>(dir / "d")[0].tensor.data == d[0].tensor.data);

    ad::ParameterStore<double> store;
    store.add("x", {2, 2});
    ad::load_parameters(store, dir / "d");
    CHECK(store.get("x").value.data == d[0].tensor.data);

    ad::ParameterStore<double> wrong;
    wrong.add("x", {4});
    CHECK_THROWS_AS(ad::load_parameters(wrong, dir / "d"), IoError);
    ad::ParameterStore<double> missing;
    missing.add("y", {2, 2});
    CHECK_THROWS_AS(ad::load_parameters(missing, dir / "d"), IoError);
    CHECK_THROWS_AS(ad::read_checkpoint<double>(dir / "nothing"), IoError);
  }
}
