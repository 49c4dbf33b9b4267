#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "models/architectures.hpp"
#include "nn/augment.hpp"
#include "nn/loss.hpp"
#include "nn/model.hpp"
#include "nn/optim.hpp"
#include "oracles/generators.hpp"
#include "oracles/oracles.hpp"

using namespace hideseek;
using namespace hideseek::nn;
using gen::random_config;
using gen::random_tensor;
using gen::randomize_params;

TEST_SUITE("nn") {
  TEST_CASE("output shapes of the predictor and classifier at 128") {
    for (double width : {0.5, 1.0}) {
      const Sequential<float> vpt(12, 128, 128, models::vpt_architecture(128, width), 1);
      CHECK(vpt.output_shape(2) == Shape{2, 3, 128, 128});
    }
    const Sequential<float> vpn(3, 128, 128, models::vpn_architecture(128), 1);
    CHECK(vpn.output_shape(4) == Shape{4, 1, 1, 1});
    CHECK_THROWS_AS(models::vpt_architecture(100), Error);
    CHECK(output_shape(conv(3, 8, 3, 2, 1), {1, 3, 64, 64}) == Shape{1, 8, 32, 32});
    CHECK(output_shape(tconv(8, 4, 4, 2, 1), {1, 8, 32, 32}) == Shape{1, 4, 64, 64});
    CHECK(output_shape(maxpool(2), {1, 4, 9, 9}) == Shape{1, 4, 4, 4});
    CHECK_THROWS_AS(output_shape(conv(3, 8, 3, 1, 0), {1, 4, 8, 8}), Error);
    CHECK_THROWS_AS(output_shape(fc(10, 2), {1, 3, 2, 2}), Error);
  }

  TEST_CASE("identity 1x1 convolution") {
    Sequential<double> m(3, 5, 5, {conv(3, 3, 1, 1, 0)}, 4);
    auto params = m.params();
    std::fill(params[0]->value.begin(), params[0]->value.end(), 0.0);
    for (int i = 0; i < 3; ++i) params[0]->value[static_cast<std::size_t>(i * 3 + i)] = 1.0;
    Rng rng(1);
    const auto x = random_tensor<double>({2, 3, 5, 5}, rng);
    CHECK(m.forward(x, false).data == x.data);
  }

  TEST_CASE("zeroed final layer gives a constant sigmoid output") {
    Sequential<float> m(12, 64, 64, models::vpt_architecture(64, 0.25), 3);
    auto params = m.params();
    for (std::size_t i = params.size() - 2; i < params.size(); ++i) {
      std::fill(params[i]->value.begin(), params[i]->value.end(), 0.0f);
    }
    Rng rng(2);
    const auto y = m.forward(random_tensor<float>(m.input_shape(2), rng, 0, 1), false);
    for (float v : y.data) CHECK(v == doctest::Approx(0.5f));
  }

  TEST_CASE("optimized forward matches the naive loops") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const auto cfg = random_config(rng);
      Sequential<double> m(cfg.c, cfg.h, cfg.w, cfg.specs, rng.next_u64());
      randomize_params(m, rng, 0.8);
      const auto x = random_tensor<double>(m.input_shape(2), rng);
      const auto fast = m.forward(x, false);
      const auto slow = oracle::naive_forward(m, x);
      REQUIRE(fast.shape == slow.shape);
      for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast.data[i] == doctest::Approx(slow.data[i]).epsilon(1e-9));
    }
    // The float path agrees with the double path.
    Sequential<double> md(12, 32, 32, models::vpt_architecture(32, 0.25), 5);
    Sequential<float> mf(12, 32, 32, models::vpt_architecture(32, 0.25), 5);
    const auto xd = random_tensor<double>(md.input_shape(1), rng, 0, 1);
    Tensor<float> xf(xd.shape);
    for (std::size_t i = 0; i < xd.size(); ++i) xf.data[i] = static_cast<float>(xd.data[i]);
    const auto yd = md.forward(xd, false);
    const auto yf = mf.forward(xf, false);
    for (std::size_t i = 0; i < yd.size(); ++i) CHECK(std::abs(yd.data[i] - yf.data[i]) < 1e-5);
  }

  TEST_CASE("finite-difference gradients on random small configurations") {
    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const auto cfg = random_config(rng);
      Sequential<double> m(cfg.c, cfg.h, cfg.w, cfg.specs, rng.next_u64());
      randomize_params(m, rng, 0.8);
      const auto x = random_tensor<double>(m.input_shape(2), rng);
      const auto r = oracle::finite_difference_check(m, x, 25, rng.next_u64());
      CHECK(r.probes == 50);
      CHECK(r.max_rel_error <= 1e-3);
      worst = std::max(worst, r.max_rel_error);
    }
    MESSAGE("worst relative error " << worst);
  }

  TEST_CASE("constant loss gives zero parameter gradients") {
    Sequential<double> m(2, 8, 8, {conv(2, 3, 3, 1, 1), activation(ActivationKind::LeakyRelu), fc(192, 1)}, 7);
    Rng rng(3);
    const auto x = random_tensor<double>(m.input_shape(3), rng);
    const auto y = m.forward(x, true);
    m.zero_grad();
    m.backward(Tensor<double>(y.shape, 0.0));
    for (auto* p : m.params()) {
      for (double g : p->grad) CHECK(g == 0.0);
    }
  }

  TEST_CASE("linear least squares gradient in closed form") {
    // y = W x + b with loss mean((y - t)^2): dW = 2/N (y - t) x^T.
    Sequential<double> m(4, 1, 1, {fc(4, 2)}, 9);
    Rng rng(4);
    const auto x = random_tensor<double>({3, 4, 1, 1}, rng);
    const auto t = random_tensor<double>({3, 2, 1, 1}, rng);
    const auto y = m.forward(x, true);
    const auto loss = mse(y, t);
    m.zero_grad();
    m.backward(loss.grad);
    const auto params = m.params();
    const double n = static_cast<double>(y.size());
    for (int o = 0; o < 2; ++o) {
      double db = 0.0;
      for (int b = 0; b < 3; ++b) db += 2.0 / n * (y.at(b, o, 0, 0) - t.at(b, o, 0, 0));
      CHECK(params[1]->grad[static_cast<std::size_t>(o)] == doctest::Approx(db).epsilon(1e-12));
      for (int i = 0; i < 4; ++i) {
        double dw = 0.0;
        for (int b = 0; b < 3; ++b) dw += 2.0 / n * (y.at(b, o, 0, 0) - t.at(b, o, 0, 0)) * x.at(b, i, 0, 0);
        CHECK(params[0]->grad[static_cast<std::size_t>(o * 4 + i)] == doctest::Approx(dw).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("backward before forward is rejected") {
    Sequential<float> m(1, 4, 4, {conv(1, 1, 3, 1, 1)}, 1);
    CHECK_THROWS_AS(m.backward(Tensor<float>({1, 1, 4, 4})), Error);
  }

  TEST_CASE("dropout is identity at evaluation and seeded in training") {
    Sequential<float> a(1, 1, 1, {fc(1, 64), dropout(0.5f)}, 5);
    Sequential<float> b(1, 1, 1, {fc(1, 64), dropout(0.5f)}, 5);
    const Tensor<float> x({1, 1, 1, 1}, 1.0f);
    const auto eval = a.forward(x, false);
    const auto ta = a.forward(x, true);
    const auto tb = b.forward(x, true);
    CHECK(ta.data == tb.data);
    int zeros = 0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      if (ta.data[i] == 0.0f) {
        ++zeros;
      } else {
        CHECK(ta.data[i] == doctest::Approx(2.0f * eval.data[i]));
      }
    }
    CHECK(zeros > 10);
    CHECK(zeros < 54);
  }

  TEST_CASE("non-finite activations raise") {
    Sequential<float> m(1, 1, 1, {fc(1, 1)}, 1);
    const Tensor<float> x({1, 1, 1, 1}, std::numeric_limits<float>::infinity());
    CHECK_THROWS_AS(m.forward(x, false), Error);
  }

  TEST_CASE("Adam") {
    SUBCASE("zero gradient leaves parameters unchanged") {
      Param<double> p{{1.0, -2.0}, {0.0, 0.0}};
      Adam<double> opt({&p});
      for (int i = 0; i < 10; ++i) opt.step(0.1);
      CHECK(p.value == std::vector<double>{1.0, -2.0});
    }
    SUBCASE("first step moves by the learning rate against the gradient sign") {
      Param<double> p{{1.0, 1.0, 1.0}, {3.0, -0.01, 1e3}};
      Adam<double> opt({&p});
      opt.step(0.01);
      CHECK(p.value[0] == doctest::Approx(0.99).epsilon(1e-6));
      CHECK(p.value[1] == doctest::Approx(1.01).epsilon(1e-6));
      CHECK(p.value[2] == doctest::Approx(0.99).epsilon(1e-6));
    }
    SUBCASE("drives a 2D quadratic below 1e-4") {
      // f = (x - 3)^2 + 10 (y + 1)^2
      Param<double> p{{0.0, 0.0}, {0.0, 0.0}};
      Adam<double> opt({&p});
      auto f = [&] { return std::pow(p.value[0] - 3, 2) + 10 * std::pow(p.value[1] + 1, 2); };
      const double f0 = f();
      for (int i = 0; i < 3000; ++i) {
        p.grad = {2 * (p.value[0] - 3), 20 * (p.value[1] + 1)};
        opt.step(0.05);
      }
      CHECK(f0 > 1.0);
      CHECK(f() < 1e-4);
    }
  }

  TEST_CASE("learning-rate schedule") {
    const LrSchedule s{0.001, {0.25, 0.65}, 0.9};
    CHECK(s.at(0.0) == doctest::Approx(0.001));
    CHECK(s.at(0.3) == doctest::Approx(0.0009));
    CHECK(s.at(0.7) == doctest::Approx(0.00081));
    CHECK(s.at(1.0) == doctest::Approx(0.00081));
    CHECK_THROWS_AS((LrSchedule{0.001, {0.5, 0.25}, 0.9}.validate()), Error);
    CHECK_THROWS_AS((LrSchedule{0.001, {1.5}, 0.9}.validate()), Error);
  }

  TEST_CASE("losses") {
    const Tensor<double> half({4, 1, 1, 1}, 0.5);
    CHECK(bce(half, {0, 1, 0, 1}).value == doctest::Approx(std::log(2.0)));
    Rng rng(8);
    const auto p = random_tensor<double>({6, 1, 1, 1}, rng, 0.01, 0.99);
    const std::vector<float> labels{0, 1, 1, 0, 1, 0};
    const std::vector<float> weights{1, 2, 0.5f, 1, 3, 1};
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double v = labels[static_cast<std::size_t>(i)];
      const double w = weights[static_cast<std::size_t>(i)];
      num += -w * (v * std::log(p.data[static_cast<std::size_t>(i)]) + (1 - v) * std::log(1 - p.data[static_cast<std::size_t>(i)]));
      den += w;
    }
    const auto r = bce(p, labels, weights);
    CHECK(r.value == doctest::Approx(num / den).epsilon(1e-12));
    // Gradient by central differences on the loss itself.
    for (std::size_t i = 0; i < 6; ++i) {
      auto hi = p, lo = p;
      hi.data[i] += 1e-6;
      lo.data[i] -= 1e-6;
      const double fd = (bce(hi, labels, weights).value - bce(lo, labels, weights).value) / 2e-6;
      CHECK(r.grad.data[i] == doctest::Approx(fd).epsilon(1e-5));
    }
    CHECK(std::isfinite(bce(Tensor<double>({1, 1, 1, 1}, 0.0), {1}).value));
    CHECK_THROWS_AS(bce(Tensor<double>({1, 1, 1, 1}, 1.5), {1}), Error);
    CHECK_THROWS_AS(bce(Tensor<double>({2, 1, 1, 1}, 0.5), {1}), Error);

    const auto a = random_tensor<double>({2, 3, 2, 2}, rng);
    const auto b = random_tensor<double>({2, 3, 2, 2}, rng);
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sq += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    CHECK(mse(a, b).value == doctest::Approx(sq / static_cast<double>(a.size())));
    CHECK(mse(a, a).value == 0.0);
    CHECK_THROWS_AS(mse(a, Tensor<double>({1, 3, 2, 2})), Error);
  }

  TEST_CASE("rotation augmentation") {
    perception::Raster r(5, 5);
    Rng rng(6);
    for (auto& v : r.rgba) v = static_cast<std::uint8_t>(rng.below(256));
    CHECK(rotate90(rotate90(rotate90(rotate90(r, 1), 1), 1), 1) == r);
    CHECK(rotate90(r, 2) == rotate90(rotate90(r, 1), 1));
    CHECK(rotate90(r, 0) == r);
    const auto q = rotate90(r, 1);
    for (int row = 0; row < 5; ++row) {
      for (int col = 0; col < 5; ++col) CHECK(q.at(col, 4 - row) == r.at(row, col));
    }
    perception::Raster a = r, b = r;
    std::array<perception::Raster*, 2> both{&a, &b};
    const int k = augment_rotate(both, 3);
    CHECK(k >= 1);
    CHECK(k <= 3);
    CHECK(a == b);
    CHECK(a == rotate90(r, k));
    perception::Raster wide(6, 4);
    std::array<perception::Raster*, 1> one{&wide};
    CHECK_THROWS_AS(augment_rotate(one, 1), Error);

    Tensor<float> t({1, 2, 5, 5});
    for (int c = 0; c < 2; ++c) {
      for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 5; ++col) t.at(0, c, row, col) = static_cast<float>(r.at(row, col)[static_cast<std::size_t>(c)]);
      }
    }
    rotate90_item(t, 0, 1);
    for (int row = 0; row < 5; ++row) {
      for (int col = 0; col < 5; ++col) CHECK(t.at(0, 0, row, col) == static_cast<float>(q.at(row, col)[0]));
    }
  }

  TEST_CASE("checkpoint round-trip") {
    Sequential<float> m(12, 32, 32, models::vpt_architecture(32, 0.25), 21);
    Rng rng(9);
    const auto x = random_tensor<float>(m.input_shape(2), rng, 0, 1);
    const auto y = m.forward(x, false);
    const auto path = std::filesystem::temp_directory_path() / "hideseek_ckpt.hsnn";
    save_checkpoint(m, R"({"kind":"vpt"})", path);
    auto back = load_checkpoint(path);
    CHECK(back.metadata == R"({"kind":"vpt"})");
    CHECK(back.model.specs() == m.specs());
    CHECK(back.model.forward(x, false).data == y.data);
    CHECK(encode_checkpoint(back.model, back.metadata) == encode_checkpoint(m, R"({"kind":"vpt"})"));
    std::filesystem::remove(path);

    auto bytes = encode_checkpoint(m, "{}");
    bytes[1] = 'X';
    try {
      decode_checkpoint(bytes);
      FAIL("expected FormatVersionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::FormatVersionMismatch);
    }
    auto truncated = encode_checkpoint(m, "{}");
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS_AS(decode_checkpoint(truncated), Error);
  }

  TEST_CASE("initialization is seeded") {
    Sequential<float> a(3, 16, 16, models::vpn_architecture(16), 4);
    Sequential<float> b(3, 16, 16, models::vpn_architecture(16), 4);
    Sequential<float> c(3, 16, 16, models::vpn_architecture(16), 5);
    CHECK(encode_checkpoint(a, "") == encode_checkpoint(b, ""));
    CHECK(encode_checkpoint(a, "") != encode_checkpoint(c, ""));
  }
}
