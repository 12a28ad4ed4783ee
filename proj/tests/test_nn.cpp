#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "nfpos/nn.hpp"

using namespace nfpos;
using namespace nfpos::nn;

namespace {

Tensor<double> random_tensor(std::vector<int64_t> shape, uint64_t seed, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  SplitMix64 rng(seed);
  for (auto& v : t.data) v = rng.next_gaussian() * scale;
  return t;
}

// Central finite-difference check of dLoss/dTheta for a scalar loss
// L = sum(r * f(x)). The analytic gradient must already be computed.
struct GradCheck {
  std::function<const Tensor<double>&()> run_forward;  // train-mode forward
  Tensor<double> projection;                           // r, same shape as output

  double loss() {
    const Tensor<double>& y = run_forward();
    double acc = 0.0;
    for (int64_t i = 0; i < y.numel(); ++i) acc += projection[i] * y[i];
    return acc;
  }

  // Compares a sampled subset of coordinates of `value` against `analytic`.
  void check_tensor(Tensor<double>& value, const Tensor<double>& analytic, uint64_t seed,
                    int max_coords, double tol = 1e-3) {
    SplitMix64 rng(seed);
    const int64_t n = value.numel();
    const int coords = static_cast<int>(std::min<int64_t>(n, max_coords));
    for (int c = 0; c < coords; ++c) {
      const int64_t i = static_cast<int64_t>(rng.next_u64() % static_cast<uint64_t>(n));
      const double keep = value[i];
      const double h = 1e-5;
      value[i] = keep + h;
      const double up = loss();
      value[i] = keep - h;
      const double down = loss();
      value[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      const double a = analytic[i];
      const double denom = std::max(1e-6, std::abs(fd) + std::abs(a));
      CHECK(std::abs(fd - a) / denom < tol);
    }
  }
};

}  // namespace

TEST_CASE("channel attention forward properties") {
  const int64_t b = 2, c = 6, cr = 2, h = 4, w = 4;
  ChannelAttention<double> ca;
  ca.configure(c, cr);
  SplitMix64 rng(1);
  ca.init(rng);

  SUBCASE("spatially constant input: gap equals gmp, logits double one path") {
    Tensor<double> x({b, c, h, w});
    SplitMix64 vals(2);
    for (int64_t s = 0; s < b; ++s)
      for (int64_t ch = 0; ch < c; ++ch) {
        const double v = vals.next_gaussian();
        for (int64_t i = 0; i < h * w; ++i) x.ptr()[(s * c + ch) * h * w + i] = v;
      }
    ca.forward(x, false);
    for (int64_t i = 0; i < b * c; ++i)
      CHECK(ca.pooled_avg()[i] == doctest::Approx(ca.pooled_max()[i]).epsilon(1e-12));
  }

  SUBCASE("zero weights give a 0.5 gate") {
    ca.w1.fill(0.0);
    ca.b1.fill(0.0);
    ca.w2.fill(0.0);
    ca.b2.fill(0.0);
    const Tensor<double> x = random_tensor({b, c, h, w}, 3);
    const Tensor<double>& y = ca.forward(x, false);
    for (int64_t i = 0; i < x.numel(); ++i)
      CHECK(y[i] == doctest::Approx(0.5 * x[i]).epsilon(1e-12));
  }

  SUBCASE("gate applies per channel, entries strictly inside (0,1)") {
    const Tensor<double> x = random_tensor({b, c, h, w}, 4);
    const Tensor<double>& y = ca.forward(x, false);
    const Tensor<double>& a = ca.attention();
    for (int64_t s = 0; s < b; ++s)
      for (int64_t ch = 0; ch < c; ++ch) {
        const double g = a.at2(s, ch);
        CHECK(g > 0.0);
        CHECK(g < 1.0);
        for (int64_t i = 0; i < h * w; ++i)
          CHECK(y.ptr()[(s * c + ch) * h * w + i] ==
                doctest::Approx(g * x.ptr()[(s * c + ch) * h * w + i]).epsilon(1e-12));
      }
  }
}

TEST_CASE("spatial attention forward properties") {
  const int64_t b = 2, c = 5, h = 6, w = 6;
  SpatialAttention<double> sa;
  sa.configure(7);
  SplitMix64 rng(5);
  sa.init(rng);

  SUBCASE("channel-constant input: mean plane equals max plane") {
    Tensor<double> x({b, c, h, w});
    SplitMix64 vals(6);
    for (int64_t s = 0; s < b; ++s)
      for (int64_t i = 0; i < h * w; ++i) {
        const double v = vals.next_gaussian();
        for (int64_t ch = 0; ch < c; ++ch) x.ptr()[(s * c + ch) * h * w + i] = v;
      }
    sa.forward(x, false);
    const Tensor<double>& planes = sa.pooled_planes();
    for (int64_t s = 0; s < b; ++s)
      for (int64_t i = 0; i < h * w; ++i)
        CHECK(planes.ptr()[s * 2 * h * w + i] ==
              doctest::Approx(planes.ptr()[s * 2 * h * w + h * w + i]).epsilon(1e-12));
  }

  SUBCASE("zero conv gives a 0.5 gate") {
    sa.conv.w.fill(0.0);
    sa.conv.b.fill(0.0);
    const Tensor<double> x = random_tensor({b, c, h, w}, 7);
    const Tensor<double>& y = sa.forward(x, false);
    for (int64_t i = 0; i < x.numel(); ++i)
      CHECK(y[i] == doctest::Approx(0.5 * x[i]).epsilon(1e-12));
  }

  SUBCASE("gate applies per pixel across channels, entries in (0,1)") {
    const Tensor<double> x = random_tensor({b, c, h, w}, 8);
    const Tensor<double>& y = sa.forward(x, false);
    const Tensor<double>& a = sa.attention();
    for (int64_t s = 0; s < b; ++s)
      for (int64_t i = 0; i < h * w; ++i) {
        const double g = a.ptr()[s * h * w + i];
        CHECK(g > 0.0);
        CHECK(g < 1.0);
        for (int64_t ch = 0; ch < c; ++ch)
          CHECK(y.ptr()[(s * c + ch) * h * w + i] ==
                doctest::Approx(g * x.ptr()[(s * c + ch) * h * w + i]).epsilon(1e-12));
      }
  }
}

TEST_CASE("residual block with zeroed convolutions is relu(x)") {
  ResidualBlock<double> block;
  block.configure(3);
  SplitMix64 rng(9);
  block.init(rng);
  block.conv1.w.fill(0.0);
  block.conv2.w.fill(0.0);
  const Tensor<double> x = random_tensor({2, 3, 4, 4}, 10);
  const Tensor<double>& y = block.forward(x, true);
  for (int64_t i = 0; i < x.numel(); ++i) CHECK(y[i] == std::max(0.0, x[i]));
}

TEST_CASE("cbr chain maps zero input to zero output") {
  CbrUnit<double> a, bunit;
  a.configure(2, 4, 3, 1);
  bunit.configure(4, 4, 3, 1);
  SplitMix64 rng(11);
  a.init(rng);
  bunit.init(rng);
  Tensor<double> x({2, 2, 5, 5});
  x.fill(0.0);
  const Tensor<double>& y = bunit.forward(a.forward(x, true), true);
  for (int64_t i = 0; i < y.numel(); ++i) CHECK(y[i] == 0.0);
}

TEST_CASE("conv unit output shape and scalar oracle on 1x1 spatial input") {
  // 1x1 spatial plane with 3x3 kernel: only the kernel center contributes
  Conv2d<double> conv;
  conv.configure(2, 3, 3, 1);
  SplitMix64 rng(12);
  conv.init(rng);
  Tensor<double> x({1, 2, 1, 1});
  x[0] = 0.7;
  x[1] = -1.3;
  const Tensor<double>& y = conv.forward(x, false);
  REQUIRE(y.shape == std::vector<int64_t>{1, 3, 1, 1});
  for (int64_t o = 0; o < 3; ++o) {
    const double w_center0 = conv.w.at2(o, 0 * 9 + 4);
    const double w_center1 = conv.w.at2(o, 1 * 9 + 4);
    CHECK(y[o] == doctest::Approx(0.7 * w_center0 - 1.3 * w_center1 + conv.b[o]).epsilon(1e-12));
  }
}

TEST_CASE("gradient check: channel attention") {
  const int64_t b = 2, c = 4, cr = 2, h = 8, w = 8;
  ChannelAttention<double> ca;
  ca.configure(c, cr);
  SplitMix64 rng(13);
  ca.init(rng);
  // nonzero biases exercise every term
  for (auto& v : ca.b1.data) v = 0.05;
  for (auto& v : ca.b2.data) v = -0.03;

  Tensor<double> x = random_tensor({b, c, h, w}, 14);
  GradCheck gc;
  gc.projection = random_tensor({b, c, h, w}, 15);
  gc.run_forward = [&]() -> const Tensor<double>& { return ca.forward(x, true); };

  gc.loss();  // populate caches
  ca.dw1.fill(0.0);
  ca.db1.fill(0.0);
  ca.dw2.fill(0.0);
  ca.db2.fill(0.0);
  const Tensor<double> dx = ca.backward(gc.projection);

  gc.check_tensor(x, dx, 100, 40);
  gc.check_tensor(ca.w1, ca.dw1, 101, 20);
  gc.check_tensor(ca.b1, ca.db1, 102, 8);
  gc.check_tensor(ca.w2, ca.dw2, 103, 20);
  gc.check_tensor(ca.b2, ca.db2, 104, 8);
}

TEST_CASE("gradient check: spatial attention") {
  const int64_t b = 2, c = 4, h = 8, w = 8;
  SpatialAttention<double> sa;
  sa.configure(7);
  SplitMix64 rng(16);
  sa.init(rng);
  for (auto& v : sa.conv.b.data) v = 0.02;

  Tensor<double> x = random_tensor({b, c, h, w}, 17);
  GradCheck gc;
  gc.projection = random_tensor({b, c, h, w}, 18);
  gc.run_forward = [&]() -> const Tensor<double>& { return sa.forward(x, true); };

  gc.loss();
  sa.conv.dw.fill(0.0);
  sa.conv.db.fill(0.0);
  const Tensor<double> dx = sa.backward(gc.projection);

  gc.check_tensor(x, dx, 200, 40);
  gc.check_tensor(sa.conv.w, sa.conv.dw, 201, 30);
  gc.check_tensor(sa.conv.b, sa.conv.db, 202, 1);
}

TEST_CASE("gradient check: residual block (with batch norm)") {
  const int64_t b = 2, c = 4, h = 8, w = 8;
  ResidualBlock<double> block;
  block.configure(c);
  SplitMix64 rng(19);
  block.init(rng);

  Tensor<double> x = random_tensor({b, c, h, w}, 20);
  GradCheck gc;
  gc.projection = random_tensor({b, c, h, w}, 21);
  gc.run_forward = [&]() -> const Tensor<double>& { return block.forward(x, true); };

  gc.loss();
  ParamRegistry<double> reg;
  block.collect(reg, "res");
  for (auto& p : reg) p.grad->fill(0.0);
  const Tensor<double> dx = block.backward(gc.projection);

  gc.check_tensor(x, dx, 300, 40);
  for (size_t i = 0; i < reg.size(); ++i)
    gc.check_tensor(*reg[i].value, *reg[i].grad, 400 + i, 15);
}

TEST_CASE("gradient check: mlp regression head") {
  const int64_t b = 3, c = 4, h = 2, w = 2;
  MlpHead<double> head;
  head.configure({c * h * w, 8, 8, 2});
  SplitMix64 rng(22);
  head.init(rng);

  Tensor<double> x = random_tensor({b, c, h, w}, 23);
  GradCheck gc;
  gc.projection = random_tensor({b, 2}, 24);
  gc.run_forward = [&]() -> const Tensor<double>& { return head.forward(x, true); };

  gc.loss();
  ParamRegistry<double> reg;
  head.collect(reg, "mlp");
  for (auto& p : reg) p.grad->fill(0.0);
  const Tensor<double> dx = head.backward(gc.projection);
  REQUIRE(dx.shape == x.shape);

  gc.check_tensor(x, dx, 500, 30);
  for (size_t i = 0; i < reg.size(); ++i)
    gc.check_tensor(*reg[i].value, *reg[i].grad, 600 + i, 15);
}

TEST_CASE("gradient check: cbr unit and pooling composite") {
  const int64_t b = 2, c = 3, h = 6, w = 6;
  CbrUnit<double> cbr;
  cbr.configure(c, 4, 3, 1);
  SplitMix64 rng(25);
  cbr.init(rng);
  MaxPool2<double> pool;

  Tensor<double> x = random_tensor({b, c, h, w}, 26);
  GradCheck gc;
  gc.projection = random_tensor({b, 4, 3, 3}, 27);
  gc.run_forward = [&]() -> const Tensor<double>& {
    return pool.forward(cbr.forward(x, true));
  };

  gc.loss();
  ParamRegistry<double> reg;
  cbr.collect(reg, "cbr");
  for (auto& p : reg) p.grad->fill(0.0);
  const Tensor<double> dx = cbr.backward(pool.backward(gc.projection));

  gc.check_tensor(x, dx, 700, 40);
  for (size_t i = 0; i < reg.size(); ++i)
    gc.check_tensor(*reg[i].value, *reg[i].grad, 800 + i, 12);
}

TEST_CASE("mlp head rejects bad widths") {
  MlpHead<double> head;
  CHECK_THROWS_AS(head.configure({4}), ConfigError);
  Linear<double> lin;
  lin.configure(4, 2);
  SplitMix64 rng(1);
  lin.init(rng);
  Tensor<double> bad({2, 5});
  CHECK_THROWS_AS(lin.forward(bad, false), ShapeError);
}
