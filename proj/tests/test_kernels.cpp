#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nfpos/kernels.hpp"
#include "nfpos/rng.hpp"
#include "ref/reference.hpp"

using namespace nfpos;

namespace {

std::vector<double> randn(int64_t n, uint64_t seed) {
  std::vector<double> v(static_cast<size_t>(n));
  SplitMix64 rng(seed);
  for (auto& x : v) x = rng.next_gaussian();
  return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(a[i] - b[i]) <= tol * std::max(1.0, std::abs(b[i])));
}

}  // namespace

TEST_CASE("gemm matches reference") {
  const int64_t m = 17, n = 23, k = 31;
  const auto a = randn(m * k, 1);
  const auto b = randn(k * n, 2);
  std::vector<double> c_fast(m * n, 0.5), c_ref(m * n, 0.5);
  kernels::gemm(false, false, m, n, k, 2.0, a.data(), k, b.data(), n, 3.0, c_fast.data(), n);
  ref::gemm_ref(false, false, m, n, k, 2.0, a.data(), k, b.data(), n, 3.0, c_ref.data(), n);
  check_close(c_fast, c_ref, 1e-12);

  // transposed variants
  std::vector<double> ct_fast(m * n, 0.0), ct_ref(m * n, 0.0);
  kernels::gemm(true, false, m, n, k, 1.0, a.data(), m, b.data(), n, 0.0, ct_fast.data(), n);
  ref::gemm_ref(true, false, m, n, k, 1.0, a.data(), m, b.data(), n, 0.0, ct_ref.data(), n);
  check_close(ct_fast, ct_ref, 1e-12);
}

TEST_CASE("conv2d forward matches direct convolution") {
  for (auto [b, c, h, w, oc, k] : std::vector<std::array<int64_t, 6>>{
           {2, 3, 9, 7, 4, 3}, {1, 2, 8, 8, 5, 1}, {2, 2, 11, 11, 1, 7}}) {
    const int64_t pad = k / 2;
    const auto x = randn(b * c * h * w, 10 + k);
    const auto wt = randn(oc * c * k * k, 20 + k);
    const auto bias = randn(oc, 30 + k);
    std::vector<double> y_fast(b * oc * h * w), y_ref(b * oc * h * w);
    kernels::Workspace<double> ws;
    kernels::conv2d_forward(x.data(), wt.data(), bias.data(), y_fast.data(), b, c, h, w, oc, k,
                            k, pad, ws);
    ref::conv2d_forward_ref(x.data(), wt.data(), bias.data(), y_ref.data(), b, c, h, w, oc, k,
                            k, pad);
    check_close(y_fast, y_ref, 1e-12);
  }
}

TEST_CASE("batchnorm training forward matches reference") {
  const int64_t b = 4, c = 3, hw = 25;
  const auto x = randn(b * c * hw, 3);
  const auto gamma = randn(c, 4);
  const auto beta = randn(c, 5);
  std::vector<double> y_fast(b * c * hw), xhat(b * c * hw), y_ref(b * c * hw);
  std::vector<double> rm(c, 0.0), rv(c, 1.0), bm(c), bv(c);
  kernels::batchnorm_forward_train(x.data(), y_fast.data(), xhat.data(), gamma.data(),
                                   beta.data(), rm.data(), rv.data(), bm.data(), bv.data(), b,
                                   c, hw, 0.1, 1e-5);
  ref::batchnorm_forward_train_ref(x.data(), y_ref.data(), gamma.data(), beta.data(), b, c, hw,
                                   1e-5);
  check_close(y_fast, y_ref, 1e-12);

  // running stats after one step from (0,1): 0.9*init + 0.1*batch
  for (int64_t ch = 0; ch < c; ++ch) {
    CHECK(rm[ch] == doctest::Approx(0.1 * bm[ch]).epsilon(1e-12));
    const double unbiased = bv[ch] * (b * hw) / (b * hw - 1.0);
    CHECK(rv[ch] == doctest::Approx(0.9 + 0.1 * unbiased).epsilon(1e-12));
  }

  // eval mode with the same stats is an affine map
  std::vector<double> y_eval(b * c * hw);
  kernels::batchnorm_forward_eval(x.data(), y_eval.data(), gamma.data(), beta.data(),
                                  bm.data(), bv.data(), b, c, hw, 1e-5);
  check_close(y_eval, y_ref, 1e-12);
}

TEST_CASE("maxpool matches reference, even and odd dims") {
  for (auto [h, w] : std::vector<std::array<int64_t, 2>>{{8, 8}, {7, 9}, {5, 5}, {1, 4}}) {
    const int64_t b = 2, c = 3;
    const auto x = randn(b * c * h * w, h * 100 + w);
    const int64_t oh = (h + 1) / 2, ow = (w + 1) / 2;
    std::vector<double> y_fast(b * c * oh * ow), y_ref(b * c * oh * ow);
    std::vector<int32_t> argmax(b * c * oh * ow);
    kernels::maxpool2_forward(x.data(), y_fast.data(), argmax.data(), b, c, h, w);
    ref::maxpool2_forward_ref(x.data(), y_ref.data(), b, c, h, w);
    check_close(y_fast, y_ref, 0.0);
  }
  // pooling a constant tile returns the constant
  std::vector<double> tile(4, 3.5), out(1);
  std::vector<int32_t> am(1);
  kernels::maxpool2_forward(tile.data(), out.data(), am.data(), 1, 1, 2, 2);
  CHECK(out[0] == 3.5);
}

TEST_CASE("linear matches reference") {
  const int64_t b = 5, in = 13, out = 7;
  const auto x = randn(b * in, 6);
  const auto w = randn(out * in, 7);
  const auto bias = randn(out, 8);
  std::vector<double> y_fast(b * out), y_ref(b * out);
  kernels::linear_forward(x.data(), w.data(), bias.data(), y_fast.data(), b, in, out);
  ref::linear_forward_ref(x.data(), w.data(), bias.data(), y_ref.data(), b, in, out);
  check_close(y_fast, y_ref, 1e-12);
}

TEST_CASE("global pools") {
  const int64_t b = 2, c = 3, hw = 10;
  const auto x = randn(b * c * hw, 9);
  std::vector<double> avg(b * c), mx(b * c);
  std::vector<int32_t> am(b * c);
  kernels::global_avgpool_forward(x.data(), avg.data(), b, c, hw);
  kernels::global_maxpool_forward(x.data(), mx.data(), am.data(), b, c, hw);
  for (int64_t sc = 0; sc < b * c; ++sc) {
    double acc = 0.0, best = -1e300;
    for (int64_t i = 0; i < hw; ++i) {
      acc += x[static_cast<size_t>(sc * hw + i)];
      best = std::max(best, x[static_cast<size_t>(sc * hw + i)]);
    }
    CHECK(avg[static_cast<size_t>(sc)] == doctest::Approx(acc / hw).epsilon(1e-14));
    CHECK(mx[static_cast<size_t>(sc)] == best);
    CHECK(x[static_cast<size_t>(sc * hw + am[static_cast<size_t>(sc)])] == best);
  }
}

TEST_CASE("relu and sigmoid") {
  const std::vector<double> x = {-2.0, -0.0, 0.5, 3.0};
  std::vector<double> y(4);
  std::vector<uint8_t> mask(4);
  kernels::relu_forward(x.data(), y.data(), mask.data(), 4);
  CHECK(y == std::vector<double>{0.0, 0.0, 0.5, 3.0});
  std::vector<double> dy = {1.0, 1.0, 1.0, 1.0}, dx(4);
  kernels::relu_backward(dy.data(), mask.data(), dx.data(), 4);
  CHECK(dx == std::vector<double>{0.0, 0.0, 1.0, 1.0});

  std::vector<double> s(4);
  kernels::sigmoid_forward(x.data(), s.data(), 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(s[static_cast<size_t>(i)] ==
          doctest::Approx(1.0 / (1.0 + std::exp(-x[static_cast<size_t>(i)]))).epsilon(1e-14));
    CHECK(s[static_cast<size_t>(i)] > 0.0);
    CHECK(s[static_cast<size_t>(i)] < 1.0);
  }
}

TEST_CASE("adam step matches a hand-computed update") {
  // two parameters, one step: m = 0.1 g, v = 0.001 g^2,
  // mhat = m / 0.1 = g, vhat = v / 0.001 = g^2,
  // p -= lr * g / (|g| + eps)
  std::vector<double> p = {1.0, -2.0};
  const std::vector<double> g = {0.5, -1.5};
  std::vector<double> m(2, 0.0), v(2, 0.0);
  const double lr = 3e-4, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  kernels::adam_step(p.data(), g.data(), m.data(), v.data(), 2, lr, b1, b2, eps, 1);

  for (int i = 0; i < 2; ++i) {
    const double gi = g[static_cast<size_t>(i)];
    const double mi = (1 - b1) * gi;
    const double vi = (1 - b2) * gi * gi;
    const double expect = (i == 0 ? 1.0 : -2.0) -
                          lr * (mi / (1 - b1)) / (std::sqrt(vi / (1 - b2)) + eps);
    CHECK(p[static_cast<size_t>(i)] == doctest::Approx(expect).epsilon(1e-10));
    CHECK(m[static_cast<size_t>(i)] == doctest::Approx(mi).epsilon(1e-12));
    CHECK(v[static_cast<size_t>(i)] == doctest::Approx(vi).epsilon(1e-12));
  }

  // second step continues the moment recursion
  std::vector<double> p2 = p;
  kernels::adam_step(p2.data(), g.data(), m.data(), v.data(), 2, lr, b1, b2, eps, 2);
  for (int i = 0; i < 2; ++i) {
    const double gi = g[static_cast<size_t>(i)];
    const double m2 = b1 * (1 - b1) * gi + (1 - b1) * gi;
    const double v2 = b2 * (1 - b2) * gi * gi + (1 - b2) * gi * gi;
    const double expect = p[static_cast<size_t>(i)] -
                          lr * (m2 / (1 - b1 * b1)) / (std::sqrt(v2 / (1 - b2 * b2)) + eps);
    CHECK(p2[static_cast<size_t>(i)] == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("col2im is the adjoint of im2col") {
  // <im2col(x), c> == <x, col2im(c)> for random x, c
  const int64_t c = 2, h = 6, w = 5, k = 3, pad = 1;
  const auto x = randn(c * h * w, 21);
  const auto cmat = randn(c * k * k * h * w, 22);
  std::vector<double> col(static_cast<size_t>(c * k * k * h * w));
  kernels::im2col(x.data(), c, h, w, k, k, pad, col.data());
  double lhs = 0.0;
  for (size_t i = 0; i < col.size(); ++i) lhs += col[i] * cmat[i];
  std::vector<double> back(static_cast<size_t>(c * h * w), 0.0);
  kernels::col2im(cmat.data(), c, h, w, k, k, pad, back.data());
  double rhs = 0.0;
  for (size_t i = 0; i < back.size(); ++i) rhs += back[i] * x[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}
