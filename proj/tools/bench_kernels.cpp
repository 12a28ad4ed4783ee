// Times the OpenMP/BLAS kernels against the serial reference loops on the
// layer shapes the positioning network actually uses. Thread count follows
// OMP_NUM_THREADS.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "nfpos/kernels.hpp"
#include "nfpos/rng.hpp"
#include "ref/reference.hpp"

using namespace nfpos;

namespace {

std::vector<float> randn(int64_t n, uint64_t seed) {
  std::vector<float> v(static_cast<size_t>(n));
  SplitMix64 rng(seed);
  for (auto& x : v) x = static_cast<float>(rng.next_gaussian());
  return v;
}

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, double gflop) {
  std::printf("%-34s %10.4fs %10.4fs %8.2fx %9.1f GF/s\n", name, serial_s, parallel_s,
              serial_s / parallel_s, gflop / parallel_s);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-34s %11s %11s %9s %11s\n", "kernel", "serial", "parallel", "speedup",
              "throughput");

  // conv2d 3x3, the dominant cost of the network
  {
    const int64_t b = 8, c = 32, h = 64, w = 64, oc = 32, k = 3;
    const auto x = randn(b * c * h * w, 1);
    const auto wt = randn(oc * c * k * k, 2);
    const auto bias = randn(oc, 3);
    std::vector<float> y(static_cast<size_t>(b * oc * h * w));
    kernels::Workspace<float> ws;
    const double serial = time_best_of(2, [&] {
      ref::conv2d_forward_ref(x.data(), wt.data(), bias.data(), y.data(), b, c, h, w, oc, k, k,
                              1);
    });
    const double par = time_best_of(5, [&] {
      kernels::conv2d_forward(x.data(), wt.data(), bias.data(), y.data(), b, c, h, w, oc, k, k,
                              1, ws);
    });
    report("conv2d 3x3 8x32x64x64 -> 32", serial, par,
           2.0 * b * c * h * w * oc * k * k / 1e9);
  }

  // conv2d backward (im2col + two GEMMs per sample)
  {
    const int64_t b = 8, c = 32, h = 64, w = 64, oc = 32, k = 3;
    const auto x = randn(b * c * h * w, 4);
    const auto wt = randn(oc * c * k * k, 5);
    const auto dy = randn(b * oc * h * w, 6);
    std::vector<float> dx(static_cast<size_t>(b * c * h * w));
    std::vector<float> dw(static_cast<size_t>(oc * c * k * k));
    std::vector<float> db(static_cast<size_t>(oc));
    kernels::Workspace<float> ws;
    const double par = time_best_of(3, [&] {
      std::fill(dw.begin(), dw.end(), 0.0f);
      std::fill(db.begin(), db.end(), 0.0f);
      kernels::conv2d_backward(x.data(), wt.data(), dy.data(), dx.data(), dw.data(), db.data(),
                               b, c, h, w, oc, k, k, 1, ws);
    });
    std::printf("%-34s %11s %10.4fs %9s %9.1f GF/s\n", "conv2d 3x3 backward", "-", par, "-",
                3.0 * 2.0 * b * c * h * w * oc * k * k / 1e9 / par);
  }

  // batch norm over the input-block activation shape
  {
    const int64_t b = 32, c = 64, hw = 64 * 64;
    const auto x = randn(b * c * hw, 7);
    const auto gamma = randn(c, 8);
    const auto beta = randn(c, 9);
    std::vector<float> y(static_cast<size_t>(b * c * hw)), xhat(y.size());
    std::vector<float> rm(c, 0), rv(c, 1), bm(c), bv(c);
    const double serial = time_best_of(3, [&] {
      ref::batchnorm_forward_train_ref(x.data(), y.data(), gamma.data(), beta.data(), b, c, hw,
                                       1e-5f);
    });
    const double par = time_best_of(5, [&] {
      kernels::batchnorm_forward_train(x.data(), y.data(), xhat.data(), gamma.data(),
                                       beta.data(), rm.data(), rv.data(), bm.data(), bv.data(),
                                       b, c, hw, 0.1f, 1e-5f);
    });
    report("batchnorm train 32x64x64x64", serial, par, 6.0 * b * c * hw / 1e9);
  }

  // max pooling
  {
    const int64_t b = 32, c = 64, h = 64, w = 64;
    const auto x = randn(b * c * h * w, 10);
    std::vector<float> y(static_cast<size_t>(b * c * 32 * 32));
    std::vector<int32_t> am(y.size());
    const double serial =
        time_best_of(3, [&] { ref::maxpool2_forward_ref(x.data(), y.data(), b, c, h, w); });
    const double par = time_best_of(5, [&] {
      kernels::maxpool2_forward(x.data(), y.data(), am.data(), b, c, h, w);
    });
    report("maxpool 2x2 32x64x64x64", serial, par, 4.0 * b * c * 32 * 32 / 1e9);
  }

  // dense head
  {
    const int64_t b = 32, in = 32768, out = 128;
    const auto x = randn(b * in, 11);
    const auto w = randn(out * in, 12);
    const auto bias = randn(out, 13);
    std::vector<float> y(static_cast<size_t>(b * out));
    const double serial = time_best_of(2, [&] {
      ref::linear_forward_ref(x.data(), w.data(), bias.data(), y.data(), b, in, out);
    });
    const double par = time_best_of(5, [&] {
      kernels::linear_forward(x.data(), w.data(), bias.data(), y.data(), b, in, out);
    });
    report("linear 32x32768 -> 128", serial, par, 2.0 * b * in * out / 1e9);
  }

  return 0;
}
