#ifndef NFPOS_REF_REFERENCE_HPP
#define NFPOS_REF_REFERENCE_HPP

#include <complex>
#include <cstdint>
#include <vector>

// Serial reference implementations of the parallel kernels: plain nested
// loops, no BLAS, no im2col, no OpenMP. Tests check the fast paths against
// these and tools/bench_kernels times the two side by side. Keep this code
// obvious rather than fast.
namespace nfpos::ref {

template <typename T>
void gemm_ref(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha, const T* a,
              int64_t lda, const T* b, int64_t ldb, T beta, T* c, int64_t ldc) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (int64_t p = 0; p < k; ++p) {
        const T av = trans_a ? a[p * lda + i] : a[i * lda + p];
        const T bv = trans_b ? b[j * ldb + p] : b[p * ldb + j];
        acc += av * bv;
      }
      c[i * ldc + j] = alpha * acc + beta * c[i * ldc + j];
    }
  }
}

// x [B,C,H,W], w [OC,C,KH,KW], y [B,OC,H,W]; stride 1, zero padding.
template <typename T>
void conv2d_forward_ref(const T* x, const T* w, const T* bias, T* y, int64_t b, int64_t c,
                        int64_t h, int64_t wd, int64_t oc, int64_t kh, int64_t kw,
                        int64_t pad) {
  for (int64_t s = 0; s < b; ++s) {
    for (int64_t o = 0; o < oc; ++o) {
      for (int64_t i = 0; i < h; ++i) {
        for (int64_t j = 0; j < wd; ++j) {
          T acc = bias ? bias[o] : T(0);
          for (int64_t ch = 0; ch < c; ++ch) {
            for (int64_t ki = 0; ki < kh; ++ki) {
              for (int64_t kj = 0; kj < kw; ++kj) {
                const int64_t ii = i + ki - pad;
                const int64_t jj = j + kj - pad;
                if (ii < 0 || ii >= h || jj < 0 || jj >= wd) continue;
                acc += x[((s * c + ch) * h + ii) * wd + jj] *
                       w[((o * c + ch) * kh + ki) * kw + kj];
              }
            }
          }
          y[((s * oc + o) * h + i) * wd + j] = acc;
        }
      }
    }
  }
}

template <typename T>
void batchnorm_forward_train_ref(const T* x, T* y, const T* gamma, const T* beta, int64_t b,
                                 int64_t c, int64_t hw, T eps) {
  for (int64_t ch = 0; ch < c; ++ch) {
    T sum = T(0);
    for (int64_t s = 0; s < b; ++s)
      for (int64_t i = 0; i < hw; ++i) sum += x[(s * c + ch) * hw + i];
    const T mean = sum / T(b * hw);
    T var = T(0);
    for (int64_t s = 0; s < b; ++s)
      for (int64_t i = 0; i < hw; ++i) {
        const T d = x[(s * c + ch) * hw + i] - mean;
        var += d * d;
      }
    var /= T(b * hw);
    for (int64_t s = 0; s < b; ++s)
      for (int64_t i = 0; i < hw; ++i) {
        const int64_t idx = (s * c + ch) * hw + i;
        y[idx] = gamma[ch] * (x[idx] - mean) / std::sqrt(var + eps) + beta[ch];
      }
  }
}

// 2x2 stride-2 max pool, ceil semantics.
template <typename T>
void maxpool2_forward_ref(const T* x, T* y, int64_t b, int64_t c, int64_t h, int64_t w) {
  const int64_t oh = (h + 1) / 2, ow = (w + 1) / 2;
  for (int64_t sc = 0; sc < b * c; ++sc) {
    for (int64_t i = 0; i < oh; ++i) {
      for (int64_t j = 0; j < ow; ++j) {
        T best = x[sc * h * w + 2 * i * w + 2 * j];
        for (int64_t di = 0; di < 2; ++di)
          for (int64_t dj = 0; dj < 2; ++dj) {
            const int64_t ii = 2 * i + di, jj = 2 * j + dj;
            if (ii >= h || jj >= w) continue;
            best = std::max(best, x[sc * h * w + ii * w + jj]);
          }
        y[sc * oh * ow + i * ow + j] = best;
      }
    }
  }
}

template <typename T>
void linear_forward_ref(const T* x, const T* w, const T* bias, T* y, int64_t b, int64_t in,
                        int64_t out) {
  for (int64_t s = 0; s < b; ++s) {
    for (int64_t o = 0; o < out; ++o) {
      T acc = bias ? bias[o] : T(0);
      for (int64_t i = 0; i < in; ++i) acc += x[s * in + i] * w[o * in + i];
      y[s * out + o] = acc;
    }
  }
}

// Element-by-element covariance accumulation: (1/K) sum_k y_k y_k^H.
inline std::vector<std::complex<double>> sample_covariance_ref(
    const std::vector<std::complex<double>>& rows, int64_t k, int64_t n) {
  std::vector<std::complex<double>> rc(static_cast<size_t>(n * n), {0.0, 0.0});
  for (int64_t s = 0; s < k; ++s)
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < n; ++j)
        rc[static_cast<size_t>(i * n + j)] +=
            rows[static_cast<size_t>(s * n + i)] * std::conj(rows[static_cast<size_t>(s * n + j)]);
  for (auto& v : rc) v /= static_cast<double>(k);
  return rc;
}

}  // namespace nfpos::ref

#endif
