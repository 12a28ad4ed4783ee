#include "nfpos/kernels.hpp"

#include <cblas.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <mutex>

extern "C" void openblas_set_num_threads(int);

namespace nfpos::kernels {

namespace {

// Batch-level OpenMP parallelism owns the threads; BLAS stays serial.
void pin_blas_single_thread() {
  static std::once_flag flag;
  std::call_once(flag, [] { openblas_set_num_threads(1); });
}

inline void cblas_gemm_dispatch(bool ta, bool tb, int m, int n, int k, float alpha,
                                const float* a, int lda, const float* b, int ldb, float beta,
                                float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans,
              m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

inline void cblas_gemm_dispatch(bool ta, bool tb, int m, int n, int k, double alpha,
                                const double* a, int lda, const double* b, int ldb,
                                double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans,
              m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

}  // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha, const T* a,
          int64_t lda, const T* b, int64_t ldb, T beta, T* c, int64_t ldc) {
  pin_blas_single_thread();
  cblas_gemm_dispatch(trans_a, trans_b, static_cast<int>(m), static_cast<int>(n),
                      static_cast<int>(k), alpha, a, static_cast<int>(lda), b,
                      static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

template <typename T>
void im2col(const T* x, int64_t c, int64_t h, int64_t w, int64_t kh, int64_t kw, int64_t pad,
            T* col) {
  const int64_t hw = h * w;
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int64_t ki = 0; ki < kh; ++ki) {
      for (int64_t kj = 0; kj < kw; ++kj) {
        T* dst = col + ((ch * kh + ki) * kw + kj) * hw;
        const int64_t di = ki - pad, dj = kj - pad;
        for (int64_t i = 0; i < h; ++i) {
          const int64_t si = i + di;
          if (si < 0 || si >= h) {
            std::fill(dst + i * w, dst + (i + 1) * w, T(0));
            continue;
          }
          const T* src = x + ch * hw + si * w;
          const int64_t j_lo = std::max<int64_t>(0, -dj);
          const int64_t j_hi = std::min<int64_t>(w, w - dj);
          if (j_lo > 0) std::fill(dst + i * w, dst + i * w + j_lo, T(0));
          for (int64_t j = j_lo; j < j_hi; ++j) dst[i * w + j] = src[j + dj];
          if (j_hi < w) std::fill(dst + i * w + j_hi, dst + (i + 1) * w, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, int64_t c, int64_t h, int64_t w, int64_t kh, int64_t kw, int64_t pad,
            T* x) {
  const int64_t hw = h * w;
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int64_t ki = 0; ki < kh; ++ki) {
      for (int64_t kj = 0; kj < kw; ++kj) {
        const T* src = col + ((ch * kh + ki) * kw + kj) * hw;
        const int64_t di = ki - pad, dj = kj - pad;
        for (int64_t i = 0; i < h; ++i) {
          const int64_t si = i + di;
          if (si < 0 || si >= h) continue;
          T* dst = x + ch * hw + si * w;
          const int64_t j_lo = std::max<int64_t>(0, -dj);
          const int64_t j_hi = std::min<int64_t>(w, w - dj);
          for (int64_t j = j_lo; j < j_hi; ++j) dst[j + dj] += src[i * w + j];
        }
      }
    }
  }
}

template <typename T>
void conv2d_forward(const T* x, const T* w, const T* bias, T* y, int64_t b, int64_t c,
                    int64_t h, int64_t w_dim, int64_t oc, int64_t kh, int64_t kw, int64_t pad,
                    Workspace<T>& ws) {
  const int64_t hw = h * w_dim;
  const int64_t ckk = c * kh * kw;
  const int64_t nthreads = omp_get_max_threads();
  ws.col.resize(static_cast<size_t>(nthreads * ckk * hw));

#pragma omp parallel for schedule(static)
  for (int64_t s = 0; s < b; ++s) {
    T* col = ws.col.data() + omp_get_thread_num() * ckk * hw;
    im2col(x + s * c * hw, c, h, w_dim, kh, kw, pad, col);
    T* ys = y + s * oc * hw;
    gemm<T>(false, false, oc, hw, ckk, T(1), w, ckk, col, hw, T(0), ys, hw);
    if (bias) {
      for (int64_t o = 0; o < oc; ++o) {
        const T bo = bias[o];
        T* row = ys + o * hw;
        for (int64_t i = 0; i < hw; ++i) row[i] += bo;
      }
    }
  }
}

template <typename T>
void conv2d_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, int64_t b,
                     int64_t c, int64_t h, int64_t w_dim, int64_t oc, int64_t kh, int64_t kw,
                     int64_t pad, Workspace<T>& ws) {
  const int64_t hw = h * w_dim;
  const int64_t ckk = c * kh * kw;
  const int64_t wsize = oc * ckk;
  const int64_t nthreads = omp_get_max_threads();
  ws.col.resize(static_cast<size_t>(nthreads * ckk * hw));
  ws.mat.assign(static_cast<size_t>(nthreads * wsize), T(0));

#pragma omp parallel for schedule(static)
  for (int64_t s = 0; s < b; ++s) {
    const int tid = omp_get_thread_num();
    T* col = ws.col.data() + tid * ckk * hw;
    T* dw_part = ws.mat.data() + tid * wsize;
    const T* dys = dy + s * oc * hw;

    im2col(x + s * c * hw, c, h, w_dim, kh, kw, pad, col);
    // dW partial: dy [OC,HW] x col^T [HW,CKK]
    gemm<T>(false, true, oc, ckk, hw, T(1), dys, hw, col, hw, T(1), dw_part, ckk);

    if (dx) {
      // reuse col as the gradient column buffer: w^T [CKK,OC] x dy [OC,HW]
      gemm<T>(true, false, ckk, hw, oc, T(1), w, ckk, dys, hw, T(0), col, hw);
      T* dxs = dx + s * c * hw;
      std::fill(dxs, dxs + c * hw, T(0));
      col2im(col, c, h, w_dim, kh, kw, pad, dxs);
    }
  }

  // Fixed thread-order reduction keeps the accumulation deterministic.
  for (int64_t t = 0; t < nthreads; ++t) {
    const T* part = ws.mat.data() + t * wsize;
    for (int64_t i = 0; i < wsize; ++i) dw[i] += part[i];
  }
  if (db) {
    for (int64_t s = 0; s < b; ++s) {
      const T* dys = dy + s * oc * hw;
      for (int64_t o = 0; o < oc; ++o) {
        T acc = T(0);
        const T* row = dys + o * hw;
        for (int64_t i = 0; i < hw; ++i) acc += row[i];
        db[o] += acc;
      }
    }
  }
}

template <typename T>
void batchnorm_forward_train(const T* x, T* y, T* xhat, const T* gamma, const T* beta,
                             T* running_mean, T* running_var, T* batch_mean, T* batch_var,
                             int64_t b, int64_t c, int64_t hw, T momentum, T eps) {
  const int64_t m = b * hw;
#pragma omp parallel for schedule(static)
  for (int64_t ch = 0; ch < c; ++ch) {
    T sum = T(0), sq = T(0);
    for (int64_t s = 0; s < b; ++s) {
      const T* px = x + (s * c + ch) * hw;
      for (int64_t i = 0; i < hw; ++i) {
        sum += px[i];
        sq += px[i] * px[i];
      }
    }
    const T mean = sum / T(m);
    T var = sq / T(m) - mean * mean;
    if (var < T(0)) var = T(0);
    batch_mean[ch] = mean;
    batch_var[ch] = var;
    const T unbiased = m > 1 ? var * T(m) / T(m - 1) : var;
    running_mean[ch] = (T(1) - momentum) * running_mean[ch] + momentum * mean;
    running_var[ch] = (T(1) - momentum) * running_var[ch] + momentum * unbiased;

    const T inv_std = T(1) / std::sqrt(var + eps);
    const T g = gamma[ch], bt = beta[ch];
    for (int64_t s = 0; s < b; ++s) {
      const T* px = x + (s * c + ch) * hw;
      T* ph = xhat + (s * c + ch) * hw;
      T* py = y + (s * c + ch) * hw;
      for (int64_t i = 0; i < hw; ++i) {
        const T xh = (px[i] - mean) * inv_std;
        ph[i] = xh;
        py[i] = g * xh + bt;
      }
    }
  }
}

template <typename T>
void batchnorm_forward_eval(const T* x, T* y, const T* gamma, const T* beta,
                            const T* running_mean, const T* running_var, int64_t b, int64_t c,
                            int64_t hw, T eps) {
#pragma omp parallel for schedule(static) collapse(2)
  for (int64_t s = 0; s < b; ++s) {
    for (int64_t ch = 0; ch < c; ++ch) {
      const T inv_std = T(1) / std::sqrt(running_var[ch] + eps);
      const T g = gamma[ch] * inv_std;
      const T shift = beta[ch] - running_mean[ch] * g;
      const T* px = x + (s * c + ch) * hw;
      T* py = y + (s * c + ch) * hw;
      for (int64_t i = 0; i < hw; ++i) py[i] = g * px[i] + shift;
    }
  }
}

template <typename T>
void batchnorm_backward(const T* dy, const T* xhat, const T* gamma, const T* batch_var, T* dx,
                        T* dgamma, T* dbeta, int64_t b, int64_t c, int64_t hw, T eps) {
  const int64_t m = b * hw;
#pragma omp parallel for schedule(static)
  for (int64_t ch = 0; ch < c; ++ch) {
    T sum_dy = T(0), sum_dy_xhat = T(0);
    for (int64_t s = 0; s < b; ++s) {
      const T* pdy = dy + (s * c + ch) * hw;
      const T* ph = xhat + (s * c + ch) * hw;
      for (int64_t i = 0; i < hw; ++i) {
        sum_dy += pdy[i];
        sum_dy_xhat += pdy[i] * ph[i];
      }
    }
    dgamma[ch] += sum_dy_xhat;
    dbeta[ch] += sum_dy;

    const T inv_std = T(1) / std::sqrt(batch_var[ch] + eps);
    const T g = gamma[ch] * inv_std;
    const T mean_dy = sum_dy / T(m);
    const T mean_dy_xhat = sum_dy_xhat / T(m);
    for (int64_t s = 0; s < b; ++s) {
      const T* pdy = dy + (s * c + ch) * hw;
      const T* ph = xhat + (s * c + ch) * hw;
      T* pdx = dx + (s * c + ch) * hw;
      for (int64_t i = 0; i < hw; ++i)
        pdx[i] = g * (pdy[i] - mean_dy - ph[i] * mean_dy_xhat);
    }
  }
}

template <typename T>
void relu_forward(const T* x, T* y, uint8_t* mask, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    const bool pos = x[i] > T(0);
    y[i] = pos ? x[i] : T(0);
    mask[i] = pos ? 1 : 0;
  }
}

template <typename T>
void relu_backward(const T* dy, const uint8_t* mask, T* dx, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) dx[i] = mask[i] ? dy[i] : T(0);
}

template <typename T>
void sigmoid_forward(const T* x, T* y, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
}

template <typename T>
void sigmoid_backward(const T* dy, const T* y, T* dx, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) dx[i] = dy[i] * y[i] * (T(1) - y[i]);
}

template <typename T>
void maxpool2_forward(const T* x, T* y, int32_t* argmax, int64_t b, int64_t c, int64_t h,
                      int64_t w) {
  const int64_t oh = (h + 1) / 2, ow = (w + 1) / 2;
#pragma omp parallel for schedule(static)
  for (int64_t sc = 0; sc < b * c; ++sc) {
    const T* px = x + sc * h * w;
    T* py = y + sc * oh * ow;
    int32_t* pa = argmax + sc * oh * ow;
    for (int64_t i = 0; i < oh; ++i) {
      for (int64_t j = 0; j < ow; ++j) {
        const int64_t i0 = 2 * i, j0 = 2 * j;
        int64_t best = i0 * w + j0;
        T best_v = px[best];
        for (int64_t di = 0; di < 2; ++di) {
          for (int64_t dj = 0; dj < 2; ++dj) {
            const int64_t ii = i0 + di, jj = j0 + dj;
            if (ii >= h || jj >= w) continue;
            const int64_t idx = ii * w + jj;
            if (px[idx] > best_v) {
              best_v = px[idx];
              best = idx;
            }
          }
        }
        py[i * ow + j] = best_v;
        pa[i * ow + j] = static_cast<int32_t>(best);
      }
    }
  }
}

template <typename T>
void maxpool2_backward(const T* dy, const int32_t* argmax, T* dx, int64_t b, int64_t c,
                       int64_t h, int64_t w) {
  const int64_t oh = (h + 1) / 2, ow = (w + 1) / 2;
#pragma omp parallel for schedule(static)
  for (int64_t sc = 0; sc < b * c; ++sc) {
    T* pdx = dx + sc * h * w;
    std::fill(pdx, pdx + h * w, T(0));
    const T* pdy = dy + sc * oh * ow;
    const int32_t* pa = argmax + sc * oh * ow;
    for (int64_t i = 0; i < oh * ow; ++i) pdx[pa[i]] += pdy[i];
  }
}

template <typename T>
void global_avgpool_forward(const T* x, T* y, int64_t b, int64_t c, int64_t hw) {
#pragma omp parallel for schedule(static)
  for (int64_t sc = 0; sc < b * c; ++sc) {
    const T* px = x + sc * hw;
    T acc = T(0);
    for (int64_t i = 0; i < hw; ++i) acc += px[i];
    y[sc] = acc / T(hw);
  }
}

template <typename T>
void global_avgpool_backward(const T* dy, T* dx, int64_t b, int64_t c, int64_t hw) {
#pragma omp parallel for schedule(static)
  for (int64_t sc = 0; sc < b * c; ++sc) {
    const T g = dy[sc] / T(hw);
    T* pdx = dx + sc * hw;
    for (int64_t i = 0; i < hw; ++i) pdx[i] += g;
  }
}

template <typename T>
void global_maxpool_forward(const T* x, T* y, int32_t* argmax, int64_t b, int64_t c,
                            int64_t hw) {
#pragma omp parallel for schedule(static)
  for (int64_t sc = 0; sc < b * c; ++sc) {
    const T* px = x + sc * hw;
    int64_t best = 0;
    T best_v = px[0];
    for (int64_t i = 1; i < hw; ++i) {
      if (px[i] > best_v) {
        best_v = px[i];
        best = i;
      }
    }
    y[sc] = best_v;
    argmax[sc] = static_cast<int32_t>(best);
  }
}

template <typename T>
void global_maxpool_backward(const T* dy, const int32_t* argmax, T* dx, int64_t b, int64_t c,
                             int64_t hw) {
#pragma omp parallel for schedule(static)
  for (int64_t sc = 0; sc < b * c; ++sc) dx[sc * hw + argmax[sc]] += dy[sc];
}

template <typename T>
void linear_forward(const T* x, const T* w, const T* bias, T* y, int64_t b, int64_t in,
                    int64_t out) {
  // y = x [B,IN] * w^T, w stored [OUT,IN]
  gemm<T>(false, true, b, out, in, T(1), x, in, w, in, T(0), y, out);
  if (bias) {
#pragma omp parallel for schedule(static)
    for (int64_t s = 0; s < b; ++s) {
      T* row = y + s * out;
      for (int64_t o = 0; o < out; ++o) row[o] += bias[o];
    }
  }
}

template <typename T>
void linear_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, int64_t b,
                     int64_t in, int64_t out) {
  // dw [OUT,IN] += dy^T [OUT,B] * x [B,IN]
  gemm<T>(true, false, out, in, b, T(1), dy, out, x, in, T(1), dw, in);
  if (db) {
    for (int64_t s = 0; s < b; ++s) {
      const T* row = dy + s * out;
      for (int64_t o = 0; o < out; ++o) db[o] += row[o];
    }
  }
  if (dx) {
    // dx [B,IN] = dy [B,OUT] * w [OUT,IN]
    gemm<T>(false, false, b, in, out, T(1), dy, out, w, in, T(0), dx, in);
  }
}

template <typename T>
void adam_step(T* param, const T* grad, T* m, T* v, int64_t n, T lr, T beta1, T beta2, T eps,
               int64_t t) {
  const T bc1 = T(1) - std::pow(beta1, static_cast<T>(t));
  const T bc2 = T(1) - std::pow(beta2, static_cast<T>(t));
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * grad[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * grad[i] * grad[i];
    const T mhat = m[i] / bc1;
    const T vhat = v[i] / bc2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

#define NFPOS_INSTANTIATE_KERNELS(T)                                                          \
  template void gemm<T>(bool, bool, int64_t, int64_t, int64_t, T, const T*, int64_t,         \
                        const T*, int64_t, T, T*, int64_t);                                   \
  template void im2col<T>(const T*, int64_t, int64_t, int64_t, int64_t, int64_t, int64_t,    \
                          T*);                                                                \
  template void col2im<T>(const T*, int64_t, int64_t, int64_t, int64_t, int64_t, int64_t,    \
                          T*);                                                                \
  template void conv2d_forward<T>(const T*, const T*, const T*, T*, int64_t, int64_t,        \
                                  int64_t, int64_t, int64_t, int64_t, int64_t, int64_t,      \
                                  Workspace<T>&);                                             \
  template void conv2d_backward<T>(const T*, const T*, const T*, T*, T*, T*, int64_t,        \
                                   int64_t, int64_t, int64_t, int64_t, int64_t, int64_t,     \
                                   int64_t, Workspace<T>&);                                   \
  template void batchnorm_forward_train<T>(const T*, T*, T*, const T*, const T*, T*, T*, T*, \
                                           T*, int64_t, int64_t, int64_t, T, T);             \
  template void batchnorm_forward_eval<T>(const T*, T*, const T*, const T*, const T*,        \
                                          const T*, int64_t, int64_t, int64_t, T);           \
  template void batchnorm_backward<T>(const T*, const T*, const T*, const T*, T*, T*, T*,    \
                                      int64_t, int64_t, int64_t, T);                         \
  template void relu_forward<T>(const T*, T*, uint8_t*, int64_t);                            \
  template void relu_backward<T>(const T*, const uint8_t*, T*, int64_t);                     \
  template void sigmoid_forward<T>(const T*, T*, int64_t);                                   \
  template void sigmoid_backward<T>(const T*, const T*, T*, int64_t);                        \
  template void maxpool2_forward<T>(const T*, T*, int32_t*, int64_t, int64_t, int64_t,       \
                                    int64_t);                                                 \
  template void maxpool2_backward<T>(const T*, const int32_t*, T*, int64_t, int64_t,         \
                                     int64_t, int64_t);                                       \
  template void global_avgpool_forward<T>(const T*, T*, int64_t, int64_t, int64_t);          \
  template void global_avgpool_backward<T>(const T*, T*, int64_t, int64_t, int64_t);         \
  template void global_maxpool_forward<T>(const T*, T*, int32_t*, int64_t, int64_t,          \
                                          int64_t);                                           \
  template void global_maxpool_backward<T>(const T*, const int32_t*, T*, int64_t, int64_t,   \
                                           int64_t);                                          \
  template void linear_forward<T>(const T*, const T*, const T*, T*, int64_t, int64_t,        \
                                  int64_t);                                                   \
  template void linear_backward<T>(const T*, const T*, const T*, T*, T*, T*, int64_t,        \
                                   int64_t, int64_t);                                         \
  template void adam_step<T>(T*, const T*, T*, T*, int64_t, T, T, T, T, int64_t);

NFPOS_INSTANTIATE_KERNELS(float)
NFPOS_INSTANTIATE_KERNELS(double)

}  // namespace nfpos::kernels
