#ifndef NFPOS_KERNELS_HPP
#define NFPOS_KERNELS_HPP

#include <cstdint>
#include <vector>

namespace nfpos::kernels {

// Parallel compute primitives behind the NN layers. Batched operators run
// OpenMP-parallel across the batch (sample slices are independent), so every
// result is bitwise deterministic for a fixed thread count. GEMM calls go to
// single-threaded OpenBLAS; tests and tools/bench_kernels compare these
// against the serial reference implementations in src/ref.

// Scratch buffers reused across calls; each conv/pool layer owns one.
template <typename T>
struct Workspace {
  std::vector<T> col;    // im2col buffers, one slice per thread
  std::vector<T> mat;    // per-thread weight-gradient partials
};

// Row-major C = alpha * op(A) * op(B) + beta * C.
template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha, const T* a,
          int64_t lda, const T* b, int64_t ldb, T beta, T* c, int64_t ldc);

// x [C,H,W] -> col [C*kh*kw, H*W], stride 1, zero padding.
template <typename T>
void im2col(const T* x, int64_t c, int64_t h, int64_t w, int64_t kh, int64_t kw, int64_t pad,
            T* col);

// Accumulating inverse of im2col.
template <typename T>
void col2im(const T* col, int64_t c, int64_t h, int64_t w, int64_t kh, int64_t kw, int64_t pad,
            T* x);

// x [B,C,H,W], w [OC, C*kh*kw], bias [OC] (may be null), y [B,OC,H,W].
template <typename T>
void conv2d_forward(const T* x, const T* w, const T* bias, T* y, int64_t b, int64_t c,
                    int64_t h, int64_t w_dim, int64_t oc, int64_t kh, int64_t kw, int64_t pad,
                    Workspace<T>& ws);

// Gradients w.r.t. input, weights and bias. dx may be null (input layer).
// dw/db are accumulated into (caller zeroes between optimizer steps).
template <typename T>
void conv2d_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, int64_t b,
                     int64_t c, int64_t h, int64_t w_dim, int64_t oc, int64_t kh, int64_t kw,
                     int64_t pad, Workspace<T>& ws);

// Training-mode batch norm: per-channel biased batch statistics, running
// stats updated as running = (1-momentum)*running + momentum*batch (variance
// uses the unbiased estimate). xhat (normalized input) is emitted for the
// backward pass.
template <typename T>
void batchnorm_forward_train(const T* x, T* y, T* xhat, const T* gamma, const T* beta,
                             T* running_mean, T* running_var, T* batch_mean, T* batch_var,
                             int64_t b, int64_t c, int64_t hw, T momentum, T eps);

template <typename T>
void batchnorm_forward_eval(const T* x, T* y, const T* gamma, const T* beta,
                            const T* running_mean, const T* running_var, int64_t b, int64_t c,
                            int64_t hw, T eps);

template <typename T>
void batchnorm_backward(const T* dy, const T* xhat, const T* gamma, const T* batch_var, T* dx,
                        T* dgamma, T* dbeta, int64_t b, int64_t c, int64_t hw, T eps);

template <typename T>
void relu_forward(const T* x, T* y, uint8_t* mask, int64_t n);

template <typename T>
void relu_backward(const T* dy, const uint8_t* mask, T* dx, int64_t n);

template <typename T>
void sigmoid_forward(const T* x, T* y, int64_t n);

// dx = dy * y * (1 - y), with y the sigmoid output.
template <typename T>
void sigmoid_backward(const T* dy, const T* y, T* dx, int64_t n);

// 2x2 stride-2 max pool with ceil semantics (edge windows are clipped), so
// output dims are ceil(h/2) x ceil(w/2). argmax holds input-plane indices.
template <typename T>
void maxpool2_forward(const T* x, T* y, int32_t* argmax, int64_t b, int64_t c, int64_t h,
                      int64_t w);

template <typename T>
void maxpool2_backward(const T* dy, const int32_t* argmax, T* dx, int64_t b, int64_t c,
                       int64_t h, int64_t w);

// Global spatial pooling: x [B,C,HW] -> y [B,C].
template <typename T>
void global_avgpool_forward(const T* x, T* y, int64_t b, int64_t c, int64_t hw);
template <typename T>
void global_avgpool_backward(const T* dy, T* dx, int64_t b, int64_t c, int64_t hw);
template <typename T>
void global_maxpool_forward(const T* x, T* y, int32_t* argmax, int64_t b, int64_t c,
                            int64_t hw);
template <typename T>
void global_maxpool_backward(const T* dy, const int32_t* argmax, T* dx, int64_t b, int64_t c,
                             int64_t hw);

// y [B,OUT] = x [B,IN] * w^T [IN,OUT] + bias.
template <typename T>
void linear_forward(const T* x, const T* w, const T* bias, T* y, int64_t b, int64_t in,
                    int64_t out);

template <typename T>
void linear_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, int64_t b,
                     int64_t in, int64_t out);

// One Adam update; t is the 1-based step count after bias correction.
template <typename T>
void adam_step(T* param, const T* grad, T* m, T* v, int64_t n, T lr, T beta1, T beta2, T eps,
               int64_t t);

}  // namespace nfpos::kernels

#endif
