#ifndef NFPOS_NN_HPP
#define NFPOS_NN_HPP

#include <string>
#include <vector>

#include "nfpos/kernels.hpp"
#include "nfpos/rng.hpp"
#include "nfpos/tensor.hpp"

// Layer zoo with explicit forward/backward passes. Every layer owns its
// output and gradient buffers and reuses them across steps; forward returns
// a reference into the layer. Gradients accumulate into dw/db until
// zero_grad, matching the optimizer step cadence.
namespace nfpos::nn {

template <typename T>
struct ParamEntry {
  std::string name;
  Tensor<T>* value;
  Tensor<T>* grad;  // null for non-trainable state (BN running stats)
};

template <typename T>
using ParamRegistry = std::vector<ParamEntry<T>>;

template <typename T>
void ensure_shape(Tensor<T>& t, std::vector<int64_t> shape) {
  if (t.shape != shape) {
    t.shape = std::move(shape);
    t.data.resize(static_cast<size_t>(Tensor<T>::numel_of(t.shape)));
  }
}

// Square-kernel stride-1 convolution, weights [OC, C*K*K], fan-out Gaussian
// init, zero bias.
template <typename T>
class Conv2d {
 public:
  void configure(int64_t in_c, int64_t out_c, int64_t k, int64_t pad);
  void init(SplitMix64& rng);
  const Tensor<T>& forward(const Tensor<T>& x, bool train);
  const Tensor<T>& backward(const Tensor<T>& dy, bool need_dx = true);
  void collect(ParamRegistry<T>& reg, const std::string& prefix);
  void collect_state(ParamRegistry<T>& reg, const std::string& prefix);

  Tensor<T> w, b, dw, db;

 private:
  int64_t in_c_ = 0, out_c_ = 0, k_ = 0, pad_ = 0;
  Tensor<T> out_, dx_, x_cache_;
  kernels::Workspace<T> ws_;
};

template <typename T>
class BatchNorm2d {
 public:
  void configure(int64_t channels, T momentum = T(0.1), T eps = T(1e-5));
  void init();
  const Tensor<T>& forward(const Tensor<T>& x, bool train);
  const Tensor<T>& backward(const Tensor<T>& dy);
  void collect(ParamRegistry<T>& reg, const std::string& prefix);
  void collect_state(ParamRegistry<T>& reg, const std::string& prefix);

  Tensor<T> gamma, beta, dgamma, dbeta;
  Tensor<T> running_mean, running_var;

 private:
  int64_t c_ = 0;
  T momentum_ = T(0.1), eps_ = T(1e-5);
  Tensor<T> out_, dx_, xhat_, batch_mean_, batch_var_;
};

template <typename T>
class ReLU {
 public:
  const Tensor<T>& forward(const Tensor<T>& x);
  const Tensor<T>& backward(const Tensor<T>& dy);

 private:
  Tensor<T> out_, dx_;
  std::vector<uint8_t> mask_;
};

// 2x2 stride-2 max pool with ceil semantics.
template <typename T>
class MaxPool2 {
 public:
  const Tensor<T>& forward(const Tensor<T>& x);
  const Tensor<T>& backward(const Tensor<T>& dy);

 private:
  std::vector<int64_t> in_shape_;
  Tensor<T> out_, dx_;
  std::vector<int32_t> argmax_;
};

template <typename T>
class Linear {
 public:
  void configure(int64_t in, int64_t out);
  void init(SplitMix64& rng);
  const Tensor<T>& forward(const Tensor<T>& x, bool train);
  const Tensor<T>& backward(const Tensor<T>& dy, bool need_dx = true);
  void collect(ParamRegistry<T>& reg, const std::string& prefix);

  Tensor<T> w, b, dw, db;

 private:
  int64_t in_dim_ = 0, out_dim_ = 0;
  Tensor<T> out_, dx_, x_cache_;
};

// Conv -> BatchNorm -> ReLU composite.
template <typename T>
class CbrUnit {
 public:
  void configure(int64_t in_c, int64_t out_c, int64_t k, int64_t pad);
  void init(SplitMix64& rng);
  const Tensor<T>& forward(const Tensor<T>& x, bool train);
  const Tensor<T>& backward(const Tensor<T>& dy, bool need_dx = true);
  void collect(ParamRegistry<T>& reg, const std::string& prefix);
  void collect_state(ParamRegistry<T>& reg, const std::string& prefix);

  Conv2d<T> conv;
  BatchNorm2d<T> bn;
  ReLU<T> relu;
};

// Dual-path channel gate: shared squeeze/excite 1x1 convs applied to global
// average and max pooled descriptors, summed, squashed by a sigmoid and
// multiplied back onto the feature map.
template <typename T>
class ChannelAttention {
 public:
  void configure(int64_t channels, int64_t reduced);
  void init(SplitMix64& rng);
  const Tensor<T>& forward(const Tensor<T>& x, bool train);
  const Tensor<T>& backward(const Tensor<T>& dy);
  void collect(ParamRegistry<T>& reg, const std::string& prefix);

  // [B, C] gate values in (0,1); valid after forward.
  const Tensor<T>& attention() const { return attn_; }
  const Tensor<T>& pooled_avg() const { return gap_; }
  const Tensor<T>& pooled_max() const { return gmp_; }

  Tensor<T> w1, b1, w2, b2, dw1, db1, dw2, db2;

 private:
  void mlp_forward(const Tensor<T>& v, Tensor<T>& z1, std::vector<uint8_t>& mask,
                   Tensor<T>& z2);
  void mlp_backward(const Tensor<T>& v, const Tensor<T>& z1, const std::vector<uint8_t>& mask,
                    const Tensor<T>& dz2, Tensor<T>& dv);

  int64_t c_ = 0, cr_ = 0;
  Tensor<T> out_, dx_, x_cache_;
  Tensor<T> gap_, gmp_, z1a_, z1p_, z2a_, z2p_, logits_, attn_;
  std::vector<uint8_t> mask_a_, mask_p_;
  std::vector<int32_t> gmp_argmax_;
  Tensor<T> dattn_, dlogit_, dz2_, dh1_, dpool_;
};

// Spatial gate: channel mean/max planes concatenated, passed through a wide
// convolution and a sigmoid, multiplied back onto every channel.
template <typename T>
class SpatialAttention {
 public:
  void configure(int64_t kernel);
  void init(SplitMix64& rng);
  const Tensor<T>& forward(const Tensor<T>& x, bool train);
  const Tensor<T>& backward(const Tensor<T>& dy);
  void collect(ParamRegistry<T>& reg, const std::string& prefix);

  // [B, 1, H, W] gate values in (0,1); valid after forward.
  const Tensor<T>& attention() const { return attn_; }
  const Tensor<T>& pooled_planes() const { return cat_; }

  Conv2d<T> conv;

 private:
  int64_t kernel_ = 7;
  Tensor<T> out_, dx_, x_cache_;
  Tensor<T> cat_, attn_, dattn_, dlogit_;
  std::vector<int32_t> max_channel_;
};

// Two 3x3 CBR-style convolutions with an identity shortcut:
// out = relu(bn2(conv2(relu(bn1(conv1(x))))) + x).
template <typename T>
class ResidualBlock {
 public:
  void configure(int64_t channels);
  void init(SplitMix64& rng);
  const Tensor<T>& forward(const Tensor<T>& x, bool train);
  const Tensor<T>& backward(const Tensor<T>& dy);
  void collect(ParamRegistry<T>& reg, const std::string& prefix);
  void collect_state(ParamRegistry<T>& reg, const std::string& prefix);

  Conv2d<T> conv1, conv2;
  BatchNorm2d<T> bn1, bn2;

 private:
  ReLU<T> relu1_;
  Tensor<T> out_, dx_, sum_;
  std::vector<uint8_t> out_mask_;
};

// Flatten -> Linear -> ReLU -> Linear -> ReLU -> Linear; no output
// activation.
template <typename T>
class MlpHead {
 public:
  void configure(const std::vector<int64_t>& widths);
  void init(SplitMix64& rng);
  const Tensor<T>& forward(const Tensor<T>& x, bool train);
  const Tensor<T>& backward(const Tensor<T>& dy, bool need_dx = true);
  void collect(ParamRegistry<T>& reg, const std::string& prefix);

  std::vector<Linear<T>> layers;

 private:
  std::vector<ReLU<T>> relus_;
  std::vector<int64_t> in_shape_;
  Tensor<T> flat_, dx_;
};

}  // namespace nfpos::nn

#endif
