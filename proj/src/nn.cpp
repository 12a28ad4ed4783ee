#include "nfpos/nn.hpp"

#include <cmath>

namespace nfpos::nn {

using kernels::Workspace;

// ---------------------------------------------------------------- Conv2d

template <typename T>
void Conv2d<T>::configure(int64_t in_c, int64_t out_c, int64_t k, int64_t pad) {
  in_c_ = in_c;
  out_c_ = out_c;
  k_ = k;
  pad_ = pad;
  w = Tensor<T>({out_c, in_c * k * k});
  b = Tensor<T>({out_c});
  dw = Tensor<T>({out_c, in_c * k * k});
  db = Tensor<T>({out_c});
}

template <typename T>
void Conv2d<T>::init(SplitMix64& rng) {
  const double fan_out = static_cast<double>(out_c_ * k_ * k_);
  const double std_dev = std::sqrt(2.0 / fan_out);
  for (auto& v : w.data) v = static_cast<T>(rng.next_gaussian() * std_dev);
  b.fill(T(0));
}

template <typename T>
const Tensor<T>& Conv2d<T>::forward(const Tensor<T>& x, bool train) {
  if (x.rank() != 4 || x.dim(1) != in_c_)
    throw ShapeError("conv2d: bad input shape " + x.shape_str());
  const int64_t bsz = x.dim(0), h = x.dim(2), wd = x.dim(3);
  ensure_shape(out_, {bsz, out_c_, h, wd});
  kernels::conv2d_forward(x.ptr(), w.ptr(), b.ptr(), out_.ptr(), bsz, in_c_, h, wd, out_c_,
                          k_, k_, pad_, ws_);
  if (train) x_cache_ = x;
  return out_;
}

template <typename T>
const Tensor<T>& Conv2d<T>::backward(const Tensor<T>& dy, bool need_dx) {
  const int64_t bsz = x_cache_.dim(0), h = x_cache_.dim(2), wd = x_cache_.dim(3);
  ensure_shape(dx_, x_cache_.shape);
  kernels::conv2d_backward(x_cache_.ptr(), w.ptr(), dy.ptr(), need_dx ? dx_.ptr() : nullptr,
                           dw.ptr(), db.ptr(), bsz, in_c_, h, wd, out_c_, k_, k_, pad_, ws_);
  return dx_;
}

template <typename T>
void Conv2d<T>::collect(ParamRegistry<T>& reg, const std::string& prefix) {
  reg.push_back({prefix + ".weight", &w, &dw});
  reg.push_back({prefix + ".bias", &b, &db});
}

template <typename T>
void Conv2d<T>::collect_state(ParamRegistry<T>& reg, const std::string& prefix) {
  collect(reg, prefix);
}

// ------------------------------------------------------------ BatchNorm2d

template <typename T>
void BatchNorm2d<T>::configure(int64_t channels, T momentum, T eps) {
  c_ = channels;
  momentum_ = momentum;
  eps_ = eps;
  gamma = Tensor<T>({channels});
  beta = Tensor<T>({channels});
  dgamma = Tensor<T>({channels});
  dbeta = Tensor<T>({channels});
  running_mean = Tensor<T>({channels});
  running_var = Tensor<T>({channels});
  batch_mean_ = Tensor<T>({channels});
  batch_var_ = Tensor<T>({channels});
  init();
}

template <typename T>
void BatchNorm2d<T>::init() {
  gamma.fill(T(1));
  beta.fill(T(0));
  running_mean.fill(T(0));
  running_var.fill(T(1));
}

template <typename T>
const Tensor<T>& BatchNorm2d<T>::forward(const Tensor<T>& x, bool train) {
  if (x.rank() != 4 || x.dim(1) != c_)
    throw ShapeError("batchnorm: bad input shape " + x.shape_str());
  const int64_t bsz = x.dim(0), hw = x.dim(2) * x.dim(3);
  ensure_shape(out_, x.shape);
  if (train) {
    ensure_shape(xhat_, x.shape);
    kernels::batchnorm_forward_train(x.ptr(), out_.ptr(), xhat_.ptr(), gamma.ptr(), beta.ptr(),
                                     running_mean.ptr(), running_var.ptr(), batch_mean_.ptr(),
                                     batch_var_.ptr(), bsz, c_, hw, momentum_, eps_);
  } else {
    kernels::batchnorm_forward_eval(x.ptr(), out_.ptr(), gamma.ptr(), beta.ptr(),
                                    running_mean.ptr(), running_var.ptr(), bsz, c_, hw, eps_);
  }
  return out_;
}

template <typename T>
const Tensor<T>& BatchNorm2d<T>::backward(const Tensor<T>& dy) {
  const int64_t bsz = dy.dim(0), hw = dy.dim(2) * dy.dim(3);
  ensure_shape(dx_, dy.shape);
  kernels::batchnorm_backward(dy.ptr(), xhat_.ptr(), gamma.ptr(), batch_var_.ptr(), dx_.ptr(),
                              dgamma.ptr(), dbeta.ptr(), bsz, c_, hw, eps_);
  return dx_;
}

template <typename T>
void BatchNorm2d<T>::collect(ParamRegistry<T>& reg, const std::string& prefix) {
  reg.push_back({prefix + ".gamma", &gamma, &dgamma});
  reg.push_back({prefix + ".beta", &beta, &dbeta});
}

template <typename T>
void BatchNorm2d<T>::collect_state(ParamRegistry<T>& reg, const std::string& prefix) {
  collect(reg, prefix);
  reg.push_back({prefix + ".running_mean", &running_mean, nullptr});
  reg.push_back({prefix + ".running_var", &running_var, nullptr});
}

// ------------------------------------------------------------------ ReLU

template <typename T>
const Tensor<T>& ReLU<T>::forward(const Tensor<T>& x) {
  ensure_shape(out_, x.shape);
  mask_.resize(static_cast<size_t>(x.numel()));
  kernels::relu_forward(x.ptr(), out_.ptr(), mask_.data(), x.numel());
  return out_;
}

template <typename T>
const Tensor<T>& ReLU<T>::backward(const Tensor<T>& dy) {
  ensure_shape(dx_, dy.shape);
  kernels::relu_backward(dy.ptr(), mask_.data(), dx_.ptr(), dy.numel());
  return dx_;
}

// -------------------------------------------------------------- MaxPool2

template <typename T>
const Tensor<T>& MaxPool2<T>::forward(const Tensor<T>& x) {
  const int64_t bsz = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  in_shape_ = x.shape;
  ensure_shape(out_, {bsz, c, (h + 1) / 2, (wd + 1) / 2});
  argmax_.resize(static_cast<size_t>(out_.numel()));
  kernels::maxpool2_forward(x.ptr(), out_.ptr(), argmax_.data(), bsz, c, h, wd);
  return out_;
}

template <typename T>
const Tensor<T>& MaxPool2<T>::backward(const Tensor<T>& dy) {
  ensure_shape(dx_, in_shape_);
  kernels::maxpool2_backward(dy.ptr(), argmax_.data(), dx_.ptr(), in_shape_[0], in_shape_[1],
                             in_shape_[2], in_shape_[3]);
  return dx_;
}

// ---------------------------------------------------------------- Linear

template <typename T>
void Linear<T>::configure(int64_t in, int64_t out) {
  in_dim_ = in;
  out_dim_ = out;
  w = Tensor<T>({out, in});
  b = Tensor<T>({out});
  dw = Tensor<T>({out, in});
  db = Tensor<T>({out});
}

template <typename T>
void Linear<T>::init(SplitMix64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim_));
  for (auto& v : w.data) v = static_cast<T>(rng.next_uniform(-bound, bound));
  b.fill(T(0));
}

template <typename T>
const Tensor<T>& Linear<T>::forward(const Tensor<T>& x, bool train) {
  if (x.rank() != 2 || x.dim(1) != in_dim_)
    throw ShapeError("linear: bad input shape " + x.shape_str());
  const int64_t bsz = x.dim(0);
  ensure_shape(out_, {bsz, out_dim_});
  kernels::linear_forward(x.ptr(), w.ptr(), b.ptr(), out_.ptr(), bsz, in_dim_, out_dim_);
  if (train) x_cache_ = x;
  return out_;
}

template <typename T>
const Tensor<T>& Linear<T>::backward(const Tensor<T>& dy, bool need_dx) {
  const int64_t bsz = x_cache_.dim(0);
  ensure_shape(dx_, x_cache_.shape);
  kernels::linear_backward(x_cache_.ptr(), w.ptr(), dy.ptr(), need_dx ? dx_.ptr() : nullptr,
                           dw.ptr(), db.ptr(), bsz, in_dim_, out_dim_);
  return dx_;
}

template <typename T>
void Linear<T>::collect(ParamRegistry<T>& reg, const std::string& prefix) {
  reg.push_back({prefix + ".weight", &w, &dw});
  reg.push_back({prefix + ".bias", &b, &db});
}

// --------------------------------------------------------------- CbrUnit

template <typename T>
void CbrUnit<T>::configure(int64_t in_c, int64_t out_c, int64_t k, int64_t pad) {
  conv.configure(in_c, out_c, k, pad);
  bn.configure(out_c);
}

template <typename T>
void CbrUnit<T>::init(SplitMix64& rng) {
  conv.init(rng);
  bn.init();
}

template <typename T>
const Tensor<T>& CbrUnit<T>::forward(const Tensor<T>& x, bool train) {
  return relu.forward(bn.forward(conv.forward(x, train), train));
}

template <typename T>
const Tensor<T>& CbrUnit<T>::backward(const Tensor<T>& dy, bool need_dx) {
  return conv.backward(bn.backward(relu.backward(dy)), need_dx);
}

template <typename T>
void CbrUnit<T>::collect(ParamRegistry<T>& reg, const std::string& prefix) {
  conv.collect(reg, prefix + ".conv");
  bn.collect(reg, prefix + ".bn");
}

template <typename T>
void CbrUnit<T>::collect_state(ParamRegistry<T>& reg, const std::string& prefix) {
  conv.collect_state(reg, prefix + ".conv");
  bn.collect_state(reg, prefix + ".bn");
}

// ------------------------------------------------------ ChannelAttention

template <typename T>
void ChannelAttention<T>::configure(int64_t channels, int64_t reduced) {
  c_ = channels;
  cr_ = reduced;
  w1 = Tensor<T>({reduced, channels});
  b1 = Tensor<T>({reduced});
  w2 = Tensor<T>({channels, reduced});
  b2 = Tensor<T>({channels});
  dw1 = Tensor<T>({reduced, channels});
  db1 = Tensor<T>({reduced});
  dw2 = Tensor<T>({channels, reduced});
  db2 = Tensor<T>({channels});
}

template <typename T>
void ChannelAttention<T>::init(SplitMix64& rng) {
  // 1x1 convs on a pooled [B,C,1,1] map; fan-out = out_channels.
  const double s1 = std::sqrt(2.0 / static_cast<double>(cr_));
  for (auto& v : w1.data) v = static_cast<T>(rng.next_gaussian() * s1);
  b1.fill(T(0));
  const double s2 = std::sqrt(2.0 / static_cast<double>(c_));
  for (auto& v : w2.data) v = static_cast<T>(rng.next_gaussian() * s2);
  b2.fill(T(0));
}

template <typename T>
void ChannelAttention<T>::mlp_forward(const Tensor<T>& v, Tensor<T>& z1,
                                      std::vector<uint8_t>& mask, Tensor<T>& z2) {
  const int64_t bsz = v.dim(0);
  ensure_shape(z1, {bsz, cr_});
  ensure_shape(z2, {bsz, c_});
  mask.resize(static_cast<size_t>(bsz * cr_));
  kernels::linear_forward(v.ptr(), w1.ptr(), b1.ptr(), z1.ptr(), bsz, c_, cr_);
  // relu in place into z1 via mask path
  kernels::relu_forward(z1.ptr(), z1.ptr(), mask.data(), z1.numel());
  kernels::linear_forward(z1.ptr(), w2.ptr(), b2.ptr(), z2.ptr(), bsz, cr_, c_);
}

template <typename T>
void ChannelAttention<T>::mlp_backward(const Tensor<T>& v, const Tensor<T>& z1,
                                       const std::vector<uint8_t>& mask, const Tensor<T>& dz2,
                                       Tensor<T>& dv) {
  const int64_t bsz = v.dim(0);
  ensure_shape(dh1_, {bsz, cr_});
  ensure_shape(dv, {bsz, c_});
  // layer 2: x = relu(z1)
  kernels::linear_backward(z1.ptr(), w2.ptr(), dz2.ptr(), dh1_.ptr(), dw2.ptr(), db2.ptr(),
                           bsz, cr_, c_);
  kernels::relu_backward(dh1_.ptr(), mask.data(), dh1_.ptr(), dh1_.numel());
  kernels::linear_backward(v.ptr(), w1.ptr(), dh1_.ptr(), dv.ptr(), dw1.ptr(), db1.ptr(), bsz,
                           c_, cr_);
}

template <typename T>
const Tensor<T>& ChannelAttention<T>::forward(const Tensor<T>& x, bool train) {
  if (x.rank() != 4 || x.dim(1) != c_)
    throw ShapeError("channel attention: bad input shape " + x.shape_str());
  const int64_t bsz = x.dim(0), hw = x.dim(2) * x.dim(3);

  ensure_shape(gap_, {bsz, c_});
  ensure_shape(gmp_, {bsz, c_});
  gmp_argmax_.resize(static_cast<size_t>(bsz * c_));
  kernels::global_avgpool_forward(x.ptr(), gap_.ptr(), bsz, c_, hw);
  kernels::global_maxpool_forward(x.ptr(), gmp_.ptr(), gmp_argmax_.data(), bsz, c_, hw);

  mlp_forward(gap_, z1a_, mask_a_, z2a_);
  mlp_forward(gmp_, z1p_, mask_p_, z2p_);

  ensure_shape(logits_, {bsz, c_});
  ensure_shape(attn_, {bsz, c_});
  for (int64_t i = 0; i < logits_.numel(); ++i) logits_[i] = z2a_[i] + z2p_[i];
  kernels::sigmoid_forward(logits_.ptr(), attn_.ptr(), logits_.numel());

  ensure_shape(out_, x.shape);
#pragma omp parallel for schedule(static)
  for (int64_t sc = 0; sc < bsz * c_; ++sc) {
    const T a = attn_[sc];
    const T* px = x.ptr() + sc * hw;
    T* py = out_.ptr() + sc * hw;
    for (int64_t i = 0; i < hw; ++i) py[i] = a * px[i];
  }
  if (train) x_cache_ = x;
  return out_;
}

template <typename T>
const Tensor<T>& ChannelAttention<T>::backward(const Tensor<T>& dy) {
  const Tensor<T>& x = x_cache_;
  const int64_t bsz = x.dim(0), hw = x.dim(2) * x.dim(3);

  ensure_shape(dattn_, {bsz, c_});
  ensure_shape(dx_, x.shape);
#pragma omp parallel for schedule(static)
  for (int64_t sc = 0; sc < bsz * c_; ++sc) {
    const T a = attn_[sc];
    const T* pdy = dy.ptr() + sc * hw;
    const T* px = x.ptr() + sc * hw;
    T* pdx = dx_.ptr() + sc * hw;
    T acc = T(0);
    for (int64_t i = 0; i < hw; ++i) {
      acc += pdy[i] * px[i];
      pdx[i] = a * pdy[i];
    }
    dattn_[sc] = acc;
  }

  ensure_shape(dlogit_, {bsz, c_});
  kernels::sigmoid_backward(dattn_.ptr(), attn_.ptr(), dlogit_.ptr(), dattn_.numel());

  // shared parameters: both path gradients accumulate into dw1/dw2
  mlp_backward(gap_, z1a_, mask_a_, dlogit_, dpool_);
  kernels::global_avgpool_backward(dpool_.ptr(), dx_.ptr(), bsz, c_, hw);
  mlp_backward(gmp_, z1p_, mask_p_, dlogit_, dpool_);
  kernels::global_maxpool_backward(dpool_.ptr(), gmp_argmax_.data(), dx_.ptr(), bsz, c_, hw);
  return dx_;
}

template <typename T>
void ChannelAttention<T>::collect(ParamRegistry<T>& reg, const std::string& prefix) {
  reg.push_back({prefix + ".conv1.weight", &w1, &dw1});
  reg.push_back({prefix + ".conv1.bias", &b1, &db1});
  reg.push_back({prefix + ".conv2.weight", &w2, &dw2});
  reg.push_back({prefix + ".conv2.bias", &b2, &db2});
}

// ------------------------------------------------------ SpatialAttention

template <typename T>
void SpatialAttention<T>::configure(int64_t kernel) {
  kernel_ = kernel;
  conv.configure(2, 1, kernel, kernel / 2);
}

template <typename T>
void SpatialAttention<T>::init(SplitMix64& rng) {
  conv.init(rng);
}

template <typename T>
const Tensor<T>& SpatialAttention<T>::forward(const Tensor<T>& x, bool train) {
  const int64_t bsz = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int64_t hw = h * wd;

  ensure_shape(cat_, {bsz, 2, h, wd});
  max_channel_.resize(static_cast<size_t>(bsz * hw));
#pragma omp parallel for schedule(static)
  for (int64_t s = 0; s < bsz; ++s) {
    const T* px = x.ptr() + s * c * hw;
    T* pmean = cat_.ptr() + s * 2 * hw;
    T* pmax = pmean + hw;
    int32_t* pargc = max_channel_.data() + s * hw;
    for (int64_t i = 0; i < hw; ++i) {
      T acc = T(0);
      T best = px[i];
      int32_t best_c = 0;
      for (int64_t ch = 0; ch < c; ++ch) {
        const T v = px[ch * hw + i];
        acc += v;
        if (v > best) {
          best = v;
          best_c = static_cast<int32_t>(ch);
        }
      }
      pmean[i] = acc / T(c);
      pmax[i] = best;
      pargc[i] = best_c;
    }
  }

  const Tensor<T>& logits = conv.forward(cat_, train);
  ensure_shape(attn_, {bsz, 1, h, wd});
  kernels::sigmoid_forward(logits.ptr(), attn_.ptr(), logits.numel());

  ensure_shape(out_, x.shape);
#pragma omp parallel for schedule(static) collapse(2)
  for (int64_t s = 0; s < bsz; ++s) {
    for (int64_t ch = 0; ch < c; ++ch) {
      const T* pa = attn_.ptr() + s * hw;
      const T* px = x.ptr() + (s * c + ch) * hw;
      T* py = out_.ptr() + (s * c + ch) * hw;
      for (int64_t i = 0; i < hw; ++i) py[i] = pa[i] * px[i];
    }
  }
  if (train) x_cache_ = x;
  return out_;
}

template <typename T>
const Tensor<T>& SpatialAttention<T>::backward(const Tensor<T>& dy) {
  const Tensor<T>& x = x_cache_;
  const int64_t bsz = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int64_t hw = h * wd;

  ensure_shape(dattn_, {bsz, 1, h, wd});
  ensure_shape(dx_, x.shape);
#pragma omp parallel for schedule(static)
  for (int64_t s = 0; s < bsz; ++s) {
    T* pda = dattn_.ptr() + s * hw;
    const T* pa = attn_.ptr() + s * hw;
    for (int64_t i = 0; i < hw; ++i) pda[i] = T(0);
    for (int64_t ch = 0; ch < c; ++ch) {
      const T* pdy = dy.ptr() + (s * c + ch) * hw;
      const T* px = x.ptr() + (s * c + ch) * hw;
      T* pdx = dx_.ptr() + (s * c + ch) * hw;
      for (int64_t i = 0; i < hw; ++i) {
        pda[i] += pdy[i] * px[i];
        pdx[i] = pa[i] * pdy[i];
      }
    }
  }

  ensure_shape(dlogit_, {bsz, 1, h, wd});
  kernels::sigmoid_backward(dattn_.ptr(), attn_.ptr(), dlogit_.ptr(), dattn_.numel());
  const Tensor<T>& dcat = conv.backward(dlogit_);

#pragma omp parallel for schedule(static)
  for (int64_t s = 0; s < bsz; ++s) {
    const T* pdmean = dcat.ptr() + s * 2 * hw;
    const T* pdmax = pdmean + hw;
    const int32_t* pargc = max_channel_.data() + s * hw;
    T* pdx = dx_.ptr() + s * c * hw;
    for (int64_t i = 0; i < hw; ++i) {
      const T g = pdmean[i] / T(c);
      for (int64_t ch = 0; ch < c; ++ch) pdx[ch * hw + i] += g;
      pdx[static_cast<int64_t>(pargc[i]) * hw + i] += pdmax[i];
    }
  }
  return dx_;
}

template <typename T>
void SpatialAttention<T>::collect(ParamRegistry<T>& reg, const std::string& prefix) {
  conv.collect(reg, prefix + ".conv");
}

// --------------------------------------------------------- ResidualBlock

template <typename T>
void ResidualBlock<T>::configure(int64_t channels) {
  conv1.configure(channels, channels, 3, 1);
  bn1.configure(channels);
  conv2.configure(channels, channels, 3, 1);
  bn2.configure(channels);
}

template <typename T>
void ResidualBlock<T>::init(SplitMix64& rng) {
  conv1.init(rng);
  bn1.init();
  conv2.init(rng);
  bn2.init();
}

template <typename T>
const Tensor<T>& ResidualBlock<T>::forward(const Tensor<T>& x, bool train) {
  const Tensor<T>& branch =
      bn2.forward(conv2.forward(relu1_.forward(bn1.forward(conv1.forward(x, train), train)),
                                train),
                  train);
  ensure_shape(sum_, x.shape);
  const int64_t n = x.numel();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) sum_[i] = branch[i] + x[i];
  ensure_shape(out_, x.shape);
  out_mask_.resize(static_cast<size_t>(n));
  kernels::relu_forward(sum_.ptr(), out_.ptr(), out_mask_.data(), n);
  return out_;
}

template <typename T>
const Tensor<T>& ResidualBlock<T>::backward(const Tensor<T>& dy) {
  ensure_shape(dx_, dy.shape);
  const int64_t n = dy.numel();
  // through the output relu
  kernels::relu_backward(dy.ptr(), out_mask_.data(), dx_.ptr(), n);
  // dx_ currently holds d(sum); branch gradient flows through bn2..conv1
  const Tensor<T>& dbranch = conv1.backward(bn1.backward(
      relu1_.backward(conv2.backward(bn2.backward(dx_)))));
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) dx_[i] += dbranch[i];
  return dx_;
}

template <typename T>
void ResidualBlock<T>::collect(ParamRegistry<T>& reg, const std::string& prefix) {
  conv1.collect(reg, prefix + ".conv1");
  bn1.collect(reg, prefix + ".bn1");
  conv2.collect(reg, prefix + ".conv2");
  bn2.collect(reg, prefix + ".bn2");
}

template <typename T>
void ResidualBlock<T>::collect_state(ParamRegistry<T>& reg, const std::string& prefix) {
  conv1.collect_state(reg, prefix + ".conv1");
  bn1.collect_state(reg, prefix + ".bn1");
  conv2.collect_state(reg, prefix + ".conv2");
  bn2.collect_state(reg, prefix + ".bn2");
}

// --------------------------------------------------------------- MlpHead

template <typename T>
void MlpHead<T>::configure(const std::vector<int64_t>& widths) {
  if (widths.size() < 2) throw ConfigError("mlp head needs at least two widths");
  layers.resize(widths.size() - 1);
  relus_.resize(widths.size() - 2);
  for (size_t i = 0; i + 1 < widths.size(); ++i)
    layers[i].configure(widths[i], widths[i + 1]);
}

template <typename T>
void MlpHead<T>::init(SplitMix64& rng) {
  for (auto& l : layers) l.init(rng);
}

template <typename T>
const Tensor<T>& MlpHead<T>::forward(const Tensor<T>& x, bool train) {
  in_shape_ = x.shape;
  flat_ = x;
  flat_.reshape({x.dim(0), x.numel() / x.dim(0)});
  const Tensor<T>* cur = &flat_;
  for (size_t i = 0; i < layers.size(); ++i) {
    cur = &layers[i].forward(*cur, train);
    if (i + 1 < layers.size()) cur = &relus_[i].forward(*cur);
  }
  return *cur;
}

template <typename T>
const Tensor<T>& MlpHead<T>::backward(const Tensor<T>& dy, bool need_dx) {
  const Tensor<T>* cur = &dy;
  for (size_t i = layers.size(); i-- > 0;) {
    const bool first = (i == 0);
    cur = &layers[i].backward(*cur, !first || need_dx);
    if (i > 0) cur = &relus_[i - 1].backward(*cur);
  }
  if (!need_dx) return *cur;
  dx_ = *cur;
  dx_.reshape(in_shape_);
  return dx_;
}

template <typename T>
void MlpHead<T>::collect(ParamRegistry<T>& reg, const std::string& prefix) {
  for (size_t i = 0; i < layers.size(); ++i)
    layers[i].collect(reg, prefix + ".linear" + std::to_string(i));
}

#define NFPOS_INSTANTIATE_NN(T)       \
  template class Conv2d<T>;           \
  template class BatchNorm2d<T>;      \
  template class ReLU<T>;             \
  template class MaxPool2<T>;         \
  template class Linear<T>;           \
  template class CbrUnit<T>;          \
  template class ChannelAttention<T>; \
  template class SpatialAttention<T>; \
  template class ResidualBlock<T>;    \
  template class MlpHead<T>;

NFPOS_INSTANTIATE_NN(float)
NFPOS_INSTANTIATE_NN(double)

}  // namespace nfpos::nn
