#ifndef NFPOS_MODEL_HPP
#define NFPOS_MODEL_HPP

#include <memory>
#include <utility>

#include "nfpos/kv.hpp"
#include "nfpos/nn.hpp"

namespace nfpos {

enum class ModelKind { Proposed, BaselineCnn, BaselineMlp };

std::string model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& s);

// Architecture hyperparameters. The covariance default is the reference
// network: 2->128 input block, 128->8->128 channel gate, four residual
// blocks with two pool stages (64 -> 32 -> 16), 7x7 spatial gate, MLP head
// 32768 -> 128 -> 128 -> 2. The CSI variant swaps the input plane geometry
// to [2, K, N] and resizes the flatten width accordingly.
struct ModelConfig {
  ModelKind kind = ModelKind::Proposed;
  int64_t in_planes = 2;
  int64_t in_h = 64;
  int64_t in_w = 64;
  int64_t width = 128;
  int64_t ca_reduced = 8;
  int64_t sa_kernel = 7;
  int64_t mlp_hidden = 128;
  int64_t out_dim = 2;
  int64_t baseline_h1 = 512;  // baseline MLP hidden widths
  int64_t baseline_h2 = 256;

  // Two ceil-mode 2x2 pool stages.
  int64_t pooled_h() const { return (in_h + 3) / 4; }
  int64_t pooled_w() const { return (in_w + 3) / 4; }
  int64_t flatten_width() const { return width * pooled_h() * pooled_w(); }

  static ModelConfig covariance_default(int64_t num_elements = 64, int64_t width = 128);
  static ModelConfig csi_variant(int64_t snapshots, int64_t num_elements = 64,
                                 int64_t width = 128);

  void validate() const;
  void to_kv(KvFile& kv) const;
  static ModelConfig from_kv(const KvFile& kv);
  bool operator==(const ModelConfig&) const = default;
};

// Named intermediate output shapes of an evaluation-mode forward pass.
struct ShapeTrace {
  std::vector<std::pair<std::string, std::vector<int64_t>>> entries;
  const std::vector<int64_t>* find(const std::string& name) const;
};

template <typename T>
class PosModel {
 public:
  virtual ~PosModel() = default;

  // Returns [B, out_dim] predictions in normalized label units.
  virtual const Tensor<T>& forward(const Tensor<T>& x, bool train) = 0;
  // dout = dLoss/dOutput, shape [B, out_dim]. Accumulates parameter grads.
  virtual void backward(const Tensor<T>& dout) = 0;
  virtual nn::ParamRegistry<T> params() = 0;
  // Parameters plus batch-norm running statistics; the checkpoint payload.
  virtual nn::ParamRegistry<T> state() = 0;
  virtual ShapeTrace traced_forward(const Tensor<T>& x) = 0;
  virtual const ModelConfig& config() const = 0;

  void zero_grad() {
    for (auto& p : params())
      if (p.grad) p.grad->fill(T(0));
  }
  int64_t param_count() {
    int64_t n = 0;
    for (auto& p : params()) n += p.value->numel();
    return n;
  }
};

template <typename T>
std::unique_ptr<PosModel<T>> make_model(const ModelConfig& cfg, uint64_t init_seed);

// The attention gates of the proposed model, exposed for inspection.
template <typename T>
struct AttentionProbe {
  const Tensor<T>* channel = nullptr;  // [B, C]
  const Tensor<T>* spatial = nullptr;  // [B, 1, H, W]
};
template <typename T>
AttentionProbe<T> probe_attention(PosModel<T>& model);

struct FootprintReport {
  int64_t parameter_count = 0;
  int64_t bytes_f32 = 0;  // 32-bit storage footprint
};

FootprintReport parameter_footprint(const ModelConfig& cfg);

}  // namespace nfpos

#endif
