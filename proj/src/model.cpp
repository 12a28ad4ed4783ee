#include "nfpos/model.hpp"

#include <array>

namespace nfpos {

std::string model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Proposed: return "proposed";
    case ModelKind::BaselineCnn: return "baseline-cnn";
    case ModelKind::BaselineMlp: return "baseline-mlp";
  }
  throw ConfigError("bad model kind");
}

ModelKind model_kind_from_name(const std::string& s) {
  if (s == "proposed") return ModelKind::Proposed;
  if (s == "baseline-cnn") return ModelKind::BaselineCnn;
  if (s == "baseline-mlp") return ModelKind::BaselineMlp;
  throw ConfigError("unknown model kind: " + s +
                    " (expected proposed|baseline-cnn|baseline-mlp)");
}

ModelConfig ModelConfig::covariance_default(int64_t num_elements, int64_t width) {
  ModelConfig cfg;
  cfg.in_h = num_elements;
  cfg.in_w = num_elements;
  cfg.width = width;
  cfg.ca_reduced = std::max<int64_t>(1, width / 16);
  cfg.validate();
  return cfg;
}

ModelConfig ModelConfig::csi_variant(int64_t snapshots, int64_t num_elements, int64_t width) {
  ModelConfig cfg;
  cfg.in_h = snapshots;
  cfg.in_w = num_elements;
  cfg.width = width;
  cfg.ca_reduced = std::max<int64_t>(1, width / 16);
  cfg.validate();
  return cfg;
}

void ModelConfig::validate() const {
  if (in_planes != 2) throw ConfigError("model expects 2 input planes");
  if (in_h < 4 || in_w < 4) throw ConfigError("input planes too small");
  if (width < 1 || ca_reduced < 1 || mlp_hidden < 1) throw ConfigError("bad model widths");
  if (sa_kernel % 2 == 0) throw ConfigError("spatial attention kernel must be odd");
}

void ModelConfig::to_kv(KvFile& kv) const {
  kv.set("model.kind", model_kind_name(kind));
  kv.set_i64("model.in_planes", in_planes);
  kv.set_i64("model.in_h", in_h);
  kv.set_i64("model.in_w", in_w);
  kv.set_i64("model.width", width);
  kv.set_i64("model.ca_reduced", ca_reduced);
  kv.set_i64("model.sa_kernel", sa_kernel);
  kv.set_i64("model.mlp_hidden", mlp_hidden);
  kv.set_i64("model.out_dim", out_dim);
  kv.set_i64("model.baseline_h1", baseline_h1);
  kv.set_i64("model.baseline_h2", baseline_h2);
}

ModelConfig ModelConfig::from_kv(const KvFile& kv) {
  ModelConfig cfg;
  cfg.kind = model_kind_from_name(kv.get("model.kind"));
  cfg.in_planes = kv.get_i64("model.in_planes");
  cfg.in_h = kv.get_i64("model.in_h");
  cfg.in_w = kv.get_i64("model.in_w");
  cfg.width = kv.get_i64("model.width");
  cfg.ca_reduced = kv.get_i64("model.ca_reduced");
  cfg.sa_kernel = kv.get_i64("model.sa_kernel");
  cfg.mlp_hidden = kv.get_i64("model.mlp_hidden");
  cfg.out_dim = kv.get_i64("model.out_dim");
  cfg.baseline_h1 = kv.get_i64("model.baseline_h1");
  cfg.baseline_h2 = kv.get_i64("model.baseline_h2");
  cfg.validate();
  return cfg;
}

const std::vector<int64_t>* ShapeTrace::find(const std::string& name) const {
  for (const auto& [n, s] : entries)
    if (n == name) return &s;
  return nullptr;
}

namespace {

template <typename T>
void check_input(const ModelConfig& cfg, const Tensor<T>& x) {
  if (x.rank() != 4 || x.dim(1) != cfg.in_planes || x.dim(2) != cfg.in_h ||
      x.dim(3) != cfg.in_w)
    throw ShapeError("model input " + x.shape_str() + " does not match configured planes [" +
                     std::to_string(cfg.in_planes) + "," + std::to_string(cfg.in_h) + "," +
                     std::to_string(cfg.in_w) + "]");
}

// Proposed network: input block -> channel gate -> two residual stages with
// pooling -> spatial gate -> MLP head. The baseline CNN is the same graph
// with both gates absent.
template <typename T>
class AttnPosNet final : public PosModel<T> {
 public:
  AttnPosNet(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    const bool attention = cfg.kind == ModelKind::Proposed;
    cbr_[0].configure(cfg.in_planes, cfg.width, 3, 1);
    for (int i = 1; i < 4; ++i) cbr_[i].configure(cfg.width, cfg.width, 3, 1);
    if (attention) {
      ca_.configure(cfg.width, cfg.ca_reduced);
      sa_.configure(cfg.sa_kernel);
    }
    for (auto& r : res_) r.configure(cfg.width);
    head_.configure({cfg.flatten_width(), cfg.mlp_hidden, cfg.mlp_hidden, cfg.out_dim});

    SplitMix64 rng(derive_stream_seed(seed, stream_tag::kInit));
    for (auto& u : cbr_) u.init(rng);
    if (attention) ca_.init(rng);
    for (auto& r : res_) r.init(rng);
    if (attention) sa_.init(rng);
    head_.init(rng);
  }

  const Tensor<T>& forward(const Tensor<T>& x, bool train) override {
    check_input(cfg_, x);
    const bool attention = cfg_.kind == ModelKind::Proposed;
    const Tensor<T>* cur = &x;
    for (auto& u : cbr_) cur = &u.forward(*cur, train);
    if (attention) cur = &ca_.forward(*cur, train);
    cur = &res_[0].forward(*cur, train);
    cur = &res_[1].forward(*cur, train);
    cur = &pool1_.forward(*cur);
    cur = &res_[2].forward(*cur, train);
    cur = &res_[3].forward(*cur, train);
    cur = &pool2_.forward(*cur);
    if (attention) cur = &sa_.forward(*cur, train);
    return head_.forward(*cur, train);
  }

  void backward(const Tensor<T>& dout) override {
    const bool attention = cfg_.kind == ModelKind::Proposed;
    const Tensor<T>* cur = &head_.backward(dout);
    if (attention) cur = &sa_.backward(*cur);
    cur = &pool2_.backward(*cur);
    cur = &res_[3].backward(*cur);
    cur = &res_[2].backward(*cur);
    cur = &pool1_.backward(*cur);
    cur = &res_[1].backward(*cur);
    cur = &res_[0].backward(*cur);
    if (attention) cur = &ca_.backward(*cur);
    for (int i = 3; i > 0; --i) cur = &cbr_[i].backward(*cur);
    cbr_[0].backward(*cur, /*need_dx=*/false);
  }

  nn::ParamRegistry<T> params() override {
    nn::ParamRegistry<T> reg;
    for (int i = 0; i < 4; ++i) cbr_[i].collect(reg, "input_block.cbr" + std::to_string(i));
    if (cfg_.kind == ModelKind::Proposed) ca_.collect(reg, "ca");
    for (int i = 0; i < 4; ++i) res_[i].collect(reg, "dfeb.res" + std::to_string(i));
    if (cfg_.kind == ModelKind::Proposed) sa_.collect(reg, "sa");
    head_.collect(reg, "mlp");
    return reg;
  }

  nn::ParamRegistry<T> state() override {
    nn::ParamRegistry<T> reg;
    for (int i = 0; i < 4; ++i)
      cbr_[i].collect_state(reg, "input_block.cbr" + std::to_string(i));
    if (cfg_.kind == ModelKind::Proposed) ca_.collect(reg, "ca");
    for (int i = 0; i < 4; ++i) res_[i].collect_state(reg, "dfeb.res" + std::to_string(i));
    if (cfg_.kind == ModelKind::Proposed) sa_.collect(reg, "sa");
    head_.collect(reg, "mlp");
    return reg;
  }

  ShapeTrace traced_forward(const Tensor<T>& x) override {
    check_input(cfg_, x);
    const bool attention = cfg_.kind == ModelKind::Proposed;
    const int64_t bsz = x.dim(0);
    ShapeTrace trace;
    trace.entries.push_back({"input", x.shape});
    const Tensor<T>* cur = &x;
    for (auto& u : cbr_) cur = &u.forward(*cur, false);
    trace.entries.push_back({"input_block", cur->shape});
    if (attention) {
      cur = &ca_.forward(*cur, false);
      trace.entries.push_back({"ca.avg_pool", {bsz, cfg_.width, 1, 1}});
      trace.entries.push_back({"ca.max_pool", {bsz, cfg_.width, 1, 1}});
      trace.entries.push_back({"ca.conv_units", {bsz, cfg_.width, 1, 1}});
      trace.entries.push_back({"ca.gate_apply", cur->shape});
    }
    cur = &res_[0].forward(*cur, false);
    cur = &res_[1].forward(*cur, false);
    cur = &pool1_.forward(*cur);
    cur = &res_[2].forward(*cur, false);
    cur = &res_[3].forward(*cur, false);
    cur = &pool2_.forward(*cur);
    trace.entries.push_back({"dfeb", cur->shape});
    if (attention) {
      const std::vector<int64_t> plane = {bsz, 1, cur->dim(2), cur->dim(3)};
      cur = &sa_.forward(*cur, false);
      trace.entries.push_back({"sa.avg_pool", plane});
      trace.entries.push_back({"sa.max_pool", plane});
      trace.entries.push_back({"sa.conv", sa_.attention().shape});
      trace.entries.push_back({"sa.gate_apply", cur->shape});
    }
    const Tensor<T>& out = head_.forward(*cur, false);
    trace.entries.push_back({"mlp.flatten", {bsz, cfg_.flatten_width()}});
    trace.entries.push_back({"mlp.linear", out.shape});
    return trace;
  }

  const ModelConfig& config() const override { return cfg_; }

  nn::ChannelAttention<T>& channel_attention() { return ca_; }
  nn::SpatialAttention<T>& spatial_attention() { return sa_; }

 private:
  ModelConfig cfg_;
  std::array<nn::CbrUnit<T>, 4> cbr_;
  nn::ChannelAttention<T> ca_;
  std::array<nn::ResidualBlock<T>, 4> res_;
  nn::MaxPool2<T> pool1_, pool2_;
  nn::SpatialAttention<T> sa_;
  nn::MlpHead<T> head_;
};

template <typename T>
class BaselineMlpNet final : public PosModel<T> {
 public:
  BaselineMlpNet(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    const int64_t in = cfg.in_planes * cfg.in_h * cfg.in_w;
    head_.configure({in, cfg.baseline_h1, cfg.baseline_h2, cfg.out_dim});
    SplitMix64 rng(derive_stream_seed(seed, stream_tag::kInit));
    head_.init(rng);
  }

  const Tensor<T>& forward(const Tensor<T>& x, bool train) override {
    check_input(cfg_, x);
    return head_.forward(x, train);
  }

  void backward(const Tensor<T>& dout) override { head_.backward(dout, false); }

  nn::ParamRegistry<T> params() override {
    nn::ParamRegistry<T> reg;
    head_.collect(reg, "mlp");
    return reg;
  }

  nn::ParamRegistry<T> state() override { return params(); }

  ShapeTrace traced_forward(const Tensor<T>& x) override {
    ShapeTrace trace;
    trace.entries.push_back({"input", x.shape});
    const Tensor<T>& out = forward(x, false);
    trace.entries.push_back({"mlp.linear", out.shape});
    return trace;
  }

  const ModelConfig& config() const override { return cfg_; }

 private:
  ModelConfig cfg_;
  nn::MlpHead<T> head_;
};

}  // namespace

template <typename T>
std::unique_ptr<PosModel<T>> make_model(const ModelConfig& cfg, uint64_t init_seed) {
  if (cfg.kind == ModelKind::BaselineMlp)
    return std::make_unique<BaselineMlpNet<T>>(cfg, init_seed);
  return std::make_unique<AttnPosNet<T>>(cfg, init_seed);
}

template <typename T>
AttentionProbe<T> probe_attention(PosModel<T>& model) {
  AttentionProbe<T> probe;
  if (model.config().kind != ModelKind::Proposed) return probe;
  auto& net = dynamic_cast<AttnPosNet<T>&>(model);
  probe.channel = &net.channel_attention().attention();
  probe.spatial = &net.spatial_attention().attention();
  return probe;
}

FootprintReport parameter_footprint(const ModelConfig& cfg) {
  auto model = make_model<float>(cfg, 0);
  FootprintReport report;
  report.parameter_count = model->param_count();
  report.bytes_f32 = 4 * report.parameter_count;
  return report;
}

template std::unique_ptr<PosModel<float>> make_model<float>(const ModelConfig&, uint64_t);
template std::unique_ptr<PosModel<double>> make_model<double>(const ModelConfig&, uint64_t);
template AttentionProbe<float> probe_attention<float>(PosModel<float>&);
template AttentionProbe<double> probe_attention<double>(PosModel<double>&);

}  // namespace nfpos
