#include "nfpos/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "nfpos/checkpoint.hpp"

namespace nfpos {

std::string loss_space_name(LossSpace s) {
  return s == LossSpace::Normalized ? "normalized" : "raw";
}

LossSpace loss_space_from_name(const std::string& s) {
  if (s == "normalized") return LossSpace::Normalized;
  if (s == "raw") return LossSpace::Raw;
  throw ConfigError("unknown loss space: " + s + " (expected normalized|raw)");
}

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw ConfigError("learning rate must be >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (epochs < 1) throw ConfigError("epoch count must be >= 1");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1))
    throw ConfigError("Adam betas must lie in [0,1)");
  if (adam_eps <= 0) throw ConfigError("Adam epsilon must be positive");
}

template <typename T>
double mse_loss(const Tensor<T>& preds, const Tensor<T>& labels) {
  if (preds.shape != labels.shape)
    throw ShapeError("mse_loss: shape mismatch " + preds.shape_str() + " vs " +
                     labels.shape_str());
  if (preds.rank() != 2) throw ShapeError("mse_loss expects [B, D] tensors");
  const int64_t bsz = preds.dim(0);
  double acc = 0.0;
  for (int64_t i = 0; i < preds.numel(); ++i) {
    const double d = static_cast<double>(preds[i]) - static_cast<double>(labels[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(bsz);
}

template <typename T>
double mse_loss_grad(const Tensor<T>& preds, const Tensor<T>& labels, Tensor<T>& grad) {
  const double loss = mse_loss(preds, labels);
  nn::ensure_shape(grad, preds.shape);
  const T scale = T(2) / static_cast<T>(preds.dim(0));
  for (int64_t i = 0; i < preds.numel(); ++i) grad[i] = scale * (preds[i] - labels[i]);
  return loss;
}

template <typename T>
void Adam<T>::step(nn::ParamRegistry<T>& params) {
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i] = Tensor<T>(params[i].value->shape);
      v_[i] = Tensor<T>(params[i].value->shape);
    }
  }
  ++t_;
  for (size_t i = 0; i < params.size(); ++i) {
    if (!params[i].grad) continue;
    kernels::adam_step(params[i].value->ptr(), params[i].grad->ptr(), m_[i].ptr(), v_[i].ptr(),
                       params[i].value->numel(), static_cast<T>(lr_), static_cast<T>(beta1_),
                       static_cast<T>(beta2_), static_cast<T>(eps_), t_);
  }
}

template <typename T>
void assemble_batch(const DatasetView& view, const std::vector<int64_t>& order, int64_t begin,
                    int64_t end, LossSpace space, Tensor<T>& x, Tensor<T>& y) {
  const Dataset& ds = *view.dataset;
  const int64_t count = end - begin;
  const int64_t h = ds.scenario.feature_h(), w = ds.scenario.feature_w();
  const int64_t fsize = ds.feature_size();
  const LabelCodec codec = ds.scenario.codec();

  nn::ensure_shape(x, {count, 2, h, w});
  nn::ensure_shape(y, {count, 2});
  for (int64_t i = 0; i < count; ++i) {
    const int64_t idx = view.indices[static_cast<size_t>(order[static_cast<size_t>(begin + i)])];
    const float* src = ds.feature_ptr(idx);
    T* dst = x.ptr() + i * fsize;
    for (int64_t j = 0; j < fsize; ++j) dst[j] = static_cast<T>(src[j]);
    const PolarPoint label = ds.label(idx);
    if (space == LossSpace::Normalized) {
      const auto enc = codec.encode(label);
      y.at2(i, 0) = static_cast<T>(enc[0]);
      y.at2(i, 1) = static_cast<T>(enc[1]);
    } else {
      y.at2(i, 0) = static_cast<T>(label.range_m);
      y.at2(i, 1) = static_cast<T>(label.angle_rad);
    }
  }
}

template <typename T>
double dataset_loss(PosModel<T>& model, const DatasetView& view, LossSpace space,
                    int64_t batch_size) {
  std::vector<int64_t> order(static_cast<size_t>(view.size()));
  std::iota(order.begin(), order.end(), 0);
  Tensor<T> x, y;
  double acc = 0.0;
  for (int64_t begin = 0; begin < view.size(); begin += batch_size) {
    const int64_t end = std::min(view.size(), begin + batch_size);
    assemble_batch(view, order, begin, end, space, x, y);
    const Tensor<T>& preds = model.forward(x, false);
    acc += mse_loss(preds, y) * static_cast<double>(end - begin);
  }
  return acc / static_cast<double>(view.size());
}

template <typename T>
TrainRecord train(PosModel<T>& model, const DatasetView& train_set,
                  const DatasetView& holdout_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.size() < 1) throw DomainError("empty training set");
  const Dataset& ds = *train_set.dataset;
  if (ds.scenario.feature_h() != model.config().in_h ||
      ds.scenario.feature_w() != model.config().in_w)
    throw ShapeError("dataset feature planes [2," + std::to_string(ds.scenario.feature_h()) +
                     "," + std::to_string(ds.scenario.feature_w()) +
                     "] do not match model input [2," + std::to_string(model.config().in_h) +
                     "," + std::to_string(model.config().in_w) + "]");

  Adam<T> opt(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps);
  auto params = model.params();

  TrainRecord rec;
  rec.best_holdout_loss = std::numeric_limits<double>::infinity();

  // In-memory snapshot of the best parameters (including BN statistics).
  std::vector<std::vector<T>> best_state;
  auto state = model.state();
  auto snapshot = [&] {
    best_state.resize(state.size());
    for (size_t i = 0; i < state.size(); ++i) best_state[i] = state[i].value->data;
  };
  auto restore = [&] {
    for (size_t i = 0; i < state.size(); ++i) state[i].value->data = best_state[i];
  };

  std::vector<int64_t> order(static_cast<size_t>(train_set.size()));
  std::iota(order.begin(), order.end(), 0);
  Tensor<T> x, y, grad;

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    // per-epoch derived shuffle seed
    SplitMix64 rng(derive_stream_seed(cfg.seed + static_cast<uint64_t>(epoch),
                                      stream_tag::kShuffle));
    for (int64_t i = train_set.size() - 1; i > 0; --i) {
      const int64_t j = static_cast<int64_t>(rng.next_u64() % static_cast<uint64_t>(i + 1));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }

    double epoch_loss = 0.0;
    for (int64_t begin = 0; begin < train_set.size(); begin += cfg.batch_size) {
      const int64_t end = std::min(train_set.size(), begin + cfg.batch_size);
      assemble_batch(train_set, order, begin, end, cfg.loss_space, x, y);
      model.zero_grad();
      const Tensor<T>& preds = model.forward(x, true);
      const double loss = mse_loss_grad(preds, y, grad);
      if (!std::isfinite(loss))
        throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                    " step " + std::to_string(opt.steps_taken()));
      model.backward(grad);
      opt.step(params);
      epoch_loss += loss * static_cast<double>(end - begin);
    }
    epoch_loss /= static_cast<double>(train_set.size());

    const double holdout_loss =
        holdout_set.size() > 0 ? dataset_loss(model, holdout_set, cfg.loss_space, cfg.batch_size)
                               : epoch_loss;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.epochs.push_back({epoch, epoch_loss, holdout_loss, secs});

    if (holdout_loss < rec.best_holdout_loss) {
      rec.best_holdout_loss = holdout_loss;
      rec.best_epoch = epoch;
      snapshot();
    }
    if (cfg.verbose)
      std::fprintf(stderr, "epoch %3lld  train %.6e  holdout %.6e  (%.1fs)\n",
                   static_cast<long long>(epoch), epoch_loss, holdout_loss, secs);
  }
  rec.adam_steps = opt.steps_taken();

  if (rec.best_epoch >= 0) restore();
  if (!cfg.checkpoint_dir.empty()) {
    KvFile prov;
    prov.set_f64("train.learning_rate", cfg.learning_rate);
    prov.set_i64("train.batch_size", cfg.batch_size);
    prov.set_i64("train.epochs", cfg.epochs);
    prov.set_u64("train.seed", cfg.seed);
    prov.set("train.loss_space", loss_space_name(cfg.loss_space));
    prov.set_i64("train.best_epoch", rec.best_epoch);
    prov.set_f64("train.best_holdout_loss", rec.best_holdout_loss);
    save_checkpoint(model, cfg.checkpoint_dir, prov);
    rec.checkpoint_path = cfg.checkpoint_dir;
  }
  return rec;
}

void write_train_record_csv(const TrainRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "epoch,train_loss,holdout_loss,seconds\n";
  char buf[160];
  for (const auto& e : rec.epochs) {
    std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.9g\n", static_cast<long long>(e.epoch),
                  e.train_loss, e.holdout_loss, e.seconds);
    out << buf;
  }
  if (!out) throw IoError("error while writing " + path);
}

#define NFPOS_INSTANTIATE_TRAIN(T)                                                        \
  template double mse_loss<T>(const Tensor<T>&, const Tensor<T>&);                        \
  template double mse_loss_grad<T>(const Tensor<T>&, const Tensor<T>&, Tensor<T>&);      \
  template class Adam<T>;                                                                 \
  template void assemble_batch<T>(const DatasetView&, const std::vector<int64_t>&,       \
                                  int64_t, int64_t, LossSpace, Tensor<T>&, Tensor<T>&);  \
  template double dataset_loss<T>(PosModel<T>&, const DatasetView&, LossSpace, int64_t); \
  template TrainRecord train<T>(PosModel<T>&, const DatasetView&, const DatasetView&,    \
                                const TrainConfig&);

NFPOS_INSTANTIATE_TRAIN(float)
NFPOS_INSTANTIATE_TRAIN(double)

}  // namespace nfpos
