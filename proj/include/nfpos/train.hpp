#ifndef NFPOS_TRAIN_HPP
#define NFPOS_TRAIN_HPP

#include <string>

#include "nfpos/dataset.hpp"
#include "nfpos/model.hpp"

namespace nfpos {

enum class LossSpace { Normalized, Raw };

std::string loss_space_name(LossSpace s);
LossSpace loss_space_from_name(const std::string& s);

struct TrainConfig {
  double learning_rate = 3e-4;
  int64_t batch_size = 32;
  int64_t epochs = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 1;
  // Normalized trains on [0,1]^2 codec targets; Raw trains on physical
  // (meters, radians) labels directly.
  LossSpace loss_space = LossSpace::Normalized;
  std::string checkpoint_dir;  // best-held-out snapshot, empty = keep in memory
  bool verbose = false;

  void validate() const;
};

struct EpochRecord {
  int64_t epoch = 0;
  double train_loss = 0.0;
  double holdout_loss = 0.0;
  double seconds = 0.0;
};

struct TrainRecord {
  std::vector<EpochRecord> epochs;
  int64_t best_epoch = -1;
  double best_holdout_loss = 0.0;
  int64_t adam_steps = 0;
  std::string checkpoint_path;
};

// Mean squared error over both output components, averaged over the batch:
// (1/B) sum_i [(r_hat - r)^2 + (eta_hat - eta)^2].
template <typename T>
double mse_loss(const Tensor<T>& preds, const Tensor<T>& labels);

// Also fills grad = dLoss/dPred = 2 (pred - label) / B.
template <typename T>
double mse_loss_grad(const Tensor<T>& preds, const Tensor<T>& labels, Tensor<T>& grad);

// Adam with persistent first/second moment state per parameter tensor.
template <typename T>
class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(nn::ParamRegistry<T>& params);
  int64_t steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

// Copies feature rows of the view (by position range [begin, end)) into a
// [count, 2, H, W] batch plus matching label targets in the requested space.
template <typename T>
void assemble_batch(const DatasetView& view, const std::vector<int64_t>& order, int64_t begin,
                    int64_t end, LossSpace space, Tensor<T>& x, Tensor<T>& y);

// Shuffled mini-batch Adam training with best-held-out checkpointing. The
// model is left holding the best parameters when training completes.
// Non-finite loss aborts with a diagnostic error.
template <typename T>
TrainRecord train(PosModel<T>& model, const DatasetView& train_set,
                  const DatasetView& holdout_set, const TrainConfig& cfg);

// Evaluation-mode loss over a whole view, batched.
template <typename T>
double dataset_loss(PosModel<T>& model, const DatasetView& view, LossSpace space,
                    int64_t batch_size);

void write_train_record_csv(const TrainRecord& rec, const std::string& path);

}  // namespace nfpos

#endif
