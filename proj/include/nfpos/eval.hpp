#ifndef NFPOS_EVAL_HPP
#define NFPOS_EVAL_HPP

#include <string>
#include <vector>

#include "nfpos/train.hpp"

namespace nfpos {

// Planar Euclidean distance between two polar points (law of cosines):
// sqrt(r1^2 + r2^2 - 2 r1 r2 cos(a1 - a2)).
double positioning_error(const PolarPoint& est, const PolarPoint& truth);

// Empirical CDF: sorted distinct error values paired with cumulative
// probability i/n (right-continuous, ties collapsed).
std::vector<std::pair<double, double>> cdf(const std::vector<double>& errors);

struct EvalReport {
  std::string scenario;            // free-form run descriptor
  std::vector<double> errors_m;    // per-sample positioning errors
  double mean_m = 0.0;
  double median_m = 0.0;
  double rmse_m = 0.0;
  double mean_db = 0.0;            // 10 log10(mean / 1 m)
  double median_db = 0.0;
  std::vector<std::pair<double, double>> cdf_points;
};

EvalReport make_report(std::vector<double> errors, const std::string& scenario);

// 10 log10(mean_b / mean_a): positive when run b is worse than run a.
double db_gap(const EvalReport& a, const EvalReport& b);
double db_gap_median(const EvalReport& a, const EvalReport& b);

// Maps dataset samples to physical position estimates. Implemented by the
// trained-model adapter below and by test stubs (perfect oracle, constant).
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<PolarPoint> predict(const Dataset& ds,
                                          const std::vector<int64_t>& indices) = 0;
};

template <typename T>
class ModelPredictor final : public Predictor {
 public:
  ModelPredictor(PosModel<T>& model, LossSpace space, int64_t batch_size = 32)
      : model_(model), space_(space), batch_size_(batch_size) {}
  std::vector<PolarPoint> predict(const Dataset& ds,
                                  const std::vector<int64_t>& indices) override;

 private:
  PosModel<T>& model_;
  LossSpace space_;
  int64_t batch_size_;
};

// Returns the dataset ground truth; the CLI --oracle test hook.
class PerfectPredictor final : public Predictor {
 public:
  std::vector<PolarPoint> predict(const Dataset& ds,
                                  const std::vector<int64_t>& indices) override;
};

EvalReport evaluate(Predictor& predictor, const DatasetView& view,
                    const std::string& scenario);

// errors.csv, summary.csv, cdf.csv; header row, 9 significant digits.
void export_report(const EvalReport& report, const std::string& dir);
EvalReport load_report(const std::string& dir);

}  // namespace nfpos

#endif
