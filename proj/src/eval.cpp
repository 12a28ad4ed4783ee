#include "nfpos/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nfpos {

double positioning_error(const PolarPoint& est, const PolarPoint& truth) {
  const double d2 = est.range_m * est.range_m + truth.range_m * truth.range_m -
                    2.0 * est.range_m * truth.range_m *
                        std::cos(est.angle_rad - truth.angle_rad);
  return std::sqrt(std::max(d2, 0.0));
}

std::vector<std::pair<double, double>> cdf(const std::vector<double>& errors) {
  if (errors.empty()) throw DomainError("cdf of an empty error list");
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> points;
  for (size_t i = 0; i < sorted.size(); ++i) {
    // collapse ties onto the last occurrence so probabilities stay i/n
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    points.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
  }
  return points;
}

namespace {
double median_of_sorted(const std::vector<double>& sorted) {
  const size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}
}  // namespace

EvalReport make_report(std::vector<double> errors, const std::string& scenario) {
  if (errors.empty()) throw DomainError("cannot build a report from zero errors");
  EvalReport r;
  r.scenario = scenario;
  r.errors_m = std::move(errors);
  double acc = 0.0, acc2 = 0.0;
  for (double e : r.errors_m) {
    if (e < 0.0) throw DomainError("negative positioning error");
    acc += e;
    acc2 += e * e;
  }
  const double n = static_cast<double>(r.errors_m.size());
  r.mean_m = acc / n;
  r.rmse_m = std::sqrt(acc2 / n);
  std::vector<double> sorted = r.errors_m;
  std::sort(sorted.begin(), sorted.end());
  r.median_m = median_of_sorted(sorted);
  r.cdf_points = cdf(r.errors_m);
  r.mean_db = r.mean_m > 0.0 ? 10.0 * std::log10(r.mean_m) : -INFINITY;
  r.median_db = r.median_m > 0.0 ? 10.0 * std::log10(r.median_m) : -INFINITY;
  return r;
}

double db_gap(const EvalReport& a, const EvalReport& b) {
  if (a.mean_m <= 0.0 || b.mean_m <= 0.0)
    throw DomainError("db gap undefined for zero mean error");
  return 10.0 * std::log10(b.mean_m / a.mean_m);
}

double db_gap_median(const EvalReport& a, const EvalReport& b) {
  if (a.median_m <= 0.0 || b.median_m <= 0.0)
    throw DomainError("db gap undefined for zero median error");
  return 10.0 * std::log10(b.median_m / a.median_m);
}

template <typename T>
std::vector<PolarPoint> ModelPredictor<T>::predict(const Dataset& ds,
                                                   const std::vector<int64_t>& indices) {
  const LabelCodec codec = ds.scenario.codec();
  const int64_t h = ds.scenario.feature_h(), w = ds.scenario.feature_w();
  const int64_t fsize = ds.feature_size();
  std::vector<PolarPoint> out(indices.size());

  Tensor<T> x;
  const int64_t n = static_cast<int64_t>(indices.size());
  for (int64_t begin = 0; begin < n; begin += batch_size_) {
    const int64_t end = std::min(n, begin + batch_size_);
    nn::ensure_shape(x, {end - begin, 2, h, w});
    for (int64_t i = begin; i < end; ++i) {
      const float* src = ds.feature_ptr(indices[static_cast<size_t>(i)]);
      T* dst = x.ptr() + (i - begin) * fsize;
      for (int64_t j = 0; j < fsize; ++j) dst[j] = static_cast<T>(src[j]);
    }
    const Tensor<T>& preds = model_.forward(x, false);
    for (int64_t i = begin; i < end; ++i) {
      const double p0 = static_cast<double>(preds.at2(i - begin, 0));
      const double p1 = static_cast<double>(preds.at2(i - begin, 1));
      out[static_cast<size_t>(i)] = space_ == LossSpace::Normalized
                                        ? codec.decode(p0, p1)
                                        : PolarPoint{p1, p0};
    }
  }
  return out;
}

std::vector<PolarPoint> PerfectPredictor::predict(const Dataset& ds,
                                                  const std::vector<int64_t>& indices) {
  std::vector<PolarPoint> out(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) out[i] = ds.label(indices[i]);
  return out;
}

EvalReport evaluate(Predictor& predictor, const DatasetView& view,
                    const std::string& scenario) {
  if (view.size() < 1) throw DomainError("cannot evaluate an empty view");
  const std::vector<PolarPoint> estimates = predictor.predict(*view.dataset, view.indices);
  std::vector<double> errors(estimates.size());
  for (size_t i = 0; i < estimates.size(); ++i)
    errors[i] = positioning_error(estimates[i], view.dataset->label(view.indices[i]));
  return make_report(std::move(errors), scenario);
}

namespace {
std::string fmt9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}
}  // namespace

void export_report(const EvalReport& report, const std::string& dir) {
  if (report.errors_m.empty()) throw DomainError("refusing to export an empty report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create report directory " + dir + ": " + ec.message());

  {
    std::ofstream out(dir + "/errors.csv");
    if (!out) throw IoError("cannot write " + dir + "/errors.csv");
    out << "error_m\n";
    for (double e : report.errors_m) out << fmt9(e) << "\n";
  }
  {
    std::ofstream out(dir + "/summary.csv");
    if (!out) throw IoError("cannot write " + dir + "/summary.csv");
    out << "scenario,count,mean_m,median_m,rmse_m,mean_db,median_db\n";
    out << report.scenario << "," << report.errors_m.size() << "," << fmt9(report.mean_m)
        << "," << fmt9(report.median_m) << "," << fmt9(report.rmse_m) << ","
        << fmt9(report.mean_db) << "," << fmt9(report.median_db) << "\n";
  }
  {
    std::ofstream out(dir + "/cdf.csv");
    if (!out) throw IoError("cannot write " + dir + "/cdf.csv");
    out << "error_m,probability\n";
    for (const auto& [v, p] : report.cdf_points) out << fmt9(v) << "," << fmt9(p) << "\n";
  }
}

EvalReport load_report(const std::string& dir) {
  std::ifstream in(dir + "/errors.csv");
  if (!in) throw IoError("cannot open " + dir + "/errors.csv");
  std::string line;
  if (!std::getline(in, line) || line != "error_m")
    throw DataError("unexpected header in " + dir + "/errors.csv");
  std::vector<double> errors;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    errors.push_back(std::stod(line));
  }

  std::ifstream sm(dir + "/summary.csv");
  if (!sm) throw IoError("cannot open " + dir + "/summary.csv");
  std::string header, row;
  if (!std::getline(sm, header) || !std::getline(sm, row))
    throw DataError("malformed " + dir + "/summary.csv");
  const std::string scenario = row.substr(0, row.find(','));

  return make_report(std::move(errors), scenario);
}

template class ModelPredictor<float>;
template class ModelPredictor<double>;

}  // namespace nfpos
