#ifndef NFPOS_DATASET_HPP
#define NFPOS_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nfpos/featurize.hpp"
#include "nfpos/geometry.hpp"
#include "nfpos/rng.hpp"

namespace nfpos {

enum class FeatureKind { Covariance, Csi };

std::string feature_kind_name(FeatureKind k);
FeatureKind feature_kind_from_name(const std::string& s);

// One simulated scenario. Defaults reproduce the reference setup:
// 64-element UCA, radius 1 m, 3.5 GHz, UE range (2,10) m, azimuth
// (30,150) degrees, 8000 train + 2000 test samples.
struct ScenarioConfig {
  ArrayConfig array = ArrayConfig::uca(64, 1.0, 3.5e9);
  double r_min = 2.0, r_max = 10.0;          // meters
  double eta_min = deg_to_rad(30.0);         // radians
  double eta_max = deg_to_rad(150.0);
  double snr_db = 20.0;
  int snapshots = 100;                       // K
  FeatureKind feature_kind = FeatureKind::Covariance;
  int64_t n_train = 8000;
  int64_t n_test = 2000;
  uint64_t base_seed = 1;

  void validate() const;
  int64_t total() const { return n_train + n_test; }
  // Feature plane dims [2, H, W]: covariance -> H = W = N, csi -> H = K, W = N.
  int64_t feature_h() const;
  int64_t feature_w() const;
  LabelCodec codec() const;
};

// In-memory dataset. Labels are stored per sample as (range_m, angle_rad),
// matching the (r, eta) output order of the regression head. Tensors are
// float32, the on-disk precision.
struct Dataset {
  ScenarioConfig scenario;
  int64_t count = 0;
  std::vector<float> features;   // count x 2 x H x W
  std::vector<float> labels;     // count x 2
  std::vector<float> scales;     // count
  std::vector<uint64_t> seeds;   // count

  int64_t feature_size() const { return 2 * scenario.feature_h() * scenario.feature_w(); }
  const float* feature_ptr(int64_t i) const { return features.data() + i * feature_size(); }
  PolarPoint label(int64_t i) const {
    return {static_cast<double>(labels[2 * i + 1]), static_cast<double>(labels[2 * i])};
  }
};

// Index view over a dataset (train or test half, or a split result).
struct DatasetView {
  const Dataset* dataset = nullptr;
  std::vector<int64_t> indices;
  int64_t size() const { return static_cast<int64_t>(indices.size()); }
};

DatasetView train_view(const Dataset& ds);
DatasetView test_view(const Dataset& ds);

// Uniform draw of a UE position: r ~ U(r_range), eta ~ U(eta_range).
PolarPoint sample_ue_position(SplitMix64& rng, double r_min, double r_max,
                              double eta_min, double eta_max);

// Builds every sample of the scenario. Sample i derives its position and
// noise streams from seed base_seed + i, so generation is order-independent
// and parallel across samples.
Dataset generate_dataset(const ScenarioConfig& cfg);

// Deterministic permutation split; train gets floor(fraction * n) samples.
std::pair<DatasetView, DatasetView> split(const Dataset& ds, double fraction, uint64_t seed);

// Directory layout: manifest + features.bin/labels.bin/scales.bin/seeds.bin
// (NFPD containers). Manifest records the scenario, shapes, counts, seeds
// and a CRC-32 per tensor file, verified on load.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace nfpos

#endif
