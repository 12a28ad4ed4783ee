#include "nfpos/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "nfpos/kv.hpp"
#include "nfpos/rng.hpp"
#include "nfpos/tensor_io.hpp"

namespace fs = std::filesystem;

namespace nfpos {

std::string feature_kind_name(FeatureKind k) {
  return k == FeatureKind::Covariance ? "covariance" : "csi";
}

FeatureKind feature_kind_from_name(const std::string& s) {
  if (s == "covariance") return FeatureKind::Covariance;
  if (s == "csi") return FeatureKind::Csi;
  throw ConfigError("unknown feature kind: " + s + " (expected covariance|csi)");
}

void ScenarioConfig::validate() const {
  array.validate();
  if (!(r_min < r_max) || r_min <= 0.0) throw ConfigError("invalid UE range interval");
  if (!(eta_min < eta_max)) throw ConfigError("invalid UE azimuth interval");
  if (snapshots < 1) throw ConfigError("snapshot count must be >= 1");
  if (n_train < 1 || n_test < 0) throw ConfigError("sample counts must be positive");
}

int64_t ScenarioConfig::feature_h() const {
  return feature_kind == FeatureKind::Covariance ? array.num_elements : snapshots;
}

int64_t ScenarioConfig::feature_w() const { return array.num_elements; }

LabelCodec ScenarioConfig::codec() const {
  LabelCodec c;
  c.r_min = r_min;
  c.r_max = r_max;
  c.eta_min = eta_min;
  c.eta_max = eta_max;
  return c;
}

DatasetView train_view(const Dataset& ds) {
  DatasetView v;
  v.dataset = &ds;
  v.indices.resize(static_cast<size_t>(ds.scenario.n_train));
  std::iota(v.indices.begin(), v.indices.end(), 0);
  return v;
}

DatasetView test_view(const Dataset& ds) {
  DatasetView v;
  v.dataset = &ds;
  v.indices.resize(static_cast<size_t>(ds.scenario.n_test));
  std::iota(v.indices.begin(), v.indices.end(), ds.scenario.n_train);
  return v;
}

PolarPoint sample_ue_position(SplitMix64& rng, double r_min, double r_max,
                              double eta_min, double eta_max) {
  if (r_min > r_max || eta_min > eta_max) throw DomainError("invalid sampling ranges");
  PolarPoint p;
  p.range_m = rng.next_uniform(r_min, r_max);
  p.angle_rad = rng.next_uniform(eta_min, eta_max);
  return p;
}

Dataset generate_dataset(const ScenarioConfig& cfg) {
  cfg.validate();
  const int64_t n = cfg.total();
  const ElementLayout layout = build_layout(cfg.array);
  Dataset ds;
  ds.scenario = cfg;
  ds.count = n;
  const int64_t fsize = ds.feature_size();
  ds.features.resize(static_cast<size_t>(n * fsize));
  ds.labels.resize(static_cast<size_t>(n * 2));
  ds.scales.resize(static_cast<size_t>(n));
  ds.seeds.resize(static_cast<size_t>(n));

#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    const uint64_t seed = cfg.base_seed + static_cast<uint64_t>(i);
    SplitMix64 pos_rng(derive_stream_seed(seed, stream_tag::kPosition));
    const PolarPoint ue =
        sample_ue_position(pos_rng, cfg.r_min, cfg.r_max, cfg.eta_min, cfg.eta_max);

    const ChannelVector h = spherical_channel(layout, ue, cfg.array.wavelength_m);
    const SnapshotSet snaps = synthesize_snapshots(
        h, cfg.snapshots, cfg.snr_db, derive_stream_seed(seed, stream_tag::kNoise));

    const Tensor<double>* planes = nullptr;
    double scale = 1.0;
    CovarianceFeature cov_f;
    CsiFeature csi_f;
    if (cfg.feature_kind == FeatureKind::Covariance) {
      cov_f = covariance_to_feature(sample_covariance(snaps));
      planes = &cov_f.planes;
      scale = cov_f.scale;
    } else {
      csi_f = csi_to_feature(snaps);
      planes = &csi_f.planes;
      scale = csi_f.scale;
    }

    float* dst = ds.features.data() + i * fsize;
    for (int64_t j = 0; j < fsize; ++j) dst[j] = static_cast<float>((*planes)[j]);
    ds.labels[static_cast<size_t>(2 * i)] = static_cast<float>(ue.range_m);
    ds.labels[static_cast<size_t>(2 * i + 1)] = static_cast<float>(ue.angle_rad);
    ds.scales[static_cast<size_t>(i)] = static_cast<float>(scale);
    ds.seeds[static_cast<size_t>(i)] = seed;
  }
  return ds;
}

std::pair<DatasetView, DatasetView> split(const Dataset& ds, double fraction, uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw DomainError("split fraction must lie in (0,1)");
  std::vector<int64_t> perm(static_cast<size_t>(ds.count));
  std::iota(perm.begin(), perm.end(), 0);
  SplitMix64 rng(derive_stream_seed(seed, stream_tag::kShuffle));
  // Fisher-Yates with the project RNG so the permutation is seed-stable.
  for (int64_t i = ds.count - 1; i > 0; --i) {
    const int64_t j = static_cast<int64_t>(rng.next_u64() % static_cast<uint64_t>(i + 1));
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  const int64_t n_train = static_cast<int64_t>(fraction * static_cast<double>(ds.count));
  DatasetView train, test;
  train.dataset = &ds;
  test.dataset = &ds;
  train.indices.assign(perm.begin(), perm.begin() + n_train);
  test.indices.assign(perm.begin() + n_train, perm.end());
  return {train, test};
}

namespace {
constexpr int kManifestVersion = 1;

void write_scenario(KvFile& kv, const ScenarioConfig& cfg) {
  kv.set("array.kind", cfg.array.kind == ArrayKind::UCA ? "uca" : "ula");
  kv.set_i64("array.num_elements", cfg.array.num_elements);
  kv.set_f64("array.radius_m", cfg.array.radius_m);
  kv.set_f64("array.spacing_m", cfg.array.spacing_m);
  kv.set_f64("array.wavelength_m", cfg.array.wavelength_m);
  kv.set_f64("ue.r_min_m", cfg.r_min);
  kv.set_f64("ue.r_max_m", cfg.r_max);
  kv.set_f64("ue.eta_min_rad", cfg.eta_min);
  kv.set_f64("ue.eta_max_rad", cfg.eta_max);
  kv.set_f64("snr_db", cfg.snr_db);
  kv.set_i64("snapshots", cfg.snapshots);
  kv.set("feature_kind", feature_kind_name(cfg.feature_kind));
  kv.set_i64("n_train", cfg.n_train);
  kv.set_i64("n_test", cfg.n_test);
  kv.set_u64("base_seed", cfg.base_seed);
}

ScenarioConfig read_scenario(const KvFile& kv) {
  ScenarioConfig cfg;
  cfg.array.kind = kv.get("array.kind") == "uca" ? ArrayKind::UCA : ArrayKind::ULA;
  cfg.array.num_elements = static_cast<int>(kv.get_i64("array.num_elements"));
  cfg.array.radius_m = kv.get_f64("array.radius_m");
  cfg.array.spacing_m = kv.get_f64("array.spacing_m");
  cfg.array.wavelength_m = kv.get_f64("array.wavelength_m");
  cfg.r_min = kv.get_f64("ue.r_min_m");
  cfg.r_max = kv.get_f64("ue.r_max_m");
  cfg.eta_min = kv.get_f64("ue.eta_min_rad");
  cfg.eta_max = kv.get_f64("ue.eta_max_rad");
  cfg.snr_db = kv.get_f64("snr_db");
  cfg.snapshots = static_cast<int>(kv.get_i64("snapshots"));
  cfg.feature_kind = feature_kind_from_name(kv.get("feature_kind"));
  cfg.n_train = kv.get_i64("n_train");
  cfg.n_test = kv.get_i64("n_test");
  cfg.base_seed = kv.get_u64("base_seed");
  return cfg;
}
}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory " + dir + ": " + ec.message());

  const uint64_t n = static_cast<uint64_t>(ds.count);
  const uint64_t h = static_cast<uint64_t>(ds.scenario.feature_h());
  const uint64_t w = static_cast<uint64_t>(ds.scenario.feature_w());

  const uint32_t crc_features =
      write_nfpd_f32(dir + "/features.bin", {n, 2, h, w}, ds.features.data());
  const uint32_t crc_labels = write_nfpd_f32(dir + "/labels.bin", {n, 2}, ds.labels.data());
  const uint32_t crc_scales = write_nfpd_f32(dir + "/scales.bin", {n}, ds.scales.data());
  const uint32_t crc_seeds = write_nfpd_u64(dir + "/seeds.bin", {n}, ds.seeds.data());

  KvFile kv;
  kv.set_i64("format_version", kManifestVersion);
  kv.set("kind", "dataset");
  write_scenario(kv, ds.scenario);
  kv.set_i64("count", ds.count);
  kv.set("feature_shape", "2," + std::to_string(h) + "," + std::to_string(w));
  kv.set("label_order", "r_m,eta_rad");
  kv.set_u64("crc32.features.bin", crc_features);
  kv.set_u64("crc32.labels.bin", crc_labels);
  kv.set_u64("crc32.scales.bin", crc_scales);
  kv.set_u64("crc32.seeds.bin", crc_seeds);
  kv.save(dir + "/manifest");
}

Dataset load_dataset(const std::string& dir) {
  const KvFile kv = KvFile::load(dir + "/manifest");
  if (kv.get_i64("format_version") != kManifestVersion)
    throw DataError("unsupported dataset format version in " + dir);

  Dataset ds;
  ds.scenario = read_scenario(kv);
  ds.count = kv.get_i64("count");

  auto check_crc = [&](const std::string& name, uint32_t actual) {
    const uint32_t expected = static_cast<uint32_t>(kv.get_u64("crc32." + name));
    if (expected != actual)
      throw DataError("checksum mismatch for " + dir + "/" + name);
  };

  F32File features = read_nfpd_f32(dir + "/features.bin");
  check_crc("features.bin", features.crc32);
  F32File labels = read_nfpd_f32(dir + "/labels.bin");
  check_crc("labels.bin", labels.crc32);
  F32File scales = read_nfpd_f32(dir + "/scales.bin");
  check_crc("scales.bin", scales.crc32);
  U64File seeds = read_nfpd_u64(dir + "/seeds.bin");
  check_crc("seeds.bin", seeds.crc32);

  const uint64_t n = static_cast<uint64_t>(ds.count);
  const std::vector<uint64_t> expect = {n, 2, static_cast<uint64_t>(ds.scenario.feature_h()),
                                        static_cast<uint64_t>(ds.scenario.feature_w())};
  if (features.dims != expect)
    throw DataError("features.bin shape disagrees with manifest in " + dir);
  if (labels.dims != std::vector<uint64_t>{n, 2})
    throw DataError("labels.bin shape disagrees with manifest in " + dir);

  ds.features = std::move(features.data);
  ds.labels = std::move(labels.data);
  ds.scales = std::move(scales.data);
  ds.seeds = std::move(seeds.data);
  return ds;
}

}  // namespace nfpos
