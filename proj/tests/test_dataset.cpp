#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "nfpos/dataset.hpp"
#include "nfpos/kv.hpp"
#include "nfpos/tensor_io.hpp"

using namespace nfpos;
namespace fs = std::filesystem;

namespace {

ScenarioConfig tiny_scenario(uint64_t seed = 1, FeatureKind kind = FeatureKind::Covariance) {
  ScenarioConfig cfg;
  cfg.array = ArrayConfig::uca(8, 1.0, 3.5e9);
  cfg.snapshots = 5;
  cfg.n_train = 8;
  cfg.n_test = 2;
  cfg.base_seed = seed;
  cfg.feature_kind = kind;
  return cfg;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nfpos_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("kv round trip and errors") {
  KvFile kv;
  kv.set("name", "value with spaces");
  kv.set_i64("count", -42);
  kv.set_u64("seed", 18446744073709551615ull);
  kv.set_f64("pi", 3.14159);
  const KvFile back = KvFile::parse(kv.to_string());
  CHECK(back.get("name") == "value with spaces");
  CHECK(back.get_i64("count") == -42);
  CHECK(back.get_u64("seed") == 18446744073709551615ull);
  CHECK(back.get_f64("pi") == doctest::Approx(3.14159));
  CHECK(back.get_or("missing", "fallback") == "fallback");
  CHECK_THROWS_AS(back.get("missing"), ConfigError);
  CHECK_THROWS_AS(back.get_i64("name"), ConfigError);
  CHECK_THROWS_AS(KvFile::parse("no equals sign"), ConfigError);
  const KvFile commented = KvFile::parse("# comment\n\n a = b \n");
  CHECK(commented.get("a") == "b");
}

TEST_CASE("nfpd tensor files") {
  TempDir tmp;
  const std::string path = tmp.str() + "/t.bin";
  std::vector<float> data = {1.0f, -2.5f, 3.25f, 0.0f, 7.0f, -0.125f};
  const uint32_t crc = write_nfpd_f32(path, {2, 3}, data.data());
  const F32File f = read_nfpd_f32(path);
  CHECK(f.dims == std::vector<uint64_t>{2, 3});
  CHECK(f.data == data);
  CHECK(f.crc32 == crc);

  // truncation detected, names the file
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "NFPD";
  }
  CHECK_THROWS_WITH_AS(read_nfpd_f32(path), doctest::Contains("t.bin"), DataError);

  // foreign magic rejected
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    const char bytes[] = {'D', 'P', 'F', 'N', 1, 0, 0, 0, 1, 0, 0, 0};
    out.write(bytes, sizeof(bytes));
  }
  CHECK_THROWS_WITH_AS(read_nfpd_f32(path), doctest::Contains("magic"), DataError);

  const std::string upath = tmp.str() + "/u.bin";
  std::vector<uint64_t> seeds = {1, 2, 1ull << 63};
  write_nfpd_u64(upath, {3}, seeds.data());
  CHECK(read_nfpd_u64(upath).data == seeds);
}

TEST_CASE("sample_ue_position") {
  SplitMix64 rng(5);
  const PolarPoint fixed = sample_ue_position(rng, 4.0, 4.0, 1.0, 1.0);
  CHECK(fixed.range_m == 4.0);
  CHECK(fixed.angle_rad == 1.0);

  // moment check: 1e5 draws of r ~ U(2,10), eta ~ U(30deg,150deg)
  const int n = 100000;
  double sum_r = 0.0, sum_eta = 0.0;
  SplitMix64 rng2(60);
  for (int i = 0; i < n; ++i) {
    const PolarPoint p =
        sample_ue_position(rng2, 2.0, 10.0, deg_to_rad(30.0), deg_to_rad(150.0));
    CHECK(p.range_m >= 2.0);
    CHECK(p.range_m <= 10.0);
    sum_r += p.range_m;
    sum_eta += p.angle_rad;
  }
  // std of the mean: (width/sqrt(12))/sqrt(n)
  const double r_tol = 3.0 * (8.0 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum_r / n - 6.0) < r_tol);
  const double eta_width = deg_to_rad(120.0);
  const double eta_tol = 3.0 * (eta_width / std::sqrt(12.0)) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum_eta / n - deg_to_rad(90.0)) < eta_tol);

  // determinism
  SplitMix64 ra(7), rb(7);
  for (int i = 0; i < 100; ++i) {
    const PolarPoint a = sample_ue_position(ra, 2.0, 10.0, 0.5, 2.6);
    const PolarPoint b = sample_ue_position(rb, 2.0, 10.0, 0.5, 2.6);
    CHECK(a.range_m == b.range_m);
    CHECK(a.angle_rad == b.angle_rad);
  }
}

TEST_CASE("generate_dataset counts, shapes, determinism") {
  const ScenarioConfig cfg = tiny_scenario(42);
  const Dataset ds = generate_dataset(cfg);
  CHECK(ds.count == 10);
  CHECK(ds.features.size() == 10u * 2 * 8 * 8);
  CHECK(ds.labels.size() == 20);
  CHECK(ds.seeds[0] == 42);
  CHECK(ds.seeds[9] == 51);

  for (int64_t i = 0; i < ds.count; ++i) {
    const PolarPoint label = ds.label(i);
    CHECK(label.range_m >= cfg.r_min);
    CHECK(label.range_m <= cfg.r_max);
    CHECK(label.angle_rad >= cfg.eta_min);
    CHECK(label.angle_rad <= cfg.eta_max);
  }

  const Dataset again = generate_dataset(cfg);
  CHECK(again.features == ds.features);
  CHECK(again.labels == ds.labels);
  CHECK(again.scales == ds.scales);
  CHECK(again.seeds == ds.seeds);

  ScenarioConfig other = cfg;
  other.base_seed = 43;
  const Dataset different = generate_dataset(other);
  CHECK(different.features != ds.features);

  const Dataset csi = generate_dataset(tiny_scenario(1, FeatureKind::Csi));
  CHECK(csi.features.size() == 10u * 2 * 5 * 8);
}

TEST_CASE("label coverage approaches the configured ranges") {
  ScenarioConfig cfg = tiny_scenario(100);
  cfg.n_train = 8000;
  cfg.n_test = 2000;
  const Dataset ds = generate_dataset(cfg);
  double r_lo = 1e9, r_hi = -1e9, e_lo = 1e9, e_hi = -1e9;
  for (int64_t i = 0; i < ds.count; ++i) {
    const PolarPoint p = ds.label(i);
    r_lo = std::min(r_lo, p.range_m);
    r_hi = std::max(r_hi, p.range_m);
    e_lo = std::min(e_lo, p.angle_rad);
    e_hi = std::max(e_hi, p.angle_rad);
  }
  const double rw = cfg.r_max - cfg.r_min, ew = cfg.eta_max - cfg.eta_min;
  CHECK(r_lo - cfg.r_min < 0.01 * rw);
  CHECK(cfg.r_max - r_hi < 0.01 * rw);
  CHECK(e_lo - cfg.eta_min < 0.01 * ew);
  CHECK(cfg.eta_max - e_hi < 0.01 * ew);
}

TEST_CASE("split") {
  ScenarioConfig cfg = tiny_scenario(3);
  const Dataset ds = generate_dataset(cfg);

  const auto [train, test] = split(ds, 0.8, 17);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  std::set<int64_t> seen(train.indices.begin(), train.indices.end());
  seen.insert(test.indices.begin(), test.indices.end());
  CHECK(seen.size() == 10);

  const auto [t2, s2] = split(ds, 0.8, 17);
  CHECK(t2.indices == train.indices);

  const auto [t3, s3] = split(ds, 0.8, 18);
  CHECK(t3.indices != train.indices);

  CHECK_THROWS_AS(split(ds, 0.0, 1), DomainError);
  CHECK_THROWS_AS(split(ds, 1.0, 1), DomainError);

  // floor rounding: 9 samples at 0.8 -> 7 train / 2 test
  ScenarioConfig nine = cfg;
  nine.n_train = 7;
  nine.n_test = 2;
  const Dataset ds9 = generate_dataset(nine);
  const auto [t9, s9] = split(ds9, 0.8, 1);
  CHECK(t9.size() == 7);
  CHECK(s9.size() == 2);
}

TEST_CASE("dataset save/load round trip") {
  TempDir tmp;
  const ScenarioConfig cfg = tiny_scenario(55);
  const Dataset ds = generate_dataset(cfg);
  save_dataset(ds, tmp.str());

  const Dataset back = load_dataset(tmp.str());
  CHECK(back.count == ds.count);
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  CHECK(back.scales == ds.scales);
  CHECK(back.seeds == ds.seeds);
  CHECK(back.scenario.base_seed == cfg.base_seed);
  CHECK(back.scenario.snapshots == cfg.snapshots);
  CHECK(back.scenario.feature_kind == cfg.feature_kind);

  // byte-identical regeneration
  TempDir tmp2;
  save_dataset(generate_dataset(cfg), tmp2.str());
  for (const char* name : {"features.bin", "labels.bin", "scales.bin", "seeds.bin"}) {
    std::ifstream a(tmp.path / name, std::ios::binary);
    std::ifstream b(tmp2.path / name, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }

  // corrupting a payload byte trips the checksum
  {
    std::fstream f(tmp.path / "features.bin",
                   std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(-1, std::ios::end);
    f.put('\x7f');
  }
  CHECK_THROWS_WITH_AS(load_dataset(tmp.str()), doctest::Contains("checksum"), DataError);
}

TEST_CASE("dataset views") {
  const Dataset ds = generate_dataset(tiny_scenario(9));
  const DatasetView train = train_view(ds);
  const DatasetView test = test_view(ds);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  CHECK(test.indices.front() == 8);
  CHECK(test.indices.back() == 9);
}
