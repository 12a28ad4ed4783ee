// nfpos: dataset synthesis, training, evaluation and geometry analysis for
// near-field positioning on a sectored uniform circular array.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "nfpos/checkpoint.hpp"
#include "nfpos/eval.hpp"

namespace fs = std::filesystem;
using namespace nfpos;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitShape = 3;
constexpr int kExitRuntime = 4;

std::string data_root() {
  const char* env = std::getenv("NFPOS_DATA_DIR");
  return env ? env : "";
}

// Flags override config-file keys, which override the built-in defaults.
struct ScenarioArgs {
  std::string config_path;
  std::string out_dir;
  int64_t elements = -1;
  double radius_m = -1.0;
  double freq_ghz = -1.0;
  double snr_db = std::numeric_limits<double>::quiet_NaN();
  int64_t snapshots = -1;
  std::string feature;
  int64_t n_train = -1;
  int64_t n_test = -1;
  int64_t seed = -1;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key-value config file");
    cmd->add_option("--out", out_dir, "output dataset directory");
    cmd->add_option("--elements", elements, "array elements N");
    cmd->add_option("--radius", radius_m, "UCA radius in meters");
    cmd->add_option("--freq-ghz", freq_ghz, "carrier frequency in GHz");
    cmd->add_option("--snr", snr_db, "SNR in dB (reference runs use 0 or 20)");
    cmd->add_option("--snapshots", snapshots, "snapshots K (reference runs use 50 or 100)");
    cmd->add_option("--feature", feature, "feature kind: covariance|csi");
    cmd->add_option("--n-train", n_train, "training sample count");
    cmd->add_option("--n-test", n_test, "test sample count");
    cmd->add_option("--seed", seed, "base dataset seed");
  }

  ScenarioConfig resolve() const {
    ScenarioConfig cfg;  // reference defaults
    int64_t n = cfg.array.num_elements;
    double radius = cfg.array.radius_m;
    double freq_hz = kSpeedOfLight / cfg.array.wavelength_m;

    if (!config_path.empty()) {
      const KvFile kv = KvFile::load(config_path);
      if (kv.has("array.num_elements")) n = kv.get_i64("array.num_elements");
      if (kv.has("array.radius_m")) radius = kv.get_f64("array.radius_m");
      if (kv.has("carrier_freq_ghz")) freq_hz = kv.get_f64("carrier_freq_ghz") * 1e9;
      if (kv.has("ue.r_min_m")) cfg.r_min = kv.get_f64("ue.r_min_m");
      if (kv.has("ue.r_max_m")) cfg.r_max = kv.get_f64("ue.r_max_m");
      if (kv.has("ue.eta_min_deg")) cfg.eta_min = deg_to_rad(kv.get_f64("ue.eta_min_deg"));
      if (kv.has("ue.eta_max_deg")) cfg.eta_max = deg_to_rad(kv.get_f64("ue.eta_max_deg"));
      if (kv.has("snr_db")) cfg.snr_db = kv.get_f64("snr_db");
      if (kv.has("snapshots")) cfg.snapshots = static_cast<int>(kv.get_i64("snapshots"));
      if (kv.has("feature_kind")) cfg.feature_kind = feature_kind_from_name(kv.get("feature_kind"));
      if (kv.has("n_train")) cfg.n_train = kv.get_i64("n_train");
      if (kv.has("n_test")) cfg.n_test = kv.get_i64("n_test");
      if (kv.has("base_seed")) cfg.base_seed = kv.get_u64("base_seed");
    }
    if (elements > 0) n = elements;
    if (radius_m > 0) radius = radius_m;
    if (freq_ghz > 0) freq_hz = freq_ghz * 1e9;
    if (!std::isnan(snr_db)) cfg.snr_db = snr_db;
    if (snapshots > 0) cfg.snapshots = static_cast<int>(snapshots);
    if (!feature.empty()) cfg.feature_kind = feature_kind_from_name(feature);
    if (n_train > 0) cfg.n_train = n_train;
    if (n_test >= 0) cfg.n_test = n_test;
    if (seed >= 0) cfg.base_seed = static_cast<uint64_t>(seed);

    cfg.array = ArrayConfig::uca(static_cast<int>(n), radius, freq_hz);
    cfg.validate();
    return cfg;
  }
};

std::string scenario_descriptor(const ScenarioConfig& cfg) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s_snr%g_k%d_n%lld_seed%llu",
                feature_kind_name(cfg.feature_kind).c_str(), cfg.snr_db, cfg.snapshots,
                static_cast<long long>(cfg.total()),
                static_cast<unsigned long long>(cfg.base_seed));
  return buf;
}

int cmd_gen_data(const ScenarioArgs& args) {
  const ScenarioConfig cfg = args.resolve();
  std::string out = args.out_dir;
  if (out.empty()) {
    const std::string root = data_root();
    if (root.empty())
      throw ConfigError("no output directory: pass --out or set NFPOS_DATA_DIR");
    out = root + "/" + scenario_descriptor(cfg);
  }

  const auto t0 = std::chrono::steady_clock::now();
  const Dataset ds = generate_dataset(cfg);
  save_dataset(ds, out);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::printf("dataset: %s\n", out.c_str());
  std::printf("  samples: %lld train + %lld test\n", static_cast<long long>(cfg.n_train),
              static_cast<long long>(cfg.n_test));
  std::printf("  feature: %s [2,%lld,%lld]\n", feature_kind_name(cfg.feature_kind).c_str(),
              static_cast<long long>(cfg.feature_h()), static_cast<long long>(cfg.feature_w()));
  std::printf("  snr: %g dB  snapshots: %d  base seed: %llu\n", cfg.snr_db, cfg.snapshots,
              static_cast<unsigned long long>(cfg.base_seed));
  std::printf("  azimuth: (%g, %g) deg  range: (%g, %g) m\n", rad_to_deg(cfg.eta_min),
              rad_to_deg(cfg.eta_max), cfg.r_min, cfg.r_max);
  std::printf("  generated in %.2fs\n", secs);
  return 0;
}

ModelConfig model_for_dataset(const Dataset& ds, ModelKind kind, int64_t width) {
  ModelConfig cfg = ds.scenario.feature_kind == FeatureKind::Covariance
                        ? ModelConfig::covariance_default(ds.scenario.array.num_elements, width)
                        : ModelConfig::csi_variant(ds.scenario.snapshots,
                                                   ds.scenario.array.num_elements, width);
  cfg.kind = kind;
  return cfg;
}

struct TrainArgs {
  std::string config_path, data_dir, out_dir;
  std::string model = "proposed";
  int64_t width = 128;
  int64_t epochs = -1, batch = -1;
  double lr = -1.0;
  int64_t seed = -1;
  std::string loss_space;
  int64_t n_train = -1;
  bool quiet = false;
};

int cmd_train(const TrainArgs& args) {
  TrainConfig tc;
  ModelKind kind = model_kind_from_name(args.model);
  int64_t width = args.width;
  uint64_t model_seed = 1;

  if (!args.config_path.empty()) {
    const KvFile kv = KvFile::load(args.config_path);
    if (kv.has("train.learning_rate")) tc.learning_rate = kv.get_f64("train.learning_rate");
    if (kv.has("train.batch_size")) tc.batch_size = kv.get_i64("train.batch_size");
    if (kv.has("train.epochs")) tc.epochs = kv.get_i64("train.epochs");
    if (kv.has("train.seed")) tc.seed = kv.get_u64("train.seed");
    if (kv.has("train.loss_space")) tc.loss_space = loss_space_from_name(kv.get("train.loss_space"));
    if (kv.has("model.kind")) kind = model_kind_from_name(kv.get("model.kind"));
    if (kv.has("model.width")) width = kv.get_i64("model.width");
  }
  if (args.epochs > 0) tc.epochs = args.epochs;
  if (args.batch > 0) tc.batch_size = args.batch;
  if (args.lr >= 0) tc.learning_rate = args.lr;
  if (args.seed >= 0) tc.seed = static_cast<uint64_t>(args.seed);
  if (!args.loss_space.empty()) tc.loss_space = loss_space_from_name(args.loss_space);
  model_seed = tc.seed;
  tc.verbose = !args.quiet;

  if (args.data_dir.empty()) throw ConfigError("missing --data dataset directory");
  if (args.out_dir.empty()) throw ConfigError("missing --out run directory");
  if (!fs::exists(fs::path(args.data_dir) / "manifest"))
    throw ConfigError("--data: no dataset manifest under " + args.data_dir);

  const Dataset ds = load_dataset(args.data_dir);
  DatasetView tv = train_view(ds);
  const DatasetView hv = test_view(ds);
  if (args.n_train > 0 && args.n_train < tv.size())
    tv.indices.resize(static_cast<size_t>(args.n_train));

  const ModelConfig mcfg = model_for_dataset(ds, kind, width);
  auto model = make_model<float>(mcfg, model_seed);
  tc.checkpoint_dir = args.out_dir + "/checkpoint";

  const auto t0 = std::chrono::steady_clock::now();
  const TrainRecord rec = train(*model, tv, hv, tc);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(args.out_dir);
  write_train_record_csv(rec, args.out_dir + "/train_curve.csv");
  KvFile manifest;
  manifest.set("kind", "train-run");
  manifest.set("dataset", args.data_dir);
  mcfg.to_kv(manifest);
  manifest.set_f64("train.learning_rate", tc.learning_rate);
  manifest.set_i64("train.batch_size", tc.batch_size);
  manifest.set_i64("train.epochs", tc.epochs);
  manifest.set_u64("train.seed", tc.seed);
  manifest.set("train.loss_space", loss_space_name(tc.loss_space));
  manifest.set_i64("train.n_train", tv.size());
  manifest.set_i64("train.n_holdout", hv.size());
  manifest.set_i64("train.adam_steps", rec.adam_steps);
  manifest.set_i64("train.best_epoch", rec.best_epoch);
  manifest.set_f64("train.best_holdout_loss", rec.best_holdout_loss);
  manifest.set_f64("train.seconds", secs);
  manifest.save(args.out_dir + "/train_manifest");

  std::printf("trained %s (width %lld) for %lld epochs, %lld Adam steps in %.1fs\n",
              model_kind_name(kind).c_str(), static_cast<long long>(width),
              static_cast<long long>(tc.epochs), static_cast<long long>(rec.adam_steps), secs);
  std::printf("best held-out loss %.6e at epoch %lld; checkpoint: %s\n",
              rec.best_holdout_loss, static_cast<long long>(rec.best_epoch),
              tc.checkpoint_dir.c_str());
  return 0;
}

struct EvalArgs {
  std::string checkpoint_dir, data_dir, out_dir, scenario;
  bool oracle = false;
};

int cmd_eval(const EvalArgs& args) {
  if (args.data_dir.empty()) throw ConfigError("missing --data dataset directory");
  if (args.out_dir.empty()) throw ConfigError("missing --out report directory");
  if (!fs::exists(fs::path(args.data_dir) / "manifest"))
    throw ConfigError("--data: no dataset manifest under " + args.data_dir);
  if (!args.oracle && !args.checkpoint_dir.empty() &&
      !fs::exists(fs::path(args.checkpoint_dir) / "manifest"))
    throw ConfigError("--checkpoint: no checkpoint manifest under " + args.checkpoint_dir);
  const Dataset ds = load_dataset(args.data_dir);
  const DatasetView test = test_view(ds);

  std::string scenario = args.scenario;
  if (scenario.empty()) scenario = scenario_descriptor(ds.scenario);

  EvalReport report;
  if (args.oracle) {
    PerfectPredictor oracle;
    report = evaluate(oracle, test, scenario + "_oracle");
  } else {
    if (args.checkpoint_dir.empty())
      throw ConfigError("missing --checkpoint (or pass --oracle)");
    const ModelConfig mcfg = peek_checkpoint_config(args.checkpoint_dir);
    auto model = make_model<float>(mcfg, 0);
    load_checkpoint(*model, args.checkpoint_dir);
    const KvFile manifest = read_checkpoint_manifest(args.checkpoint_dir);
    const LossSpace space =
        loss_space_from_name(manifest.get_or("train.loss_space", "normalized"));
    ModelPredictor<float> predictor(*model, space);
    report = evaluate(predictor, test, scenario);
  }

  export_report(report, args.out_dir);
  std::printf("evaluated %lld samples: %s\n", static_cast<long long>(test.size()),
              report.scenario.c_str());
  std::printf("  mean %.4f m (%.2f dB)  median %.4f m (%.2f dB)  rmse %.4f m\n",
              report.mean_m, report.mean_db, report.median_m, report.median_db,
              report.rmse_m);
  std::printf("  reports: %s/{errors,summary,cdf}.csv\n", args.out_dir.c_str());
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_csv) {
  if (dirs.size() < 2) throw ConfigError("compare needs at least 2 report directories");
  std::vector<EvalReport> reports;
  for (const auto& d : dirs) reports.push_back(load_report(d));

  std::string csv = "run,scenario,mean_m,median_m,rmse_m,gap_db_vs_first,median_gap_db\n";
  std::printf("%-28s %10s %10s %10s %12s\n", "run", "mean[m]", "median[m]", "rmse[m]",
              "gap[dB]");
  const bool gaps_defined = reports[0].mean_m > 0.0 && reports[0].median_m > 0.0;
  for (size_t i = 0; i < reports.size(); ++i) {
    const bool row_defined = gaps_defined && reports[i].mean_m > 0.0 && reports[i].median_m > 0.0;
    char gap_s[32] = "n/a", mgap_s[32] = "n/a";
    if (row_defined) {
      std::snprintf(gap_s, sizeof(gap_s), "%.9g", db_gap(reports[0], reports[i]));
      std::snprintf(mgap_s, sizeof(mgap_s), "%.9g", db_gap_median(reports[0], reports[i]));
    }
    std::printf("%-28s %10.4f %10.4f %10.4f %12.12s\n", reports[i].scenario.c_str(),
                reports[i].mean_m, reports[i].median_m, reports[i].rmse_m, gap_s);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%.9g,%.9g,%.9g,%s,%s\n", dirs[i].c_str(),
                  reports[i].scenario.c_str(), reports[i].mean_m, reports[i].median_m,
                  reports[i].rmse_m, gap_s, mgap_s);
    csv += buf;
  }
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) throw IoError("cannot write " + out_csv);
    out << csv;
  }
  return 0;
}

struct FresnelArgs {
  int64_t elements = 64;
  double radius_m = 1.0;
  double freq_ghz = 3.5;
  double aperture_m = -1.0;
  bool ula = false;
  double delta_m = -1.0;
  double range_m = 5.0;
};

int cmd_fresnel(const FresnelArgs& args) {
  const double lambda = wavelength_from_frequency(args.freq_ghz * 1e9);
  const double delta = args.delta_m > 0 ? args.delta_m : lambda / 2.0;
  const int n = static_cast<int>(args.elements);

  double aperture = args.aperture_m;
  if (aperture <= 0)
    aperture = args.ula ? n * delta / 2.0 : uca_default_aperture(args.radius_m);

  const FresnelBounds b = fresnel_bounds(aperture, lambda);
  std::printf("wavelength: %.6f m  (%.2f GHz)\n", lambda, args.freq_ghz);
  std::printf("aperture:   %.4f m  (%s)\n", aperture,
              args.aperture_m > 0 ? "given" : (args.ula ? "N*delta/2" : "UCA chord 2R sin(30deg)"));
  std::printf("fresnel region: %.4f m <= r <= %.4f m\n", b.lower_m, b.upper_m);

  if (args.ula) {
    const double ratio = near_field_ratio(n, delta, args.range_m);
    const double bound = taylor_validity_bound(n);
    std::printf("\nULA N=%d delta=%.6f m, UE range %.3f m\n", n, delta, args.range_m);
    std::printf("near-field ratio (N*delta/r)^2 = %.6f, bound 41.6/N = %.6f -> %s\n", ratio,
                bound, ratio <= bound ? "linear coupling valid" : "linear coupling NOT valid");
    std::printf("\n%4s %10s %14s %14s %12s\n", "n", "eta[deg]", "exact[m]", "taylor[m]",
                "abs err");
    for (const double eta_deg : {30.0, 60.0, 90.0, 120.0}) {
      for (const int idx : {1, n / 4, n / 2, n}) {
        if (idx < 1) continue;
        const double exact =
            ula_path_difference_exact(args.range_m, deg_to_rad(eta_deg), idx, delta);
        const double taylor =
            ula_path_difference_taylor(args.range_m, deg_to_rad(eta_deg), idx, delta);
        std::printf("%4d %10.1f %14.8f %14.8f %12.3e\n", idx, eta_deg, exact, taylor,
                    std::abs(exact - taylor));
      }
    }
  } else {
    std::printf("\nUCA N=%d R=%.3f m; element angles span 30..90 deg\n", n, args.radius_m);
    const double lo = std::max(b.lower_m, 1e-9);
    std::printf("UE ranges of the reference scenario (2..10 m) vs region: %s\n",
                (2.0 >= lo && 10.0 <= b.upper_m) ? "inside" : "check bounds");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"near-field UCA positioning pipeline"};
  app.require_subcommand(1);

  ScenarioArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-data", "synthesize a labeled dataset");
  gen_args.add_flags(gen);

  TrainArgs train_args;
  CLI::App* tr = app.add_subcommand("train", "train a positioning model");
  tr->add_option("--config", train_args.config_path, "key-value config file");
  tr->add_option("--data", train_args.data_dir, "dataset directory");
  tr->add_option("--out", train_args.out_dir, "run output directory");
  tr->add_option("--model", train_args.model, "proposed|baseline-cnn|baseline-mlp");
  tr->add_option("--width", train_args.width, "conv channel width (reference: 128)");
  tr->add_option("--epochs", train_args.epochs, "training epochs");
  tr->add_option("--batch", train_args.batch, "mini-batch size");
  tr->add_option("--lr", train_args.lr, "Adam learning rate");
  tr->add_option("--seed", train_args.seed, "training seed");
  tr->add_option("--loss-space", train_args.loss_space, "normalized|raw");
  tr->add_option("--n-train", train_args.n_train, "restrict training samples");
  tr->add_flag("--quiet", train_args.quiet, "suppress per-epoch progress");

  EvalArgs eval_args;
  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint on a test split");
  ev->add_option("--checkpoint", eval_args.checkpoint_dir, "checkpoint directory");
  ev->add_option("--data", eval_args.data_dir, "dataset directory");
  ev->add_option("--out", eval_args.out_dir, "report output directory");
  ev->add_option("--scenario", eval_args.scenario, "report descriptor override");
  ev->add_flag("--oracle", eval_args.oracle, "use the ground-truth oracle (test hook)");

  std::vector<std::string> compare_dirs;
  std::string compare_out;
  CLI::App* cp = app.add_subcommand("compare", "tabulate several eval reports");
  cp->add_option("reports", compare_dirs, "report directories (first is the reference)");
  cp->add_option("--out", compare_out, "write the comparison table as CSV");

  FresnelArgs fr_args;
  CLI::App* fr = app.add_subcommand("fresnel", "near-field bounds and coupling analysis");
  fr->add_option("--elements", fr_args.elements, "array elements N");
  fr->add_option("--radius", fr_args.radius_m, "UCA radius in meters");
  fr->add_option("--freq-ghz", fr_args.freq_ghz, "carrier frequency in GHz");
  fr->add_option("--aperture", fr_args.aperture_m, "override aperture D in meters");
  fr->add_flag("--ula", fr_args.ula, "analyze a ULA instead of the UCA");
  fr->add_option("--delta", fr_args.delta_m, "ULA spacing in meters (default lambda/2)");
  fr->add_option("--range", fr_args.range_m, "UE range for the coupling table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_args);
    if (tr->parsed()) return cmd_train(train_args);
    if (ev->parsed()) return cmd_eval(eval_args);
    if (cp->parsed()) return cmd_compare(compare_dirs, compare_out);
    if (fr->parsed()) return cmd_fresnel(fr_args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const ShapeError& e) {
    std::fprintf(stderr, "shape error: %s\n", e.what());
    return kExitShape;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
