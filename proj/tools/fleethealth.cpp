#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fleethealth/errors.hpp"
#include "fleethealth/pipeline.hpp"
#include "fleethealth/synth.hpp"

namespace fh = fleethealth;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIngest = 3;
constexpr int kExitStage = 4;

// Flags shared by every pipeline subcommand; each overrides its config key.
struct Overrides {
  std::string config;
  std::optional<std::string> events, cars, trips, out_dir, cutoff, variant;
  std::optional<long long> horizon_days;
  std::optional<double> eps;
  std::optional<std::size_t> min_points;
  std::optional<double> n_factor;
  std::optional<std::uint64_t> seed;
  bool adasyn = false;
  std::optional<double> adasyn_beta;
  std::optional<std::size_t> adasyn_k;
  std::optional<int> pca_m;
  std::optional<std::size_t> trees, max_depth, min_leaf, mtry;
  std::optional<double> test_fraction;
  std::optional<int> folds;
};

void add_pipeline_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON configuration file");
  app->add_option("--events", o.events, "maintenance events CSV");
  app->add_option("--cars", o.cars, "railcar records CSV");
  app->add_option("--trips", o.trips, "trip records CSV (default: trips.csv beside --events)");
  app->add_option("--out-dir", o.out_dir, "directory for stage outputs");
  app->add_option("--cutoff", o.cutoff, "cut-off date YYYY-MM-DD");
  app->add_option("--horizon-days", o.horizon_days, "labeling horizon after the cut-off");
  app->add_option("--eps", o.eps, "DBSCAN radius on the Gower scale");
  app->add_option("--min-points", o.min_points, "DBSCAN density threshold (point itself included)");
  app->add_option("--n-factor", o.n_factor, "operational set radius as a multiple of eps");
  app->add_option("--seed", o.seed, "global seed");
  app->add_option("--variant", o.variant, "without-pca | b-pca-k | b-pca-nk | adasyn | adasyn-pca");
  app->add_flag("--adasyn", o.adasyn, "oversample training rows with ADASYN");
  app->add_option("--adasyn-beta", o.adasyn_beta, "ADASYN balance level");
  app->add_option("--adasyn-k", o.adasyn_k, "ADASYN neighbor count");
  app->add_option("--pca-m", o.pca_m, "retained principal components");
  app->add_option("--trees", o.trees, "trees per forest");
  app->add_option("--max-depth", o.max_depth, "maximum tree depth");
  app->add_option("--min-leaf", o.min_leaf, "minimum rows per leaf");
  app->add_option("--mtry", o.mtry, "features tried per split (0: ceil(sqrt(K)))");
  app->add_option("--test-fraction", o.test_fraction, "held-out share of railcars");
}

fh::PipelineConfig resolve(const Overrides& o) {
  fh::PipelineConfig cfg = o.config.empty() ? fh::PipelineConfig{} : fh::load_config(o.config);
  fh::apply_environment(cfg);
  try {
    if (o.events) cfg.events = *o.events;
    if (o.cars) cfg.cars = *o.cars;
    if (o.trips) cfg.trips = *o.trips;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.cutoff) cfg.cutoff.cutoff = fh::Date::parse(*o.cutoff);
  } catch (const fh::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw fh::ConfigError(e.what());
  }
  if (o.horizon_days) cfg.cutoff.horizon = std::chrono::days{*o.horizon_days};
  if (o.eps) cfg.dbscan.eps = *o.eps;
  if (o.min_points) cfg.dbscan.min_points = *o.min_points;
  if (o.n_factor) cfg.dbscan.n_factor = *o.n_factor;
  if (o.seed) cfg.seed = *o.seed;
  if (o.variant) cfg.variant = fh::parse_variant(*o.variant);
  if (o.adasyn) {
    // --adasyn picks the oversampling counterpart of the PCA choice.
    if (cfg.variant == fh::Variant::without_pca) cfg.variant = fh::Variant::adasyn;
    if (cfg.variant == fh::Variant::b_pca_k) cfg.variant = fh::Variant::adasyn_pca;
    cfg.adasyn_enabled = true;
  }
  if (o.adasyn_beta) cfg.adasyn.beta = *o.adasyn_beta;
  if (o.adasyn_k) cfg.adasyn.k = *o.adasyn_k;
  if (o.pca_m) cfg.pca_m = *o.pca_m;
  if (o.trees) cfg.forest.n_trees = *o.trees;
  if (o.max_depth) cfg.forest.max_depth = *o.max_depth;
  if (o.min_leaf) cfg.forest.min_leaf = *o.min_leaf;
  if (o.mtry) cfg.forest.mtry = *o.mtry;
  if (o.test_fraction) cfg.test_fraction = *o.test_fraction;
  if (o.folds) cfg.folds = *o.folds;
  cfg.validate();
  return cfg;
}

struct SynthOptions {
  std::size_t cars = 2000;
  std::uint64_t seed = 7;
  std::string out_dir = "data";
  double missing_rate = 0.05;
  int years = 15;
  double noise_sd = 0.5;
  std::string cutoff = "2019-01-01";
};

int run_synth(const SynthOptions& s) {
  fh::SynthConfig cfg;
  cfg.n_cars = s.cars;
  cfg.seed = s.seed;
  cfg.missing_rate = s.missing_rate;
  cfg.years_of_history = s.years;
  cfg.noise_sd = s.noise_sd;
  try {
    cfg.cutoff.cutoff = fh::Date::parse(s.cutoff);
  } catch (const std::exception& e) {
    throw fh::ConfigError(e.what());
  }
  auto fleet = fh::generate(cfg);
  fh::write_fleet(fleet, s.out_dir);
  std::cout << "wrote " << fleet.cars.size() << " railcars, " << fleet.events.size() << " events to " << s.out_dir
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Railcar component failure prediction and fleet health ranking"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic fleet with planted failure signal");
  synth_cmd->add_option("--cars", synth.cars, "number of railcars")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--out-dir", synth.out_dir, "output directory")->capture_default_str();
  synth_cmd->add_option("--missing-rate", synth.missing_rate, "MCAR rate for mileage, condition and region")
      ->capture_default_str();
  synth_cmd->add_option("--years", synth.years, "years of history before the cut-off")->capture_default_str();
  synth_cmd->add_option("--noise-sd", synth.noise_sd, "latent log-odds noise")->capture_default_str();
  synth_cmd->add_option("--cutoff", synth.cutoff, "cut-off date")->capture_default_str();

  Overrides o;
  auto* features_cmd = app.add_subcommand("features", "engineer per-component feature matrices and labels");
  auto* impute_cmd = app.add_subcommand("impute", "fill missing cells from fast-DBSCAN clusters");
  auto* train_cmd = app.add_subcommand("train", "fit PCA, split, oversample and train one forest per component");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "ROC, gain curves and capture rates on held-out railcars");
  auto* score_cmd = app.add_subcommand("score", "health scores and fleet ranking");
  auto* run_cmd = app.add_subcommand("run", "all stages end to end");
  for (auto* cmd : {features_cmd, impute_cmd, train_cmd, evaluate_cmd, score_cmd, run_cmd}) add_pipeline_flags(cmd, o);
  for (auto* cmd : {evaluate_cmd, run_cmd}) cmd->add_option("--fold", o.folds, "add k-fold cross-validation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    const auto cfg = resolve(o);
    if (features_cmd->parsed()) {
      auto comps = fh::run_features(cfg);
      std::cout << "features: " << comps.size() << " components written to " << cfg.out_dir.string() << '\n';
    } else if (impute_cmd->parsed()) {
      fh::run_impute(cfg);
    } else if (train_cmd->parsed()) {
      fh::run_train(cfg);
    } else if (evaluate_cmd->parsed()) {
      fh::print_summary(std::cout, fh::run_evaluate(cfg));
    } else if (score_cmd->parsed()) {
      std::cout << "scored " << fh::run_score(cfg) << " railcars\n";
    } else if (run_cmd->parsed()) {
      fh::print_summary(std::cout, fh::run_pipeline(cfg));
    }
  } catch (const fh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fh::IngestError& e) {
    std::cerr << "[ingest] " << e.what() << '\n';
    return kExitIngest;
  } catch (const fh::StageError& e) {
    std::cerr << e.what() << '\n';
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return 0;
}
