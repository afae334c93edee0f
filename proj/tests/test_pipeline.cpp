#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fleethealth/errors.hpp"
#include "fleethealth/pipeline.hpp"
#include "fleethealth/synth.hpp"
#include "oracles.hpp"

using namespace fleethealth;
namespace fs = std::filesystem;

namespace {

// One small fleet shared by the tests in this file.
const fs::path& fleet_dir(double missing_rate = 0.05) {
  static std::map<double, std::unique_ptr<oracle::TempDir>> dirs;
  auto& slot = dirs[missing_rate];
  if (!slot) {
    slot = std::make_unique<oracle::TempDir>("pipeline_fleet");
    SynthConfig cfg;
    cfg.n_cars = 300;
    cfg.seed = 3;
    cfg.missing_rate = missing_rate;
    write_fleet(generate(cfg), slot->path());
  }
  return slot->path();
}

PipelineConfig quick_config(const fs::path& out, double missing_rate = 0.05) {
  PipelineConfig cfg;
  cfg.events = fleet_dir(missing_rate) / "events.csv";
  cfg.cars = fleet_dir(missing_rate) / "cars.csv";
  cfg.out_dir = out;
  cfg.forest.n_trees = 30;
  return cfg;
}

}  // namespace

TEST(Config, VariantNamesRoundTrip) {
  for (auto v : {Variant::without_pca, Variant::b_pca_k, Variant::b_pca_nk, Variant::adasyn, Variant::adasyn_pca}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_variant("pca"), ConfigError);
}

TEST(Config, VariantImpliesPcaAndResampling) {
  PipelineConfig c;
  c.variant = Variant::b_pca_nk;
  EXPECT_TRUE(c.uses_pca());
  EXPECT_FALSE(c.keeps_originals());
  EXPECT_FALSE(c.uses_adasyn());
  c.variant = Variant::adasyn;
  EXPECT_FALSE(c.uses_pca());
  EXPECT_TRUE(c.uses_adasyn());
  c.variant = Variant::adasyn_pca;
  EXPECT_TRUE(c.uses_pca());
  EXPECT_TRUE(c.keeps_originals());
}

TEST(Config, ConflictingOverridesAreRejected) {
  PipelineConfig c;
  c.variant = Variant::b_pca_nk;
  c.keep_originals = true;
  EXPECT_THROW(c.validate(), ConfigError);
  c.keep_originals = false;
  EXPECT_NO_THROW(c.validate());
  c.variant = Variant::without_pca;
  c.adasyn_enabled = true;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  auto j = nlohmann::json::parse(R"({
    "paths": {"events": "e.csv", "cars": "c.csv", "out_dir": "o"},
    "cutoff_date": "2018-06-30", "horizon_days": 180,
    "dbscan": {"eps": 0.2, "min_points": 4, "n_factor": 2.5},
    "pca": {"subset": ["component_age", "car_age"], "m": 1},
    "adasyn": {"enabled": true, "beta": 0.8, "k": 3},
    "forest": {"n_trees": 50, "max_depth": 6, "min_leaf": 2, "mtry": 3},
    "weights": {"1": 0.4, "2": 0.3, "3": 0.2, "4": 0.1},
    "variant": "adasyn-pca", "seed": 11, "test_fraction": 0.25, "folds": 10
  })");
  auto c = config_from_json(j);
  EXPECT_EQ(c.cutoff.cutoff, Date(2018, 6, 30));
  EXPECT_EQ(c.cutoff.horizon.count(), 180);
  EXPECT_EQ(c.dbscan.min_points, 4u);
  EXPECT_EQ(c.pca_m, 1);
  EXPECT_EQ(c.adasyn.k, 3u);
  EXPECT_EQ(c.forest.mtry, 3u);
  EXPECT_EQ(c.weights.at(4), 0.1);
  EXPECT_EQ(c.variant, Variant::adasyn_pca);
  EXPECT_EQ(c.folds, 10);
  EXPECT_NO_THROW(c.validate());
  auto again = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));

  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"forest": {"trees": 5}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"seed": "seven"})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"cutoff_date": "2019-02-31"})")), ConfigError);
}

TEST(Config, EnvironmentSeedOverridesConfig) {
  PipelineConfig c;
  c.seed = 1;
  ::setenv("FLEET_HEALTH_SEED", "1234", 1);
  apply_environment(c);
  EXPECT_EQ(c.seed, 1234u);
  ::setenv("FLEET_HEALTH_SEED", "12x", 1);
  EXPECT_THROW(apply_environment(c), ConfigError);
  ::unsetenv("FLEET_HEALTH_SEED");
}

TEST(Pipeline, StagedRunEqualsMonolithicRun) {
  oracle::TempDir a("mono"), b("staged");
  auto ca = quick_config(a.path());
  auto cb = quick_config(b.path());
  auto result = run_pipeline(ca);
  run_features(cb);
  run_impute(cb);
  run_train(cb);
  run_evaluate(cb);
  run_score(cb);
  auto sa = oracle::snapshot(a.path());
  EXPECT_EQ(sa, oracle::snapshot(b.path()));
  EXPECT_TRUE(sa.count("health_report.csv"));
  EXPECT_TRUE(sa.count("model_c4.json"));
  EXPECT_EQ(result.components.size(), 4u);
  EXPECT_EQ(result.railcars_scored, 300u);
}

TEST(Pipeline, RepeatRunsAreByteIdentical) {
  oracle::TempDir a("rep_a"), b("rep_b");
  auto ca = quick_config(a.path());
  ca.variant = Variant::adasyn_pca;
  auto cb = ca;
  cb.out_dir = b.path();
  run_pipeline(ca);
  run_pipeline(cb);
  EXPECT_EQ(oracle::snapshot(a.path()), oracle::snapshot(b.path()));
}

TEST(Pipeline, ImputeLeavesCompleteMatricesAlone) {
  oracle::TempDir out("complete");
  auto cfg = quick_config(out.path(), 0.0);
  for (ComponentId c : run_features(cfg)) {
    EXPECT_EQ(FeatureMatrix::read_csv(features_file(out.path(), c)).missing_count(), 0u);
  }
  run_impute(cfg);
  for (ComponentId c : discover_components(out.path())) {
    EXPECT_EQ(oracle::slurp(features_file(out.path(), c)), oracle::slurp(imputed_file(out.path(), c)));
  }
}

TEST(Pipeline, ImputedMatricesAreComplete) {
  oracle::TempDir out("imputed");
  auto cfg = quick_config(out.path(), 0.2);
  run_features(cfg);
  run_impute(cfg);
  std::size_t before = 0;
  for (ComponentId c : discover_components(out.path())) {
    before += FeatureMatrix::read_csv(features_file(out.path(), c)).missing_count();
    EXPECT_EQ(FeatureMatrix::read_csv(imputed_file(out.path(), c)).missing_count(), 0u);
  }
  EXPECT_GT(before, 0u);
}

TEST(Pipeline, EmptyEventsFailAtIngestWithoutOutputs) {
  oracle::TempDir dir("empty");
  { std::ofstream(dir / "events.csv"); }
  auto cfg = quick_config(dir / "out");
  cfg.events = dir / "events.csv";
  EXPECT_THROW(run_pipeline(cfg), IngestError);
  EXPECT_FALSE(fs::exists(dir / "out") && !fs::is_empty(dir / "out"));
}

TEST(Pipeline, FailedRunRemovesEverythingItWrote) {
  oracle::TempDir out("cleanup");
  auto cfg = quick_config(out.path());
  cfg.weights = {{1, 1.0}, {2, 1.0}};  // components 3 and 4 lack weights: fails in score
  EXPECT_THROW(run_pipeline(cfg), ConfigError);
  EXPECT_TRUE(fs::is_empty(out.path()));
}

TEST(Pipeline, MissingPrerequisitesAreStageErrors) {
  oracle::TempDir out("prereq");
  auto cfg = quick_config(out.path());
  try {
    run_train(cfg);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "train");
  }
  run_features(cfg);
  EXPECT_THROW(run_score(cfg), StageError);
}

TEST(Pipeline, ProvenanceAuditPassesAndCatchesLeaks) {
  oracle::TempDir out("audit");
  auto cfg = quick_config(out.path());
  cfg.variant = Variant::adasyn;
  run_pipeline(cfg);
  for (ComponentId c : discover_components(out.path())) EXPECT_EQ(audit_provenance(out.path(), c), "") << c;

  auto rows = csv::read(train_rows_file(out.path(), 1));
  auto split = csv::read(split_file(out.path(), 1));
  std::string held_out;
  for (const auto& r : split.rows) {
    if (r[1] == "test") held_out = r[0];
  }
  ASSERT_FALSE(held_out.empty());
  rows.rows.push_back({"synthetic", held_out, "", "1"});
  csv::write(train_rows_file(out.path(), 1), rows);
  EXPECT_NE(audit_provenance(out.path(), 1), "");
}

TEST(Pipeline, SplitKeepsRailcarsTogether) {
  oracle::TempDir out("groups");
  auto cfg = quick_config(out.path());
  run_features(cfg);
  run_impute(cfg);
  run_train(cfg);
  for (ComponentId c : discover_components(out.path())) {
    std::map<std::string, std::set<std::string>> sides;
    for (const auto& r : csv::read(split_file(out.path(), c)).rows) sides[SampleId::parse(r[0]).railcar_id].insert(r[1]);
    for (const auto& [car, s] : sides) EXPECT_EQ(s.size(), 1u) << car << " c" << c;
  }
}

TEST(Pipeline, VariantsShapeTheDesignMatrix) {
  oracle::TempDir k("k"), nk("nk"), w("w");
  auto ck = quick_config(k.path());
  auto cnk = quick_config(nk.path());
  cnk.variant = Variant::b_pca_nk;
  auto cw = quick_config(w.path());
  cw.variant = Variant::without_pca;
  for (auto* c : {&ck, &cnk, &cw}) {
    run_features(*c);
    run_impute(*c);
    run_train(*c);
  }
  auto names = [](const fs::path& dir) { return FeatureMatrix::read_csv(design_file(dir, 1)).feature_names(); };
  auto kn = names(k.path());
  EXPECT_EQ(kn.size(), 13u);
  EXPECT_EQ(kn[11], "pca_1");
  EXPECT_EQ(names(nk.path()).size(), 9u);
  EXPECT_EQ(names(w.path()).size(), 11u);
  EXPECT_FALSE(fs::exists(pca_file(w.path(), 1)));
}

TEST(Pipeline, CrossValidationWritesFoldAucs) {
  oracle::TempDir out("cv");
  auto cfg = quick_config(out.path());
  cfg.folds = 3;
  auto r = run_pipeline(cfg);
  for (const auto& c : r.components) {
    ASSERT_EQ(c.fold_aucs.size(), 3u);
    EXPECT_GT(c.cv_auc, 0.5);
    EXPECT_TRUE(fs::exists(cv_file(out.path(), c.component)));
  }
  std::ostringstream s;
  print_summary(s, r);
  EXPECT_NE(s.str().find("k-fold AUC"), std::string::npos);
}

TEST(Pipeline, DeletingPostCutoffEventsKeepsFeatures) {
  oracle::TempDir dir("leak");
  auto events = read_events(fleet_dir() / "events.csv");
  const CutoffConfig cutoff;
  std::vector<MaintenanceEvent> early;
  for (const auto& e : events) {
    if (e.date <= cutoff.cutoff) early.push_back(e);
  }
  ASSERT_LT(early.size(), events.size());
  csv::write(dir / "events.csv", events_table(early));
  auto full = quick_config(dir / "full");
  auto trimmed = quick_config(dir / "trimmed");
  trimmed.events = dir / "events.csv";
  trimmed.trips = fleet_dir() / "trips.csv";
  auto comps = run_features(full);
  run_features(trimmed);
  for (ComponentId c : comps) {
    auto a = FeatureMatrix::read_csv(features_file(dir / "full", c));
    auto b = FeatureMatrix::read_csv(features_file(dir / "trimmed", c));
    a.clear_target();
    b.clear_target();
    std::ostringstream sa, sb;
    csv::write(sa, a.to_table());
    csv::write(sb, b.to_table());
    EXPECT_EQ(sa.str(), sb.str());
  }
}
