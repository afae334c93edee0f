#include "fleethealth/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <regex>
#include <set>

#include "fleethealth/csv.hpp"
#include "fleethealth/errors.hpp"
#include "fleethealth/health.hpp"
#include "fleethealth/metrics.hpp"
#include "fleethealth/pca.hpp"
#include "fleethealth/rng.hpp"
#include "fleethealth/validation.hpp"

namespace fleethealth {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- config

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::without_pca:
      return "without-pca";
    case Variant::b_pca_k:
      return "b-pca-k";
    case Variant::b_pca_nk:
      return "b-pca-nk";
    case Variant::adasyn:
      return "adasyn";
    case Variant::adasyn_pca:
      return "adasyn-pca";
  }
  return "b-pca-k";
}

Variant parse_variant(std::string_view text) {
  for (auto v : {Variant::without_pca, Variant::b_pca_k, Variant::b_pca_nk, Variant::adasyn, Variant::adasyn_pca}) {
    if (to_string(v) == text) return v;
  }
  throw ConfigError("unknown variant '" + std::string(text) +
                    "' (expected without-pca, b-pca-k, b-pca-nk, adasyn or adasyn-pca)");
}

bool PipelineConfig::uses_pca() const {
  return variant == Variant::b_pca_k || variant == Variant::b_pca_nk || variant == Variant::adasyn_pca;
}

bool PipelineConfig::keeps_originals() const { return variant != Variant::b_pca_nk; }

bool PipelineConfig::uses_adasyn() const { return variant == Variant::adasyn || variant == Variant::adasyn_pca; }

fs::path PipelineConfig::trips_path() const {
  if (!trips.empty()) return trips;
  return events.parent_path() / "trips.csv";
}

void PipelineConfig::validate() const {
  if (keep_originals && uses_pca() && *keep_originals != keeps_originals()) {
    throw ConfigError("pca.keep_originals=" + std::string(*keep_originals ? "true" : "false") +
                      " conflicts with variant " + std::string(to_string(variant)));
  }
  if (adasyn_enabled && *adasyn_enabled != uses_adasyn()) {
    throw ConfigError("adasyn.enabled=" + std::string(*adasyn_enabled ? "true" : "false") +
                      " conflicts with variant " + std::string(to_string(variant)));
  }
  cutoff.validate();
  dbscan.validate();
  adasyn.validate();
  if (uses_pca()) {
    if (pca_subset.empty()) throw ConfigError("pca.subset is empty");
    if (pca_m < 1 || pca_m > static_cast<int>(pca_subset.size())) {
      throw ConfigError("pca.m must be in [1, " + std::to_string(pca_subset.size()) + "]");
    }
  }
  if (forest.n_trees < 1 || forest.max_depth < 1 || forest.min_leaf < 1) {
    throw ConfigError("forest parameters must be >= 1");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must be in (0, 1)");
  if (folds == 1 || folds < 0) throw ConfigError("folds must be 0 (off) or >= 2");
  for (const auto& [c, w] : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and non-negative");
  }
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  try {
    check_keys(j,
               {"paths", "cutoff_date", "horizon_days", "dbscan", "pca", "adasyn", "forest", "weights", "variant",
                "seed", "test_fraction", "folds"},
               "config");
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      check_keys(p, {"events", "cars", "trips", "out_dir"}, "paths");
      if (p.contains("events")) cfg.events = p.at("events").get<std::string>();
      if (p.contains("cars")) cfg.cars = p.at("cars").get<std::string>();
      if (p.contains("trips")) cfg.trips = p.at("trips").get<std::string>();
      if (p.contains("out_dir")) cfg.out_dir = p.at("out_dir").get<std::string>();
    }
    if (j.contains("cutoff_date")) cfg.cutoff.cutoff = Date::parse(j.at("cutoff_date").get<std::string>());
    if (j.contains("horizon_days")) cfg.cutoff.horizon = std::chrono::days{j.at("horizon_days").get<long long>()};
    if (j.contains("dbscan")) {
      const auto& d = j.at("dbscan");
      check_keys(d, {"eps", "min_points", "n_factor"}, "dbscan");
      cfg.dbscan.eps = d.value("eps", cfg.dbscan.eps);
      cfg.dbscan.min_points = d.value("min_points", cfg.dbscan.min_points);
      cfg.dbscan.n_factor = d.value("n_factor", cfg.dbscan.n_factor);
    }
    if (j.contains("pca")) {
      const auto& p = j.at("pca");
      check_keys(p, {"subset", "m", "keep_originals"}, "pca");
      if (p.contains("subset")) cfg.pca_subset = p.at("subset").get<std::vector<std::string>>();
      cfg.pca_m = p.value("m", cfg.pca_m);
      if (p.contains("keep_originals")) cfg.keep_originals = p.at("keep_originals").get<bool>();
    }
    if (j.contains("adasyn")) {
      const auto& a = j.at("adasyn");
      check_keys(a, {"enabled", "beta", "k"}, "adasyn");
      if (a.contains("enabled")) cfg.adasyn_enabled = a.at("enabled").get<bool>();
      cfg.adasyn.beta = a.value("beta", cfg.adasyn.beta);
      cfg.adasyn.k = a.value("k", cfg.adasyn.k);
    }
    if (j.contains("forest")) {
      const auto& f = j.at("forest");
      check_keys(f, {"n_trees", "max_depth", "min_leaf", "mtry"}, "forest");
      cfg.forest.n_trees = f.value("n_trees", cfg.forest.n_trees);
      cfg.forest.max_depth = f.value("max_depth", cfg.forest.max_depth);
      cfg.forest.min_leaf = f.value("min_leaf", cfg.forest.min_leaf);
      cfg.forest.mtry = f.value("mtry", cfg.forest.mtry);
    }
    if (j.contains("weights")) {
      for (const auto& [key, value] : j.at("weights").items()) {
        std::string k = key;
        if (!k.empty() && (k[0] == 'c' || k[0] == 'C')) k.erase(0, 1);
        cfg.weights[std::stoi(k)] = value.get<double>();
      }
    }
    if (j.contains("variant")) cfg.variant = parse_variant(j.at("variant").get<std::string>());
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("test_fraction")) cfg.test_fraction = j.at("test_fraction").get<double>();
    if (j.contains("folds")) cfg.folds = j.at("folds").get<int>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const PipelineConfig& cfg) {
  json weights = json::object();
  for (const auto& [c, w] : cfg.weights) weights[std::to_string(c)] = w;
  json pca = {{"subset", cfg.pca_subset}, {"m", cfg.pca_m}};
  if (cfg.keep_originals) pca["keep_originals"] = *cfg.keep_originals;
  json adasyn = {{"beta", cfg.adasyn.beta}, {"k", cfg.adasyn.k}};
  if (cfg.adasyn_enabled) adasyn["enabled"] = *cfg.adasyn_enabled;
  return json{{"paths",
               {{"events", cfg.events.string()},
                {"cars", cfg.cars.string()},
                {"trips", cfg.trips.string()},
                {"out_dir", cfg.out_dir.string()}}},
              {"cutoff_date", cfg.cutoff.cutoff.iso()},
              {"horizon_days", cfg.cutoff.horizon.count()},
              {"dbscan", {{"eps", cfg.dbscan.eps}, {"min_points", cfg.dbscan.min_points}, {"n_factor", cfg.dbscan.n_factor}}},
              {"pca", pca},
              {"adasyn", adasyn},
              {"forest",
               {{"n_trees", cfg.forest.n_trees},
                {"max_depth", cfg.forest.max_depth},
                {"min_leaf", cfg.forest.min_leaf},
                {"mtry", cfg.forest.mtry}}},
              {"weights", weights},
              {"variant", std::string(to_string(cfg.variant))},
              {"seed", cfg.seed},
              {"test_fraction", cfg.test_fraction},
              {"folds", cfg.folds}};
}

void apply_environment(PipelineConfig& cfg) {
  if (const char* s = std::getenv("FLEET_HEALTH_SEED"); s && *s) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(s, &used);
      if (used != std::string(s).size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError(std::string("FLEET_HEALTH_SEED is not an unsigned integer: ") + s);
    }
  }
}

// ---------------------------------------------------------------- files

namespace {

fs::path per_component(const fs::path& dir, const char* stem, ComponentId c, const char* ext) {
  return dir / (std::string(stem) + "_c" + std::to_string(c) + ext);
}

}  // namespace

fs::path features_file(const fs::path& d, ComponentId c) { return per_component(d, "features", c, ".csv"); }
fs::path imputed_file(const fs::path& d, ComponentId c) { return per_component(d, "imputed", c, ".csv"); }
fs::path clusters_file(const fs::path& d, ComponentId c) { return per_component(d, "clusters", c, ".csv"); }
fs::path pca_file(const fs::path& d, ComponentId c) { return per_component(d, "pca", c, ".json"); }
fs::path design_file(const fs::path& d, ComponentId c) { return per_component(d, "design", c, ".csv"); }
fs::path split_file(const fs::path& d, ComponentId c) { return per_component(d, "split", c, ".csv"); }
fs::path train_rows_file(const fs::path& d, ComponentId c) { return per_component(d, "train_rows", c, ".csv"); }
fs::path model_file(const fs::path& d, ComponentId c) { return per_component(d, "model", c, ".json"); }
fs::path roc_file(const fs::path& d, ComponentId c) { return per_component(d, "roc", c, ".csv"); }
fs::path gain_file(const fs::path& d, ComponentId c) { return per_component(d, "gain", c, ".csv"); }
fs::path cv_file(const fs::path& d, ComponentId c) { return per_component(d, "cv", c, ".csv"); }
fs::path metrics_file(const fs::path& d) { return d / "metrics.json"; }
fs::path health_file(const fs::path& d) { return d / "health_report.csv"; }

std::vector<ComponentId> discover_components(const fs::path& dir) {
  std::vector<ComponentId> out;
  if (!fs::is_directory(dir)) return out;
  static const std::regex pattern(R"(features_c(\d+)\.csv)");
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) out.push_back(std::stoi(m[1].str()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Files written by a run; removed unless the run completes.
class Outputs {
 public:
  Outputs() = default;
  Outputs(const Outputs&) = delete;
  Outputs& operator=(const Outputs&) = delete;
  ~Outputs() {
    if (committed_) return;
    for (const auto& p : files_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

  void track(const fs::path& p) {
    std::lock_guard lock(mu_);
    files_.push_back(p);
  }
  void commit() { committed_ = true; }

 private:
  std::mutex mu_;
  std::vector<fs::path> files_;
  bool committed_ = false;
};

void write_table(Outputs& out, const fs::path& path, const csv::Table& t) {
  out.track(path);
  csv::write(path, t);
}

void write_json(Outputs& out, const fs::path& path, const json& j) {
  out.track(path);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << j.dump() << '\n';
  if (!f) throw Error("write failed for " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing prerequisite file " + path.string());
  return json::parse(in);
}

FeatureMatrix read_matrix(const fs::path& path) {
  if (!fs::exists(path)) throw Error("missing prerequisite file " + path.string());
  return FeatureMatrix::read_csv(path);
}

template <typename F>
auto tagged(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const IngestError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::vector<ComponentId> require_components(const fs::path& dir) {
  auto comps = discover_components(dir);
  if (comps.empty()) throw Error("no features_c*.csv files in " + dir.string() + "; run `features` first");
  return comps;
}

// Seeds per stage and component.
enum : std::uint64_t { kSeedDbscan = 0x1000, kSeedSplit = 0x2000, kSeedForest = 0x3000, kSeedAdasyn = 0x4000,
                       kSeedFolds = 0x5000, kSeedFoldForest = 0x6000 };

std::uint64_t seed_for(const PipelineConfig& cfg, std::uint64_t stage, ComponentId c, std::uint64_t extra = 0) {
  return derive_seed(cfg.seed, stage + static_cast<std::uint64_t>(c) * 1024 + extra);
}

std::vector<std::size_t> rows_where(const std::vector<bool>& flags, bool value) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] == value) out.push_back(i);
  }
  return out;
}

// Training rows, optionally oversampled, with a provenance tag per row.
struct TrainingSet {
  FeatureSchema schema;
  Eigen::MatrixXd x;
  std::vector<int> y;
  csv::Table provenance;
  std::size_t synthetic = 0;
};

TrainingSet prepare_training(const PipelineConfig& cfg, const FeatureMatrix& train, std::uint64_t adasyn_seed) {
  TrainingSet ts;
  ts.schema = FeatureSchema::from_matrix(train);
  ts.x = ts.schema.encode(train);
  ts.y = *train.target();
  ts.provenance.header = {"provenance", "sample_id", "neighbor_id", "target"};
  for (std::size_t r = 0; r < train.rows(); ++r) {
    ts.provenance.rows.push_back(
        std::vector<std::string>{"original", train.sample_ids()[r].str(), "", std::to_string(ts.y[r])});
  }
  if (!cfg.uses_adasyn()) return ts;

  AdasynParams params = cfg.adasyn;
  params.seed = adasyn_seed;
  const auto mask = ts.schema.categorical_mask();
  auto res = adasyn(ts.x, ts.y, params, mask);
  ts.synthetic = res.origins.size();
  for (const auto& o : res.origins) {
    ts.provenance.rows.push_back(std::vector<std::string>{"synthetic", train.sample_ids()[o.base].str(),
                                                          train.sample_ids()[o.neighbor].str(),
                                                          std::to_string(res.minority_label)});
  }
  ts.x = std::move(res.x);
  ts.y = std::move(res.y);
  return ts;
}

std::vector<int> require_target(const FeatureMatrix& m, const fs::path& source) {
  if (!m.target()) throw Error(source.string() + " has no target column");
  return *m.target();
}

std::vector<bool> read_split(const fs::path& path, const FeatureMatrix& design) {
  if (!fs::exists(path)) throw Error("missing prerequisite file " + path.string());
  auto t = csv::read(path);
  if (t.header != std::vector<std::string>{"sample_id", "side"} || t.rows.size() != design.rows()) {
    throw Error(path.string() + " does not match the design matrix");
  }
  std::vector<bool> test(design.rows());
  for (std::size_t r = 0; r < design.rows(); ++r) {
    if (t.rows[r][0] != design.sample_ids()[r].str()) throw Error(path.string() + " rows are out of order");
    test[r] = t.rows[r][1] == "test";
  }
  return test;
}

TrainedComponentModel read_model(const fs::path& path) {
  return read_json(path).get<TrainedComponentModel>();
}

// ---------------------------------------------------------------- stages

std::vector<ComponentId> features_stage(const PipelineConfig& cfg, Outputs& out) {
  cfg.validate();
  std::vector<MaintenanceEvent> events;
  FleetRecords fleet;
  if (cfg.events.empty() || cfg.cars.empty()) throw ConfigError("paths.events and paths.cars are required");
  events = read_events(cfg.events);
  fleet.cars = read_cars(cfg.cars);
  if (fs::exists(cfg.trips_path())) fleet.trips = read_trips(cfg.trips_path());

  return tagged("features", [&] {
    fs::create_directories(cfg.out_dir);
    std::vector<ComponentId> comps;
    for (const auto& [c, evs] : split_by_component(events)) {
      FeatureMatrix m;
      try {
        m = engineer_features(evs, fleet, cfg.cutoff);
      } catch (const Error& e) {
        throw IngestError(e.what());
      }
      attach_targets(m, label_targets(evs, cfg.cutoff));
      write_table(out, features_file(cfg.out_dir, c), m.to_table());
      comps.push_back(c);
    }
    return comps;
  });
}

void impute_stage(const PipelineConfig& cfg, Outputs& out) {
  cfg.validate();
  tagged("impute", [&] {
    for (ComponentId c : require_components(cfg.out_dir)) {
      auto m = read_matrix(features_file(cfg.out_dir, c));
      DbscanParams params = cfg.dbscan;
      params.seed = seed_for(cfg, kSeedDbscan, c);
      auto assignment = cluster(m, params);
      auto filled = impute(m, assignment);
      write_table(out, imputed_file(cfg.out_dir, c), filled.to_table());
      csv::Table t;
      t.header = {"sample_id", "cluster"};
      for (std::size_t r = 0; r < m.rows(); ++r) {
        t.rows.push_back({m.sample_ids()[r].str(), std::to_string(assignment.labels[r])});
      }
      write_table(out, clusters_file(cfg.out_dir, c), t);
    }
  });
}

void train_component(const PipelineConfig& cfg, ComponentId c, Outputs& out) {
  const fs::path dir = cfg.out_dir;
  auto m = read_matrix(imputed_file(dir, c));
  if (m.missing_count() != 0) throw Error(imputed_file(dir, c).string() + " still has missing cells");
  require_target(m, imputed_file(dir, c));

  FeatureMatrix design = m;
  if (cfg.uses_pca()) {
    auto fit = fit_project(m, cfg.pca_subset, cfg.pca_m, cfg.keeps_originals());
    write_json(out, pca_file(dir, c), json(fit.model));
    design = std::move(fit.matrix);
  }
  write_table(out, design_file(dir, c), design.to_table());

  const auto& y = *design.target();
  const auto test = holdout_split(design.sample_ids(), y, cfg.test_fraction, seed_for(cfg, kSeedSplit, c));
  csv::Table split;
  split.header = {"sample_id", "side"};
  for (std::size_t r = 0; r < design.rows(); ++r) {
    split.rows.push_back({design.sample_ids()[r].str(), test[r] ? "test" : "train"});
  }
  write_table(out, split_file(dir, c), split);

  const auto train_rows = rows_where(test, false);
  const auto test_rows = rows_where(test, true);
  auto ts = prepare_training(cfg, design.select_rows(train_rows), seed_for(cfg, kSeedAdasyn, c));
  write_table(out, train_rows_file(dir, c), ts.provenance);

  ForestParams fp = cfg.forest;
  fp.seed = seed_for(cfg, kSeedForest, c);
  auto model = fit_forest(ts.x, ts.y, ts.schema, fp);
  model.component = c;

  auto held_out = design.select_rows(test_rows);
  auto p = predict_proba(model, held_out);
  model.threshold = select_threshold(roc_auc(p, *held_out.target()));
  write_json(out, model_file(dir, c), json(model));
}

void train_stage(const PipelineConfig& cfg, Outputs& out) {
  cfg.validate();
  tagged("train", [&] {
    const auto comps = require_components(cfg.out_dir);
    // Components are independent; each task owns its own files.
    std::vector<std::future<void>> tasks;
    for (ComponentId c : comps) {
      tasks.push_back(std::async(std::launch::async, [&cfg, &out, c] { train_component(cfg, c, out); }));
    }
    std::exception_ptr first;
    for (auto& t : tasks) {
      try {
        t.get();
      } catch (...) {
        if (!first) first = std::current_exception();
      }
    }
    if (first) std::rethrow_exception(first);
  });
}

std::vector<double> cross_validate(const PipelineConfig& cfg, ComponentId c, const FeatureMatrix& design) {
  const auto& y = *design.target();
  const auto folds = stratified_group_folds(design.sample_ids(), y, cfg.folds, seed_for(cfg, kSeedFolds, c));
  std::vector<double> aucs;
  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<bool> held(folds.size());
    for (std::size_t r = 0; r < folds.size(); ++r) held[r] = folds[r] == f;
    auto train = design.select_rows(rows_where(held, false));
    auto test = design.select_rows(rows_where(held, true));
    auto ts = prepare_training(cfg, train, seed_for(cfg, kSeedAdasyn, c, 1 + static_cast<std::uint64_t>(f)));
    ForestParams fp = cfg.forest;
    fp.seed = seed_for(cfg, kSeedFoldForest, c, static_cast<std::uint64_t>(f));
    auto model = fit_forest(ts.x, ts.y, ts.schema, fp);
    aucs.push_back(roc_auc(predict_proba(model, test), *test.target()).auc);
  }
  return aucs;
}

PipelineResult evaluate_stage(const PipelineConfig& cfg, Outputs& out) {
  cfg.validate();
  return tagged("evaluate", [&] {
    const fs::path dir = cfg.out_dir;
    PipelineResult result;
    result.variant = cfg.variant;
    std::vector<double> pooled_scores;
    std::vector<int> pooled_labels;
    json per_component = json::array();

    for (ComponentId c : require_components(dir)) {
      auto design = read_matrix(design_file(dir, c));
      require_target(design, design_file(dir, c));
      const auto test = read_split(split_file(dir, c), design);
      const auto model = read_model(model_file(dir, c));
      auto held_out = design.select_rows(rows_where(test, true));

      const auto p = predict_proba(model, held_out);
      const auto& labels = *held_out.target();
      const auto roc = roc_auc(p, labels);
      const auto gain = gain_curve(p, labels);
      write_table(out, roc_file(dir, c), roc_table(roc));
      write_table(out, gain_file(dir, c), gain_table(gain));
      pooled_scores.insert(pooled_scores.end(), p.begin(), p.end());
      pooled_labels.insert(pooled_labels.end(), labels.begin(), labels.end());

      ComponentResult cr;
      cr.component = c;
      cr.auc = roc.auc;
      cr.threshold = model.threshold;
      cr.capture_10 = capture_at(gain, 0.1);
      cr.capture_50 = capture_at(gain, 0.5);
      cr.test_rows = held_out.rows();
      cr.train_rows = design.rows() - held_out.rows();
      if (fs::exists(train_rows_file(dir, c))) {
        const auto rows = csv::read(train_rows_file(dir, c));
        cr.synthetic_rows = static_cast<std::size_t>(std::count_if(
            rows.rows.begin(), rows.rows.end(), [](const auto& r) { return r[0] == "synthetic"; }));
      }
      if (cfg.folds >= 2) {
        cr.fold_aucs = cross_validate(cfg, c, design);
        double sum = 0.0;
        for (double a : cr.fold_aucs) sum += a;
        cr.cv_auc = sum / static_cast<double>(cr.fold_aucs.size());
        csv::Table t;
        t.header = {"fold", "auc"};
        for (std::size_t f = 0; f < cr.fold_aucs.size(); ++f) {
          t.rows.push_back({std::to_string(f), csv::format_number(cr.fold_aucs[f])});
        }
        t.rows.push_back({"mean", csv::format_number(cr.cv_auc)});
        write_table(out, cv_file(dir, c), t);
      }

      json importances = json::object();
      for (std::size_t k = 0; k < model.schema.features.size(); ++k) {
        importances[model.schema.features[k].name] = model.importances[k];
      }
      json entry = {{"component_id", c},
                    {"auc", cr.auc},
                    {"threshold", cr.threshold},
                    {"capture_at_0.1", cr.capture_10},
                    {"capture_at_0.5", cr.capture_50},
                    {"train_rows", cr.train_rows},
                    {"synthetic_rows", cr.synthetic_rows},
                    {"test_rows", cr.test_rows},
                    {"importances", importances}};
      if (cfg.folds >= 2) {
        entry["cv_folds"] = cfg.folds;
        entry["cv_auc"] = cr.cv_auc;
      }
      per_component.push_back(entry);
      result.components.push_back(std::move(cr));
    }

    result.fleet_capture_50 = capture_at(gain_curve(pooled_scores, pooled_labels), 0.5);
    write_json(out, metrics_file(dir),
               json{{"variant", std::string(to_string(cfg.variant))},
                    {"components", per_component},
                    {"fleet_capture_at_0.5", result.fleet_capture_50}});
    return result;
  });
}

std::size_t score_stage(const PipelineConfig& cfg, Outputs& out) {
  cfg.validate();
  return tagged("score", [&] {
    const fs::path dir = cfg.out_dir;
    const auto comps = require_components(dir);

    std::map<std::string, Eigen::VectorXd> probs;
    auto row_for = [&](const std::string& car) -> Eigen::VectorXd& {
      auto it = probs.find(car);
      if (it == probs.end()) {
        it = probs.emplace(car, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(comps.size()),
                                                          std::numeric_limits<double>::quiet_NaN()))
                 .first;
      }
      return it->second;
    };

    HealthReport report;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const ComponentId c = comps[i];
      const auto model = read_model(model_file(dir, c));
      auto m = read_matrix(imputed_file(dir, c));
      if (cfg.uses_pca()) m = apply_pca(read_json(pca_file(dir, c)).get<PcaModel<double>>(), m);
      m.clear_target();
      const auto p = predict_proba(model, m);
      // A railcar's component probability is its worst location.
      for (std::size_t r = 0; r < m.rows(); ++r) {
        double& cell = row_for(m.sample_ids()[r].railcar_id)(static_cast<Eigen::Index>(i));
        cell = std::isnan(cell) ? p[r] : std::max(cell, p[r]);
      }
      report.model_versions[c] = "fleethealth.forest/1";
    }

    Eigen::VectorXd raw(static_cast<Eigen::Index>(comps.size()));
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (cfg.weights.empty()) {
        raw(static_cast<Eigen::Index>(i)) = 1.0;
      } else {
        auto it = cfg.weights.find(comps[i]);
        if (it == cfg.weights.end()) throw ConfigError("no weight configured for component " + std::to_string(comps[i]));
        raw(static_cast<Eigen::Index>(i)) = it->second;
      }
    }
    auto scored = score_fleet(ComponentWeights::normalized(comps, raw), probs);
    scored.model_versions = report.model_versions;
    write_table(out, health_file(dir), health_table(scored));
    return scored.rows.size();
  });
}

}  // namespace

std::vector<ComponentId> run_features(const PipelineConfig& cfg) {
  Outputs out;
  auto comps = features_stage(cfg, out);
  out.commit();
  return comps;
}

void run_impute(const PipelineConfig& cfg) {
  Outputs out;
  impute_stage(cfg, out);
  out.commit();
}

void run_train(const PipelineConfig& cfg) {
  Outputs out;
  train_stage(cfg, out);
  out.commit();
}

PipelineResult run_evaluate(const PipelineConfig& cfg) {
  Outputs out;
  auto r = evaluate_stage(cfg, out);
  out.commit();
  return r;
}

std::size_t run_score(const PipelineConfig& cfg) {
  Outputs out;
  auto n = score_stage(cfg, out);
  out.commit();
  return n;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  Outputs out;
  features_stage(cfg, out);
  impute_stage(cfg, out);
  train_stage(cfg, out);
  auto result = evaluate_stage(cfg, out);
  result.railcars_scored = score_stage(cfg, out);
  out.commit();
  return result;
}

std::string audit_provenance(const fs::path& dir, ComponentId c) {
  const auto split = csv::read(split_file(dir, c));
  std::map<std::string, std::string> side;
  for (const auto& r : split.rows) side[r[0]] = r[1];
  const auto rows = csv::read(train_rows_file(dir, c));
  for (const auto& r : rows.rows) {
    const std::string& kind = r[0];
    for (std::size_t col : {std::size_t{1}, std::size_t{2}}) {
      if (r[col].empty()) continue;
      auto it = side.find(r[col]);
      if (it == side.end()) return kind + " row refers to unknown sample " + r[col];
      if (it->second != "train") return kind + " training row derives from held-out sample " + r[col];
    }
    if (kind != "original" && kind != "synthetic") return "unknown provenance tag '" + kind + "'";
  }
  return {};
}

void print_summary(std::ostream& out, const PipelineResult& result) {
  out << std::left << std::setw(14) << "Model";
  for (const auto& c : result.components) out << std::setw(14) << ("Component #" + std::to_string(c.component));
  out << '\n' << std::setw(14) << to_string(result.variant);
  out << std::fixed << std::setprecision(3);
  for (const auto& c : result.components) out << std::setw(14) << c.auc;
  out << '\n';
  if (!result.components.empty() && !result.components.front().fold_aucs.empty()) {
    out << std::setw(14) << "k-fold AUC";
    for (const auto& c : result.components) out << std::setw(14) << c.cv_auc;
    out << '\n';
  }
  out << std::setw(14) << "capture@10%";
  for (const auto& c : result.components) out << std::setw(14) << c.capture_10;
  out << '\n' << std::setw(14) << "capture@50%";
  for (const auto& c : result.components) out << std::setw(14) << c.capture_50;
  out << "\nfleet capture@50%: " << result.fleet_capture_50 << '\n';
  if (result.railcars_scored) out << "railcars scored: " << result.railcars_scored << '\n';
  out.unsetf(std::ios::floatfield);
}

}  // namespace fleethealth
