#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fleethealth/adasyn.hpp"
#include "fleethealth/core_model.hpp"
#include "fleethealth/fast_dbscan.hpp"
#include "fleethealth/forest.hpp"

namespace fleethealth {

enum class Variant { without_pca, b_pca_k, b_pca_nk, adasyn, adasyn_pca };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

struct PipelineConfig {
  std::filesystem::path events;
  std::filesystem::path cars;
  std::filesystem::path trips;  // optional; defaults to trips.csv beside events
  std::filesystem::path out_dir = "out";

  CutoffConfig cutoff;
  DbscanParams dbscan;

  std::vector<std::string> pca_subset = {"mileage_since_last_replacement", "component_age", "car_age",
                                         "car_mileage"};
  int pca_m = 2;
  std::optional<bool> keep_originals;  // unset: implied by the variant

  std::optional<bool> adasyn_enabled;  // unset: implied by the variant
  AdasynParams adasyn;

  ForestParams forest;
  std::map<ComponentId, double> weights;  // empty: uniform
  Variant variant = Variant::b_pca_k;
  std::uint64_t seed = 7;
  double test_fraction = 0.2;
  int folds = 0;  // >= 2 adds stratified k-fold cross-validation to evaluate

  bool uses_pca() const;
  bool keeps_originals() const;
  bool uses_adasyn() const;
  std::filesystem::path trips_path() const;

  // Rejects explicit settings that contradict the variant and invalid parameters.
  void validate() const;
};

// Reads the JSON config; unknown keys and type errors raise ConfigError.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const PipelineConfig& cfg);

// Applies FLEET_HEALTH_SEED when set.
void apply_environment(PipelineConfig& cfg);

struct ComponentResult {
  ComponentId component = 1;
  double auc = 0.0;
  double threshold = 0.5;
  double capture_10 = 0.0;
  double capture_50 = 0.0;
  std::size_t train_rows = 0;
  std::size_t synthetic_rows = 0;
  std::size_t test_rows = 0;
  std::vector<double> fold_aucs;
  double cv_auc = 0.0;
};

struct PipelineResult {
  Variant variant = Variant::b_pca_k;
  std::vector<ComponentResult> components;
  double fleet_capture_50 = 0.0;  // held-out rows of all components pooled
  std::size_t railcars_scored = 0;
};

// Stage file names under out_dir.
std::filesystem::path features_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path imputed_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path clusters_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path pca_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path design_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path split_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path train_rows_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path model_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path roc_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path gain_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path cv_file(const std::filesystem::path& dir, ComponentId c);
std::filesystem::path metrics_file(const std::filesystem::path& dir);
std::filesystem::path health_file(const std::filesystem::path& dir);

// Each stage reads the previous stage's files from out_dir and writes its
// own. On failure the files a stage wrote are removed before rethrowing.
std::vector<ComponentId> run_features(const PipelineConfig& cfg);
void run_impute(const PipelineConfig& cfg);
void run_train(const PipelineConfig& cfg);
PipelineResult run_evaluate(const PipelineConfig& cfg);
std::size_t run_score(const PipelineConfig& cfg);

// All stages in order; a failure removes every file this run produced.
PipelineResult run_pipeline(const PipelineConfig& cfg);

// Components with a features file in out_dir, ascending.
std::vector<ComponentId> discover_components(const std::filesystem::path& dir);

// Checks that no synthetic or training row reached the held-out side.
// Returns an empty string when the audit passes, else the first violation.
std::string audit_provenance(const std::filesystem::path& dir, ComponentId c);

void print_summary(std::ostream& out, const PipelineResult& result);

}  // namespace fleethealth
