#pragma once

#include <chrono>
#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fleethealth/csv.hpp"
#include "fleethealth/date.hpp"

namespace fleethealth {

using ComponentId = int;

enum class EventKind { replacement, inspection, failure };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

struct MaintenanceEvent {
  std::string railcar_id;
  ComponentId component = 1;
  int location = 1;
  Date date;
  EventKind kind = EventKind::inspection;
  std::optional<std::string> condition_code;
  std::optional<double> mileage;
};

struct RailcarRecord {
  std::string railcar_id;
  Date build_date;
  std::optional<std::string> region;
};

// One loaded or empty movement of a railcar. Loading history and mileage are
// derived from these.
struct TripRecord {
  std::string railcar_id;
  Date start;
  Date end;
  bool loaded = false;
  std::optional<std::string> region;
  std::optional<double> miles;
};

struct SampleId {
  std::string railcar_id;
  ComponentId component = 1;
  int location = 1;

  // "<railcar>|<component>|<location>"
  std::string str() const;
  static SampleId parse(std::string_view text);

  auto operator<=>(const SampleId&) const = default;
};

struct CutoffConfig {
  Date cutoff{2019, 1, 1};
  std::chrono::days horizon{365};

  void validate() const;
  // Half-open failure window (cutoff, cutoff + horizon].
  bool in_window(Date d) const { return cutoff < d && d <= cutoff + horizon; }
};

// Railcar-side inputs to feature engineering.
struct FleetRecords {
  std::vector<RailcarRecord> cars;
  std::vector<TripRecord> trips;
};

enum class FeatureKind { numeric, categorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  std::string unit;
};

// Schema of the engineered features, in column order. Further features can be
// appended by registering them here; ingest uses it to type CSV columns.
const std::vector<FeatureSpec>& engineered_feature_schema();
std::optional<FeatureSpec> known_feature(std::string_view name);

// Samples x named features. Numeric cells use NaN for missing, categorical
// cells use nullopt. Storage is columnar.
class FeatureMatrix {
 public:
  struct Column {
    FeatureSpec spec;
    std::vector<double> numeric;
    std::vector<std::optional<std::string>> categorical;
  };

  FeatureMatrix() = default;
  explicit FeatureMatrix(std::vector<SampleId> samples);

  std::size_t rows() const { return samples_.size(); }
  std::size_t cols() const { return columns_.size(); }

  const std::vector<SampleId>& sample_ids() const { return samples_; }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t c) const { return columns_.at(c); }
  const FeatureSpec& spec(std::size_t c) const { return columns_.at(c).spec; }
  std::vector<std::string> feature_names() const;
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  void add_numeric(FeatureSpec spec, std::vector<double> values);
  void add_categorical(FeatureSpec spec, std::vector<std::optional<std::string>> values);

  bool is_missing(std::size_t r, std::size_t c) const;
  double numeric(std::size_t r, std::size_t c) const;
  const std::optional<std::string>& category(std::size_t r, std::size_t c) const;
  void set_numeric(std::size_t r, std::size_t c, double v);
  void set_category(std::size_t r, std::size_t c, std::string v);
  std::size_t missing_count() const;

  const std::optional<std::vector<int>>& target() const { return target_; }
  void set_target(std::vector<int> y);
  void clear_target() { target_.reset(); }

  // Numeric columns gathered as a dense block; throws on categorical columns.
  Eigen::MatrixXd numeric_block(std::span<const std::size_t> cols) const;

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  FeatureMatrix drop_columns(std::span<const std::string> names) const;

  // Rectangular, unique sample ids, target (if any) in {0,1}.
  void validate() const;

  csv::Table to_table() const;
  static FeatureMatrix from_table(const csv::Table& table);
  void write_csv(const std::filesystem::path& path) const;
  static FeatureMatrix read_csv(const std::filesystem::path& path);

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b);

 private:
  std::vector<SampleId> samples_;
  std::vector<Column> columns_;
  std::optional<std::vector<int>> target_;
};

// Ingest. Throw IngestError on malformed rows or duplicate event keys.
std::vector<MaintenanceEvent> read_events(const std::filesystem::path& path);
std::vector<MaintenanceEvent> parse_events(const csv::Table& table);
std::vector<RailcarRecord> read_cars(const std::filesystem::path& path);
std::vector<TripRecord> read_trips(const std::filesystem::path& path);

csv::Table events_table(std::span<const MaintenanceEvent> events);
csv::Table cars_table(std::span<const RailcarRecord> cars);
csv::Table trips_table(std::span<const TripRecord> trips);

// Throws IngestError if two events share (railcar, component, location, date, kind).
void reject_duplicate_events(std::span<const MaintenanceEvent> events);

std::map<ComponentId, std::vector<MaintenanceEvent>> split_by_component(
    std::span<const MaintenanceEvent> events);

std::map<SampleId, int> label_targets(std::span<const MaintenanceEvent> events,
                                      const CutoffConfig& cfg);

// Rows are every sample with at least one event on or before the cutoff,
// sorted by SampleId. Only history up to the cutoff is read.
FeatureMatrix engineer_features(std::span<const MaintenanceEvent> events,
                                const FleetRecords& fleet, const CutoffConfig& cfg);

// Attaches labels to rows by sample id; rows without a label get 0.
void attach_targets(FeatureMatrix& matrix, const std::map<SampleId, int>& labels);

}  // namespace fleethealth
