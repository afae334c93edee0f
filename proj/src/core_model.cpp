#include "fleethealth/core_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>

#include "fleethealth/errors.hpp"

namespace fleethealth {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDaysPerYear = 365.25;

int parse_int(std::string_view text, const char* what) {
  if (!text.empty() && (text.front() == 'c' || text.front() == 'C')) text.remove_prefix(1);
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw IngestError(std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return v;
}

std::optional<std::string> optional_text(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

std::size_t require_column(const csv::Table& t, std::string_view name, const std::string& file) {
  auto c = t.column(name);
  if (!c) throw IngestError(file + ": missing column '" + std::string(name) + "'");
  return *c;
}

Date parse_date(const std::string& s, const char* what) {
  try {
    return Date::parse(s);
  } catch (const Error& e) {
    throw IngestError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::replacement:
      return "replacement";
    case EventKind::inspection:
      return "inspection";
    case EventKind::failure:
      return "failure";
  }
  return "inspection";
}

EventKind parse_event_kind(std::string_view text) {
  if (text == "replacement") return EventKind::replacement;
  if (text == "inspection") return EventKind::inspection;
  if (text == "failure") return EventKind::failure;
  throw IngestError("unknown event_kind '" + std::string(text) + "'");
}

std::string SampleId::str() const {
  return railcar_id + "|" + std::to_string(component) + "|" + std::to_string(location);
}

SampleId SampleId::parse(std::string_view text) {
  auto last = text.rfind('|');
  if (last == std::string_view::npos || last == 0) {
    throw IngestError("malformed sample_id '" + std::string(text) + "'");
  }
  auto mid = text.rfind('|', last - 1);
  if (mid == std::string_view::npos) {
    throw IngestError("malformed sample_id '" + std::string(text) + "'");
  }
  SampleId id;
  id.railcar_id = std::string(text.substr(0, mid));
  id.component = parse_int(text.substr(mid + 1, last - mid - 1), "component in sample_id");
  id.location = parse_int(text.substr(last + 1), "location in sample_id");
  return id;
}

void CutoffConfig::validate() const {
  if (horizon.count() <= 0) throw ConfigError("horizon must be positive");
}

const std::vector<FeatureSpec>& engineered_feature_schema() {
  static const std::vector<FeatureSpec> schema = {
      {"mileage_since_last_replacement", FeatureKind::numeric, "miles"},
      {"component_age", FeatureKind::numeric, "days"},
      {"pocket_number", FeatureKind::categorical, ""},
      {"condition_code", FeatureKind::categorical, ""},
      {"car_age", FeatureKind::numeric, "days"},
      {"loading_count", FeatureKind::numeric, "count"},
      {"loading_regions", FeatureKind::numeric, "count"},
      {"avg_days_in_service", FeatureKind::numeric, "days/year"},
      {"avg_day_trip_loaded", FeatureKind::numeric, "days"},
      {"avg_day_trip_empty", FeatureKind::numeric, "days"},
      {"car_mileage", FeatureKind::numeric, "miles"},
  };
  return schema;
}

std::optional<FeatureSpec> known_feature(std::string_view name) {
  for (const auto& spec : engineered_feature_schema()) {
    if (spec.name == name) return spec;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- FeatureMatrix

FeatureMatrix::FeatureMatrix(std::vector<SampleId> samples) : samples_(std::move(samples)) {}

std::vector<std::string> FeatureMatrix::feature_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const auto& c : columns_) names.push_back(c.spec.name);
  return names;
}

std::optional<std::size_t> FeatureMatrix::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].spec.name == name) return i;
  }
  return std::nullopt;
}

std::size_t FeatureMatrix::index_of(std::string_view name) const {
  auto i = find(name);
  if (!i) throw Error("unknown feature '" + std::string(name) + "'");
  return *i;
}

void FeatureMatrix::add_numeric(FeatureSpec spec, std::vector<double> values) {
  if (values.size() != rows()) throw Error("column '" + spec.name + "' has wrong length");
  if (find(spec.name)) throw Error("duplicate feature '" + spec.name + "'");
  spec.kind = FeatureKind::numeric;
  columns_.push_back({std::move(spec), std::move(values), {}});
}

void FeatureMatrix::add_categorical(FeatureSpec spec,
                                    std::vector<std::optional<std::string>> values) {
  if (values.size() != rows()) throw Error("column '" + spec.name + "' has wrong length");
  if (find(spec.name)) throw Error("duplicate feature '" + spec.name + "'");
  spec.kind = FeatureKind::categorical;
  columns_.push_back({std::move(spec), {}, std::move(values)});
}

bool FeatureMatrix::is_missing(std::size_t r, std::size_t c) const {
  const auto& col = columns_.at(c);
  if (col.spec.kind == FeatureKind::numeric) return std::isnan(col.numeric.at(r));
  return !col.categorical.at(r).has_value();
}

double FeatureMatrix::numeric(std::size_t r, std::size_t c) const {
  const auto& col = columns_.at(c);
  if (col.spec.kind != FeatureKind::numeric) throw Error("feature '" + col.spec.name + "' is categorical");
  return col.numeric.at(r);
}

const std::optional<std::string>& FeatureMatrix::category(std::size_t r, std::size_t c) const {
  const auto& col = columns_.at(c);
  if (col.spec.kind != FeatureKind::categorical) throw Error("feature '" + col.spec.name + "' is numeric");
  return col.categorical.at(r);
}

void FeatureMatrix::set_numeric(std::size_t r, std::size_t c, double v) {
  auto& col = columns_.at(c);
  if (col.spec.kind != FeatureKind::numeric) throw Error("feature '" + col.spec.name + "' is categorical");
  col.numeric.at(r) = v;
}

void FeatureMatrix::set_category(std::size_t r, std::size_t c, std::string v) {
  auto& col = columns_.at(c);
  if (col.spec.kind != FeatureKind::categorical) throw Error("feature '" + col.spec.name + "' is numeric");
  col.categorical.at(r) = std::move(v);
}

std::size_t FeatureMatrix::missing_count() const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < cols(); ++c) {
    for (std::size_t r = 0; r < rows(); ++r) n += is_missing(r, c) ? 1 : 0;
  }
  return n;
}

void FeatureMatrix::set_target(std::vector<int> y) {
  if (y.size() != rows()) throw Error("target length does not match row count");
  for (int v : y) {
    if (v != 0 && v != 1) throw Error("target entries must be 0 or 1");
  }
  target_ = std::move(y);
}

Eigen::MatrixXd FeatureMatrix::numeric_block(std::span<const std::size_t> cols) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto& col = columns_.at(cols[j]);
    if (col.spec.kind != FeatureKind::numeric) {
      throw Error("feature '" + col.spec.name + "' is not numeric");
    }
    for (std::size_t r = 0; r < rows(); ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = col.numeric[r];
    }
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows_idx) const {
  std::vector<SampleId> ids;
  ids.reserve(rows_idx.size());
  for (auto r : rows_idx) ids.push_back(samples_.at(r));
  FeatureMatrix out(std::move(ids));
  for (const auto& col : columns_) {
    Column c{col.spec, {}, {}};
    if (col.spec.kind == FeatureKind::numeric) {
      for (auto r : rows_idx) c.numeric.push_back(col.numeric[r]);
    } else {
      for (auto r : rows_idx) c.categorical.push_back(col.categorical[r]);
    }
    out.columns_.push_back(std::move(c));
  }
  if (target_) {
    std::vector<int> y;
    for (auto r : rows_idx) y.push_back((*target_)[r]);
    out.target_ = std::move(y);
  }
  return out;
}

FeatureMatrix FeatureMatrix::drop_columns(std::span<const std::string> names) const {
  FeatureMatrix out(samples_);
  for (const auto& col : columns_) {
    if (std::find(names.begin(), names.end(), col.spec.name) == names.end()) {
      out.columns_.push_back(col);
    }
  }
  out.target_ = target_;
  return out;
}

void FeatureMatrix::validate() const {
  for (const auto& col : columns_) {
    std::size_t n = col.spec.kind == FeatureKind::numeric ? col.numeric.size() : col.categorical.size();
    if (n != rows()) throw Error("feature matrix is not rectangular at '" + col.spec.name + "'");
  }
  if (target_) {
    if (target_->size() != rows()) throw Error("target length does not match row count");
    for (int v : *target_) {
      if (v != 0 && v != 1) throw Error("target entries must be 0 or 1");
    }
  }
  std::set<SampleId> seen;
  for (const auto& id : samples_) {
    if (!seen.insert(id).second) throw Error("duplicate sample id " + id.str());
  }
}

csv::Table FeatureMatrix::to_table() const {
  csv::Table t;
  t.header.push_back("sample_id");
  for (const auto& c : columns_) t.header.push_back(c.spec.name);
  if (target_) t.header.push_back("target");
  t.rows.reserve(rows());
  for (std::size_t r = 0; r < rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(t.header.size());
    row.push_back(samples_[r].str());
    for (const auto& c : columns_) {
      if (c.spec.kind == FeatureKind::numeric) {
        row.push_back(std::isnan(c.numeric[r]) ? std::string() : csv::format_number(c.numeric[r]));
      } else {
        row.push_back(c.categorical[r].value_or(std::string()));
      }
    }
    if (target_) row.push_back(std::to_string((*target_)[r]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

FeatureMatrix FeatureMatrix::from_table(const csv::Table& table) {
  if (table.header.empty() || table.header.front() != "sample_id") {
    throw IngestError("feature matrix CSV must start with a sample_id column");
  }
  const bool has_target = table.header.size() > 1 && table.header.back() == "target";
  const std::size_t first = 1;
  const std::size_t last = table.header.size() - (has_target ? 1 : 0);

  std::vector<SampleId> ids;
  ids.reserve(table.rows.size());
  for (const auto& row : table.rows) ids.push_back(SampleId::parse(row[0]));
  FeatureMatrix m(std::move(ids));

  for (std::size_t c = first; c < last; ++c) {
    const std::string& name = table.header[c];
    FeatureSpec spec{name, FeatureKind::numeric, ""};
    if (auto known = known_feature(name)) {
      spec = *known;
    } else {
      for (const auto& row : table.rows) {
        if (!row[c].empty() && !csv::parse_number(row[c])) {
          spec.kind = FeatureKind::categorical;
          break;
        }
      }
    }
    if (spec.kind == FeatureKind::numeric) {
      std::vector<double> v;
      v.reserve(table.rows.size());
      for (const auto& row : table.rows) {
        if (row[c].empty()) {
          v.push_back(kNaN);
        } else if (auto x = csv::parse_number(row[c])) {
          v.push_back(*x);
        } else {
          throw IngestError("non-numeric value '" + row[c] + "' in numeric feature " + name);
        }
      }
      m.add_numeric(spec, std::move(v));
    } else {
      std::vector<std::optional<std::string>> v;
      v.reserve(table.rows.size());
      for (const auto& row : table.rows) v.push_back(optional_text(row[c]));
      m.add_categorical(spec, std::move(v));
    }
  }
  if (has_target) {
    std::vector<int> y;
    y.reserve(table.rows.size());
    for (const auto& row : table.rows) {
      const auto& s = row.back();
      if (s == "0") {
        y.push_back(0);
      } else if (s == "1") {
        y.push_back(1);
      } else {
        throw IngestError("target must be 0 or 1, found '" + s + "'");
      }
    }
    m.set_target(std::move(y));
  }
  m.validate();
  return m;
}

void FeatureMatrix::write_csv(const std::filesystem::path& path) const {
  csv::write(path, to_table());
}

FeatureMatrix FeatureMatrix::read_csv(const std::filesystem::path& path) {
  try {
    return from_table(csv::read(path));
  } catch (const IngestError&) {
    throw;
  } catch (const Error& e) {
    throw IngestError(e.what());
  }
}

bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.samples_ != b.samples_ || a.target_ != b.target_ || a.cols() != b.cols()) return false;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    const auto& x = a.columns_[c];
    const auto& y = b.columns_[c];
    if (x.spec.name != y.spec.name || x.spec.kind != y.spec.kind) return false;
    if (x.categorical != y.categorical) return false;
    if (x.numeric.size() != y.numeric.size()) return false;
    for (std::size_t r = 0; r < x.numeric.size(); ++r) {
      double u = x.numeric[r], v = y.numeric[r];
      if (!(u == v || (std::isnan(u) && std::isnan(v)))) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------- ingest

std::vector<MaintenanceEvent> parse_events(const csv::Table& t) {
  const std::string file = "events.csv";
  auto c_car = require_column(t, "railcar_id", file);
  auto c_comp = require_column(t, "component_id", file);
  auto c_loc = require_column(t, "location", file);
  auto c_date = require_column(t, "event_date", file);
  auto c_kind = require_column(t, "event_kind", file);
  auto c_cond = require_column(t, "condition_code", file);
  auto c_miles = require_column(t, "mileage", file);

  std::vector<MaintenanceEvent> events;
  events.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    MaintenanceEvent e;
    e.railcar_id = row[c_car];
    if (e.railcar_id.empty()) throw IngestError("event with empty railcar_id");
    e.component = parse_int(row[c_comp], "component_id");
    e.location = parse_int(row[c_loc], "location");
    e.date = parse_date(row[c_date], "event_date");
    e.kind = parse_event_kind(row[c_kind]);
    e.condition_code = optional_text(row[c_cond]);
    if (!row[c_miles].empty()) {
      auto m = csv::parse_number(row[c_miles]);
      if (!m || *m < 0.0) throw IngestError("invalid mileage '" + row[c_miles] + "'");
      e.mileage = *m;
    }
    events.push_back(std::move(e));
  }
  reject_duplicate_events(events);
  return events;
}

std::vector<MaintenanceEvent> read_events(const std::filesystem::path& path) {
  csv::Table t;
  try {
    t = csv::read(path);
  } catch (const Error& e) {
    throw IngestError(e.what());
  }
  if (t.rows.empty()) throw IngestError(path.string() + ": no events");
  return parse_events(t);
}

std::vector<RailcarRecord> read_cars(const std::filesystem::path& path) {
  csv::Table t;
  try {
    t = csv::read(path);
  } catch (const Error& e) {
    throw IngestError(e.what());
  }
  const std::string file = path.filename().string();
  auto c_car = require_column(t, "railcar_id", file);
  auto c_build = require_column(t, "build_date", file);
  auto c_region = require_column(t, "region", file);
  std::vector<RailcarRecord> cars;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    RailcarRecord r{row[c_car], parse_date(row[c_build], "build_date"), optional_text(row[c_region])};
    if (!seen.insert(r.railcar_id).second) throw IngestError("duplicate railcar " + r.railcar_id);
    cars.push_back(std::move(r));
  }
  return cars;
}

std::vector<TripRecord> read_trips(const std::filesystem::path& path) {
  csv::Table t;
  try {
    t = csv::read(path);
  } catch (const Error& e) {
    throw IngestError(e.what());
  }
  const std::string file = path.filename().string();
  auto c_car = require_column(t, "railcar_id", file);
  auto c_start = require_column(t, "start_date", file);
  auto c_end = require_column(t, "end_date", file);
  auto c_loaded = require_column(t, "loaded", file);
  auto c_region = require_column(t, "region", file);
  auto c_miles = require_column(t, "miles", file);
  std::vector<TripRecord> trips;
  trips.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    TripRecord r;
    r.railcar_id = row[c_car];
    r.start = parse_date(row[c_start], "start_date");
    r.end = parse_date(row[c_end], "end_date");
    if (r.end < r.start) throw IngestError("trip ends before it starts for " + r.railcar_id);
    if (row[c_loaded] == "1") {
      r.loaded = true;
    } else if (row[c_loaded] != "0") {
      throw IngestError("loaded must be 0 or 1");
    }
    r.region = optional_text(row[c_region]);
    if (!row[c_miles].empty()) {
      auto m = csv::parse_number(row[c_miles]);
      if (!m || *m < 0.0) throw IngestError("invalid trip miles '" + row[c_miles] + "'");
      r.miles = *m;
    }
    trips.push_back(std::move(r));
  }
  return trips;
}

csv::Table events_table(std::span<const MaintenanceEvent> events) {
  csv::Table t;
  t.header = {"railcar_id", "component_id", "location", "event_date", "event_kind", "condition_code", "mileage"};
  for (const auto& e : events) {
    t.rows.push_back({e.railcar_id, std::to_string(e.component), std::to_string(e.location), e.date.iso(),
                      std::string(to_string(e.kind)), e.condition_code.value_or(""),
                      e.mileage ? csv::format_number(*e.mileage) : std::string()});
  }
  return t;
}

csv::Table cars_table(std::span<const RailcarRecord> cars) {
  csv::Table t;
  t.header = {"railcar_id", "build_date", "region"};
  for (const auto& c : cars) t.rows.push_back({c.railcar_id, c.build_date.iso(), c.region.value_or("")});
  return t;
}

csv::Table trips_table(std::span<const TripRecord> trips) {
  csv::Table t;
  t.header = {"railcar_id", "start_date", "end_date", "loaded", "region", "miles"};
  for (const auto& r : trips) {
    t.rows.push_back({r.railcar_id, r.start.iso(), r.end.iso(), r.loaded ? "1" : "0", r.region.value_or(""),
                      r.miles ? csv::format_number(*r.miles) : std::string()});
  }
  return t;
}

void reject_duplicate_events(std::span<const MaintenanceEvent> events) {
  using Key = std::tuple<std::string, ComponentId, int, long long, EventKind>;
  std::set<Key> seen;
  for (const auto& e : events) {
    if (!seen.emplace(e.railcar_id, e.component, e.location, e.date.serial(), e.kind).second) {
      throw IngestError("duplicate event for " + e.railcar_id + " component " + std::to_string(e.component) +
                        " location " + std::to_string(e.location) + " on " + e.date.iso());
    }
  }
}

// ---------------------------------------------------------------- operations

std::map<ComponentId, std::vector<MaintenanceEvent>> split_by_component(
    std::span<const MaintenanceEvent> events) {
  std::map<ComponentId, std::vector<MaintenanceEvent>> out;
  for (const auto& e : events) out[e.component].push_back(e);
  return out;
}

std::map<SampleId, int> label_targets(std::span<const MaintenanceEvent> events, const CutoffConfig& cfg) {
  cfg.validate();
  std::map<SampleId, int> labels;
  for (const auto& e : events) {
    SampleId id{e.railcar_id, e.component, e.location};
    int& y = labels[id];
    bool needs_replacement = e.kind == EventKind::failure || e.kind == EventKind::replacement;
    if (needs_replacement && cfg.in_window(e.date)) y = 1;
  }
  return labels;
}

namespace {

struct CarAggregates {
  double car_age = kNaN;
  double loading_count = 0.0;
  double loading_regions = 0.0;
  double avg_days_in_service = kNaN;
  double avg_trip_loaded = kNaN;
  double avg_trip_empty = kNaN;
  double car_mileage = 0.0;
};

CarAggregates aggregate_car(const RailcarRecord* car, std::span<const TripRecord* const> trips,
                            const CutoffConfig& cfg) {
  CarAggregates a;
  if (car) a.car_age = static_cast<double>((cfg.cutoff - car->build_date).count());

  std::set<std::string> regions;
  double loaded_days = 0.0, empty_days = 0.0;
  std::size_t n_loaded = 0, n_empty = 0;
  bool miles_known = true;
  for (const TripRecord* t : trips) {
    if (t->end > cfg.cutoff) continue;
    double days = static_cast<double>((t->end - t->start).count());
    if (t->loaded) {
      ++n_loaded;
      loaded_days += days;
      if (t->region) regions.insert(*t->region);
    } else {
      ++n_empty;
      empty_days += days;
    }
    if (t->miles) {
      a.car_mileage += *t->miles;
    } else {
      miles_known = false;
    }
  }
  a.loading_count = static_cast<double>(n_loaded);
  a.loading_regions = static_cast<double>(regions.size());
  if (n_loaded) a.avg_trip_loaded = loaded_days / static_cast<double>(n_loaded);
  if (n_empty) a.avg_trip_empty = empty_days / static_cast<double>(n_empty);
  if ((n_loaded + n_empty) > 0 && !std::isnan(a.car_age) && a.car_age > 0.0) {
    a.avg_days_in_service = (loaded_days + empty_days) / (a.car_age / kDaysPerYear);
  }
  if (!miles_known) a.car_mileage = kNaN;
  return a;
}

}  // namespace

FeatureMatrix engineer_features(std::span<const MaintenanceEvent> events, const FleetRecords& fleet,
                                const CutoffConfig& cfg) {
  cfg.validate();
  const Date limit = cfg.cutoff + cfg.horizon;

  std::map<SampleId, std::vector<const MaintenanceEvent*>> history;
  for (const auto& e : events) {
    if (e.date > limit) {
      throw Error("event for " + e.railcar_id + " dated " + e.date.iso() + " lies beyond cutoff + horizon");
    }
    if (e.date <= cfg.cutoff) history[{e.railcar_id, e.component, e.location}].push_back(&e);
  }

  std::unordered_map<std::string, const RailcarRecord*> cars;
  for (const auto& c : fleet.cars) cars.emplace(c.railcar_id, &c);
  std::unordered_map<std::string, std::vector<const TripRecord*>> trips;
  for (const auto& t : fleet.trips) trips[t.railcar_id].push_back(&t);

  std::unordered_map<std::string, CarAggregates> car_cache;
  auto car_features = [&](const std::string& id) -> const CarAggregates& {
    auto it = car_cache.find(id);
    if (it != car_cache.end()) return it->second;
    auto c = cars.find(id);
    auto t = trips.find(id);
    std::span<const TripRecord* const> trip_span;
    if (t != trips.end()) trip_span = t->second;
    return car_cache.emplace(id, aggregate_car(c == cars.end() ? nullptr : c->second, trip_span, cfg))
        .first->second;
  };

  std::vector<SampleId> ids;
  ids.reserve(history.size());
  for (const auto& [id, _] : history) ids.push_back(id);
  const std::size_t n = ids.size();

  std::vector<double> mileage_since(n, kNaN), component_age(n, kNaN), car_age(n), loading_count(n),
      loading_regions(n), days_in_service(n), trip_loaded(n), trip_empty(n), car_mileage(n);
  std::vector<std::optional<std::string>> pocket(n), condition(n);

  std::size_t r = 0;
  for (auto& [id, evs] : history) {
    std::stable_sort(evs.begin(), evs.end(),
                     [](const MaintenanceEvent* a, const MaintenanceEvent* b) { return a->date < b->date; });
    const MaintenanceEvent* last_replacement = nullptr;
    for (const auto* e : evs) {
      if (e->kind == EventKind::replacement) last_replacement = e;
    }
    const CarAggregates& car = car_features(id.railcar_id);
    if (last_replacement) {
      component_age[r] = static_cast<double>((cfg.cutoff - last_replacement->date).count());
      condition[r] = last_replacement->condition_code;
      if (last_replacement->mileage && !std::isnan(car.car_mileage)) {
        mileage_since[r] = car.car_mileage - *last_replacement->mileage;
      }
    }
    pocket[r] = std::to_string(id.location);
    car_age[r] = car.car_age;
    loading_count[r] = car.loading_count;
    loading_regions[r] = car.loading_regions;
    days_in_service[r] = car.avg_days_in_service;
    trip_loaded[r] = car.avg_trip_loaded;
    trip_empty[r] = car.avg_trip_empty;
    car_mileage[r] = car.car_mileage;
    ++r;
  }

  FeatureMatrix m(std::move(ids));
  const auto& schema = engineered_feature_schema();
  m.add_numeric(schema[0], std::move(mileage_since));
  m.add_numeric(schema[1], std::move(component_age));
  m.add_categorical(schema[2], std::move(pocket));
  m.add_categorical(schema[3], std::move(condition));
  m.add_numeric(schema[4], std::move(car_age));
  m.add_numeric(schema[5], std::move(loading_count));
  m.add_numeric(schema[6], std::move(loading_regions));
  m.add_numeric(schema[7], std::move(days_in_service));
  m.add_numeric(schema[8], std::move(trip_loaded));
  m.add_numeric(schema[9], std::move(trip_empty));
  m.add_numeric(schema[10], std::move(car_mileage));
  return m;
}

void attach_targets(FeatureMatrix& matrix, const std::map<SampleId, int>& labels) {
  std::vector<int> y;
  y.reserve(matrix.rows());
  for (const auto& id : matrix.sample_ids()) {
    auto it = labels.find(id);
    y.push_back(it == labels.end() ? 0 : it->second);
  }
  matrix.set_target(std::move(y));
}

}  // namespace fleethealth
