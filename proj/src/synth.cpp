#include "fleethealth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <tuple>

#include "fleethealth/errors.hpp"
#include "fleethealth/rng.hpp"

namespace fleethealth {

namespace {

constexpr double kYear = 365.25;
constexpr const char* kRegions[] = {"MW", "NE", "NW", "SE", "SW"};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Cumulative odometer of one car, sampled at trip ends.
class Odometer {
 public:
  void add(Date end, double cumulative) { marks_.emplace_back(end, cumulative); }

  double at(Date d) const {
    auto it = std::upper_bound(marks_.begin(), marks_.end(), d,
                               [](Date x, const std::pair<Date, double>& m) { return x < m.first; });
    return it == marks_.begin() ? 0.0 : std::prev(it)->second;
  }

 private:
  std::vector<std::pair<Date, double>> marks_;
};

}  // namespace

std::vector<HazardCoefficients> SynthConfig::default_hazards(int components) {
  static const HazardCoefficients table[] = {
      {-8.0, 3.0, 5.0},
      {-8.5, 3.5, 5.5},
      {-9.0, 3.0, 6.0},
      {-8.0, 2.0, 6.0},
  };
  std::vector<HazardCoefficients> out;
  for (int i = 0; i < components; ++i) out.push_back(table[i % 4]);
  return out;
}

void SynthConfig::validate() const {
  if (n_cars < 1) throw ConfigError("synth: n_cars must be >= 1");
  if (components < 1) throw ConfigError("synth: components must be >= 1");
  if (locations < 1) throw ConfigError("synth: locations must be >= 1");
  if (years_of_history < 2) throw ConfigError("synth: years_of_history must be >= 2");
  if (!(missing_rate >= 0.0 && missing_rate <= 0.5)) throw ConfigError("synth: missing_rate must be in [0, 0.5]");
  if (!(noise_sd >= 0.0)) throw ConfigError("synth: noise_sd must be >= 0");
  if (!hazards.empty() && hazards.size() != static_cast<std::size_t>(components)) {
    throw ConfigError("synth: one hazard entry per component is required");
  }
  cutoff.validate();
}

SynthFleet generate(const SynthConfig& cfg) {
  cfg.validate();
  const auto hazards = cfg.hazards.empty() ? SynthConfig::default_hazards(cfg.components) : cfg.hazards;
  const Date cutoff = cfg.cutoff.cutoff;
  const auto horizon = cfg.cutoff.horizon;

  Rng rng(derive_seed(cfg.seed, 0x5e7));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform_int = [&](long long lo, long long hi) {
    return std::uniform_int_distribution<long long>(lo, hi)(rng);
  };
  auto missing = [&] { return cfg.missing_rate > 0.0 && unit(rng) < cfg.missing_rate; };

  SynthFleet fleet;
  std::vector<double> q_sum(static_cast<std::size_t>(cfg.components), 0.0);

  for (std::size_t car = 0; car < cfg.n_cars; ++car) {
    char idbuf[16];
    std::snprintf(idbuf, sizeof idbuf, "RC%05zu", car + 1);
    const std::string id = idbuf;
    const Date build = cutoff - std::chrono::days{uniform_int(365, cfg.years_of_history * 365)};
    const std::string home = kRegions[uniform_int(0, 4)];
    fleet.cars.push_back({id, build, std::optional<std::string>(home)});
    if (missing()) fleet.cars.back().region.reset();

    // Movement history up to the cutoff.
    const double daily_miles = 60.0 + 160.0 * unit(rng);
    const long long loaded_mean = uniform_int(10, 30);
    const long long empty_mean = uniform_int(7, 20);
    Odometer odo;
    double cumulative = 0.0;
    Date t = build;
    bool loaded = true;
    for (;;) {
      const long long mean = loaded ? loaded_mean : empty_mean;
      const Date start = t + std::chrono::days{loaded ? uniform_int(0, 40) : 0};
      const Date end = start + std::chrono::days{uniform_int(std::max(1LL, mean - 5), mean + 5)};
      if (end > cutoff) break;
      const double days = static_cast<double>((end - start).count());
      const double miles = std::round(days * daily_miles * (0.8 + 0.4 * unit(rng)));
      std::optional<std::string> region;
      if (loaded) region = unit(rng) < 0.7 ? home : std::string(kRegions[uniform_int(0, 4)]);
      fleet.trips.push_back({id, start, end, loaded, region, miles});
      cumulative += miles;
      odo.add(end, cumulative);
      t = end;
      loaded = !loaded;
    }

    for (int c = 1; c <= cfg.components; ++c) {
      const auto& hz = hazards[static_cast<std::size_t>(c - 1)];
      for (int loc = 1; loc <= cfg.locations; ++loc) {
        auto emit = [&](Date d, EventKind kind, std::optional<std::string> code) {
          MaintenanceEvent e{id, c, loc, d, kind, std::move(code), odo.at(d)};
          if (missing()) e.mileage.reset();
          if (e.condition_code && missing()) e.condition_code.reset();
          fleet.events.push_back(std::move(e));
        };

        emit(build, EventKind::replacement, "new");
        Date last_replacement = build;
        // Pre-cutoff wear-out failures, each followed by a same-day replacement.
        for (;;) {
          const double gap_years = -std::log(1.0 - unit(rng)) / 0.06;
          const Date when = last_replacement + std::chrono::days{1 + static_cast<long long>(gap_years * kYear)};
          if (when > cutoff) break;
          emit(when, EventKind::failure, std::nullopt);
          emit(when, EventKind::replacement, unit(rng) < 0.6 ? "new" : "refurbished");
          last_replacement = when;
        }
        const Date horizon_end = cutoff + horizon;
        for (Date d = build + std::chrono::days{uniform_int(300, 900)}; d <= horizon_end;
             d = d + std::chrono::days{uniform_int(600, 900)}) {
          if (d != last_replacement) emit(d, EventKind::inspection, std::nullopt);
        }

        const double age_years = static_cast<double>((cutoff - last_replacement).count()) / kYear;
        const double miles_since = odo.at(cutoff) - odo.at(last_replacement);
        const double logit = hz.intercept + hz.age * (age_years / 10.0) + hz.mileage * (miles_since / 500000.0) +
                             cfg.noise_sd * gauss(rng);
        const double q = logistic(logit);
        const int y = unit(rng) < q ? 1 : 0;
        if (y) {
          const Date when = cutoff + std::chrono::days{uniform_int(1, horizon.count())};
          emit(when, EventKind::failure, std::nullopt);
          emit(when, EventKind::replacement, "new");
        }
        q_sum[static_cast<std::size_t>(c - 1)] += q;
        fleet.truth.push_back({{id, c, loc}, q, y});
      }
    }
  }

  const double samples = static_cast<double>(cfg.n_cars) * cfg.locations;
  for (int c = 0; c < cfg.components; ++c) {
    const double rate = q_sum[static_cast<std::size_t>(c)] / samples;
    if (rate < 0.005 || rate > 0.2) {
      throw ConfigError("synth: hazard for component " + std::to_string(c + 1) + " gives base rate " +
                        std::to_string(rate) + ", outside [0.005, 0.2]");
    }
  }

  // Same-day events for one sample can collide (e.g. an inspection on a
  // post-cutoff failure date); drop the later duplicate.
  std::stable_sort(fleet.events.begin(), fleet.events.end(), [](const MaintenanceEvent& a, const MaintenanceEvent& b) {
    return std::tie(a.date, a.railcar_id, a.component, a.location) <
           std::tie(b.date, b.railcar_id, b.component, b.location);
  });
  std::set<std::tuple<std::string, ComponentId, int, long long, EventKind>> seen;
  std::erase_if(fleet.events, [&](const MaintenanceEvent& e) {
    return !seen.emplace(e.railcar_id, e.component, e.location, e.date.serial(), e.kind).second;
  });
  return fleet;
}

void write_fleet(const SynthFleet& fleet, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  csv::write(dir / "events.csv", events_table(fleet.events));
  csv::write(dir / "cars.csv", cars_table(fleet.cars));
  csv::write(dir / "trips.csv", trips_table(fleet.trips));
  csv::Table truth;
  truth.header = {"sample_id", "q", "y"};
  for (const auto& t : fleet.truth) {
    truth.rows.push_back({t.sample.str(), csv::format_number(t.q), std::to_string(t.y)});
  }
  csv::write(dir / "truth.csv", truth);
}

}  // namespace fleethealth
