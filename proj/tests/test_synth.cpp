#include <gtest/gtest.h>

#include <cmath>

#include "fleethealth/errors.hpp"
#include "fleethealth/synth.hpp"
#include "oracles.hpp"

using namespace fleethealth;

namespace {

SynthConfig small(std::size_t cars, std::uint64_t seed) {
  SynthConfig c;
  c.n_cars = cars;
  c.seed = seed;
  return c;
}

FleetRecords records(const SynthFleet& f) { return {f.cars, f.trips}; }

}  // namespace

TEST(Synth, SameSeedGivesIdenticalFiles) {
  oracle::TempDir a("synth_a"), b("synth_b");
  write_fleet(generate(small(100, 1)), a.path());
  write_fleet(generate(small(100, 1)), b.path());
  EXPECT_EQ(oracle::snapshot(a.path()), oracle::snapshot(b.path()));
  oracle::TempDir c("synth_c");
  write_fleet(generate(small(100, 2)), c.path());
  EXPECT_NE(oracle::slurp(a / "events.csv"), oracle::slurp(c / "events.csv"));
}

TEST(Synth, FilesUseTheIngestSchemas) {
  oracle::TempDir dir("synth_schema");
  auto fleet = generate(small(50, 3));
  write_fleet(fleet, dir.path());
  EXPECT_EQ(read_events(dir / "events.csv").size(), fleet.events.size());
  EXPECT_EQ(read_cars(dir / "cars.csv").size(), 50u);
  EXPECT_EQ(read_trips(dir / "trips.csv").size(), fleet.trips.size());
  auto truth = csv::read(dir / "truth.csv");
  EXPECT_EQ(truth.header, (std::vector<std::string>{"sample_id", "q", "y"}));
  EXPECT_EQ(truth.rows.size(), 50u * 4 * 2);
}

TEST(Synth, NoMissingnessMeansCompleteFeatures) {
  auto cfg = small(150, 4);
  cfg.missing_rate = 0.0;
  auto fleet = generate(cfg);
  for (const auto& [c, evs] : split_by_component(fleet.events)) {
    auto m = engineer_features(evs, records(fleet), cfg.cutoff);
    EXPECT_EQ(m.missing_count(), 0u) << "component " << c;
  }
}

TEST(Synth, MissingnessRateIsRoughlyHonoured) {
  auto cfg = small(300, 5);
  cfg.missing_rate = 0.2;
  auto fleet = generate(cfg);
  std::size_t missing = 0;
  for (const auto& e : fleet.events) missing += e.mileage ? 0 : 1;
  const double rate = static_cast<double>(missing) / static_cast<double>(fleet.events.size());
  EXPECT_NEAR(rate, 0.2, 0.02);
}

TEST(Synth, FlatHazardMatchesNoiseBaseline) {
  auto cfg = small(2000, 6);
  cfg.hazards.assign(4, {-2.5, 0.0, 0.0});
  auto fleet = generate(cfg);
  for (int c = 1; c <= 4; ++c) {
    double q = 0.0, y = 0.0, n = 0.0;
    for (const auto& t : fleet.truth) {
      if (t.sample.component != c) continue;
      q += t.q;
      y += t.y;
      n += 1.0;
    }
    // Expected rate of logistic(-2.5 + 0.5 Z), Z ~ N(0, 1), by quadrature.
    double expected = 0.0, mass = 0.0;
    for (int i = -4000; i <= 4000; ++i) {
      const double z = i / 1000.0;
      const double phi = std::exp(-0.5 * z * z);
      expected += phi / (1.0 + std::exp(2.5 - 0.5 * z));
      mass += phi;
    }
    expected /= mass;
    const double sigma = std::sqrt(expected * (1 - expected) / n);
    EXPECT_NEAR(y / n, expected, 3 * sigma) << "component " << c;
    EXPECT_NEAR(q / n, expected, 3 * sigma);
  }
}

TEST(Synth, AgeHazardShowsInRankCorrelation) {
  auto cfg = small(600, 7);
  cfg.hazards.assign(4, {-5.0, 3.0, 0.0});
  cfg.missing_rate = 0.0;
  auto fleet = generate(cfg);
  auto parts = split_by_component(fleet.events);
  auto m = engineer_features(parts.at(1), records(fleet), cfg.cutoff);
  std::map<SampleId, double> q;
  for (const auto& t : fleet.truth) q[t.sample] = t.q;
  std::vector<double> age, risk;
  const auto col = m.index_of("component_age");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    age.push_back(m.numeric(r, col));
    risk.push_back(q.at(m.sample_ids()[r]));
  }
  EXPECT_GT(oracle::spearman(age, risk), 0.5);
}

TEST(Synth, DatesAreConsistent) {
  auto cfg = small(200, 8);
  auto fleet = generate(cfg);
  std::map<std::string, Date> built;
  for (const auto& c : fleet.cars) built[c.railcar_id] = c.build_date;
  const Date limit = cfg.cutoff.cutoff + cfg.cutoff.horizon;
  for (const auto& e : fleet.events) {
    EXPECT_GE(e.date, built.at(e.railcar_id));
    EXPECT_LE(e.date, limit);
  }
  for (const auto& t : fleet.trips) {
    EXPECT_GE(t.start, built.at(t.railcar_id));
    EXPECT_LE(t.end, cfg.cutoff.cutoff);
  }
  EXPECT_NO_THROW(reject_duplicate_events(fleet.events));
}

TEST(Synth, TruthLabelsMatchPostCutoffEvents) {
  auto cfg = small(300, 9);
  auto fleet = generate(cfg);
  for (const auto& [c, evs] : split_by_component(fleet.events)) {
    auto labels = label_targets(evs, cfg.cutoff);
    for (const auto& t : fleet.truth) {
      if (t.sample.component == c) EXPECT_EQ(labels.at(t.sample), t.y) << t.sample.str();
    }
  }
}

TEST(Synth, DefaultPrevalenceIsInBand) {
  auto fleet = generate(small(2000, 7));
  for (int c = 1; c <= 4; ++c) {
    double y = 0.0, n = 0.0;
    for (const auto& t : fleet.truth) {
      if (t.sample.component == c) {
        y += t.y;
        n += 1.0;
      }
    }
    EXPECT_GE(y / n, 0.005);
    EXPECT_LE(y / n, 0.2);
  }
}

TEST(Synth, RejectsInvalidConfig) {
  auto cfg = small(10, 1);
  cfg.missing_rate = 0.6;
  EXPECT_THROW(generate(cfg), ConfigError);
  cfg = small(10, 1);
  cfg.hazards.assign(4, {3.0, 0.0, 0.0});
  EXPECT_THROW(generate(cfg), ConfigError);
  cfg = small(10, 1);
  cfg.hazards.assign(3, {});
  EXPECT_THROW(generate(cfg), ConfigError);
}
