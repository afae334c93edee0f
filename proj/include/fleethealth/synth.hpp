#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fleethealth/core_model.hpp"

namespace fleethealth {

// Latent failure log-odds: intercept + age * (component age / 10 years)
// + mileage * (miles since replacement / 500k) + N(0, noise_sd).
struct HazardCoefficients {
  double intercept = -2.5;
  double age = 0.0;
  double mileage = 0.0;
};

struct SynthConfig {
  std::size_t n_cars = 2000;
  int components = 4;
  int locations = 2;
  int years_of_history = 15;
  CutoffConfig cutoff;
  std::vector<HazardCoefficients> hazards;  // one per component; empty selects defaults
  double noise_sd = 0.5;
  double missing_rate = 0.05;
  std::uint64_t seed = 7;

  static std::vector<HazardCoefficients> default_hazards(int components);
  void validate() const;
};

struct TruthRow {
  SampleId sample;
  double q = 0.0;  // latent failure probability for the horizon
  int y = 0;
};

struct SynthFleet {
  std::vector<MaintenanceEvent> events;
  std::vector<RailcarRecord> cars;
  std::vector<TripRecord> trips;
  std::vector<TruthRow> truth;
};

// Throws ConfigError on invalid settings, including hazards whose mean
// failure probability for some component falls outside [0.005, 0.2].
SynthFleet generate(const SynthConfig& cfg);

// events.csv, cars.csv, trips.csv and truth.csv under `dir`.
void write_fleet(const SynthFleet& fleet, const std::filesystem::path& dir);

}  // namespace fleethealth
