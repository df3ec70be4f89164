#pragma once

// Synthetic registry generator: a monthly simulation of households, jobs and
// schooling that writes the same delimited files ingest reads.

#include <cstdint>
#include <filesystem>
#include <string>

#include "bolt/registry_model.hpp"

namespace bolt {

/// Event rates per year.
struct SynthRates {
  double household_change = 0.15;  // partnering, separation, marriage
  double birth = 0.10;             // per couple with a woman aged 18..44
  double leave_home = 0.25;        // per adult child
  double move = 0.08;              // per household
  double job_change = 0.20;
  double job_find = 0.60;
  double salary_jump = 0.35;
  double education_transition = 0.25;

  bool operator==(const SynthRates&) const = default;
};

struct SynthConfig {
  /// Initial population; births add persons on top.
  int person_count = 1000;
  int start_year = 2011;
  int end_year = 2020;
  std::uint64_t seed = 1;
  SynthRates rates;
  double mean_household_size = 2.2;
  int max_household_size = 7;

  /// Throws Error(InvalidValue) for an empty year range, person_count < 1
  /// or a negative rate.
  void validate() const;
  /// Missing keys keep their defaults; unknown keys throw UnknownKey.
  static SynthConfig from_json(std::string_view text);
  std::string to_json() const;

  bool operator==(const SynthConfig&) const = default;
};

struct SynthSummary {
  std::size_t persons = 0;
  std::size_t households = 0;
  std::size_t household_rows = 0;
  std::size_t address_rows = 0;
  std::size_t employment_rows = 0;
  std::size_t education_rows = 0;
};

/// Schemas of the generated files (also written as schemas.json).
SchemaRegistry synth_schemas();

/// Writes demographics.csv, household.csv, address.csv, employment.csv,
/// education.csv, stork.csv and schemas.json into `out_dir`.
SynthSummary generate_population(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace bolt
