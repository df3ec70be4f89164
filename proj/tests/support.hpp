#pragma once

// Shared fixtures and helpers for the unit and acceptance tests.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>
#include <unistd.h>

#include <gtest/gtest.h>

#include "bolt/error.hpp"
#include "bolt/ingest.hpp"
#include "bolt/registry_model.hpp"
#include "bolt/render.hpp"
#include "bolt/synthgen.hpp"

#ifndef BOLT_SOURCE_DIR
#define BOLT_SOURCE_DIR "."
#endif

namespace bolt::test {

inline std::filesystem::path source_dir() { return BOLT_SOURCE_DIR; }
inline std::filesystem::path recipe_path(const std::string& name) { return source_dir() / "recipes" / (name + ".recipe"); }
inline std::filesystem::path dictionaries_path() { return source_dir() / "recipes" / "dictionaries.json"; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("bolt-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a bolt::Error";
  return ErrorCode::IoError;
}

inline FieldSpec field(std::string name, FieldType type, bool optional = false) {
  return FieldSpec{std::move(name), type, false, optional};
}

/// Household log shaped like the registry snippet: one row per person-spell.
inline SourceSchema household_schema() {
  SourceSchema s;
  s.name = "household";
  s.file = "household.csv";
  s.role = SourceRole::Spells;
  s.focal_key = "person_id";
  s.fields = {field("hh_id", FieldType::String),         field("person_id", FieldType::Person),
              field("household_type", FieldType::Code),  field("person_role", FieldType::Code),
              field("start", FieldType::Date),           field("end", FieldType::Date, true),
              field("hh_person_ids", FieldType::PersonList, true)};
  s.dates.start = "start";
  s.dates.end = "end";
  s.link_fields = {"hh_person_ids"};
  return s;
}

/// Johan with Mary and Anne, then alone, then married to Josephine; Mary
/// stays with Anne after the split.
inline std::string johan_household_csv() {
  return "hh_id,person_id,household_type,person_role,start,end,hh_person_ids\n"
         "1,Johan,3,1,2019-01-05,2020-05-02,Mary;Anne\n"
         "2,Johan,1,4,2020-05-03,2021-03-31,\n"
         "3,Johan,4,2,2021-04-01,,Josephine\n"
         "1,Mary,6,1,2020-05-03,,Anne\n";
}

inline NameMap example_names() {
  return NameMap({{"Johan", "Johan"}, {"Mary", "Mary"}, {"Anne", "Anne"}, {"Josephine", "Josephine"}});
}

inline SourceSchema residence_schema() {
  SourceSchema s;
  s.name = "residence";
  s.file = "residence.csv";
  s.role = SourceRole::Spells;
  s.focal_key = "person_id";
  s.fields = {field("person_id", FieldType::Person), field("municipality", FieldType::String),
              field("start", FieldType::Date), field("end", FieldType::Date, true)};
  s.dates.start = "start";
  s.dates.end = "end";
  return s;
}

inline std::string james_residence_csv() {
  return "person_id,municipality,start,end\n"
         "James,Amsterdam,2000-01-01,2019-06-12\n"
         "James,Leeuwarden,2019-06-13,2019-12-01\n"
         "James,Amsterdam,2019-12-02,\n";
}

inline SourceSchema demographics_schema() {
  SourceSchema s;
  s.name = "demographics";
  s.file = "demographics.csv";
  s.role = SourceRole::Static;
  s.focal_key = "person_id";
  s.fields = {field("person_id", FieldType::Person), field("gbageslacht", FieldType::Code),
              field("gbageboortejaar", FieldType::Integer)};
  return s;
}

using SourceFiles = std::vector<std::pair<std::string, std::string>>;  // source name, csv text

/// Index over hand-written files that follow the synthetic schemas.
inline PersonIndex build_index(const SourceFiles& files, const SchemaRegistry& schemas = synth_schemas()) {
  std::vector<RecordSet> sets;
  for (const auto& [source, text] : files) sets.emplace_back(schemas.at(source), text, source + ".csv");
  return PersonIndex::build(std::move(sets));
}

inline void write_corpus(const std::filesystem::path& dir, const SourceFiles& files,
                         const SchemaRegistry& schemas = synth_schemas()) {
  for (const auto& [source, text] : files) write_text(dir / schemas.at(source).file, text);
  write_text(dir / "schemas.json", schemas.to_json());
}

inline constexpr const char* kDemographicsHeader =
    "person_id,gbageslacht,gbageboortejaar,gbageboortemaand,gbageboorteland,gbageboortelandmoeder,"
    "gbageboortelandvader,gbageboortejaarmoeder,gbageboortejaarvader\n";
inline constexpr const char* kHouseholdHeader = "hh_id,person_id,household_type,person_role,start,end,hh_person_ids\n";
inline constexpr const char* kAddressHeader = "person_id,object_id,municipality,start,end\n";
inline constexpr const char* kEmploymentHeader = "person_id,month,employer_id,salary,vacation_days,sick_days\n";
inline constexpr const char* kEducationHeader = "person_id,year,level\n";

/// One person with four household spells (with housemates), two address
/// spells and a single employment change, dated so that sources follow one
/// another in time.
inline SourceFiles layout_corpus() {
  std::string demo = kDemographicsHeader;
  demo += "1,2,1990,4,6030,6030,6030,1962,1960\n";
  demo += "2,2,1962,7,6030,6030,6030,1940,1938\n";
  demo += "3,1,1960,2,5010,5010,5010,1935,1931\n";
  demo += "4,1,1989,11,6030,6030,6030,1961,1958\n";
  demo += "5,1,1988,1,7024,7024,7024,1960,1959\n";
  std::string hh = kHouseholdHeader;
  hh += "H0000001,1,5,3,2005-03-01,2008-06-30,2;3\n";
  hh += "H0000002,1,1,4,2008-07-01,2011-08-31,\n";
  hh += "H0000003,1,2,2,2011-09-01,2014-12-31,4\n";
  hh += "H0000004,1,4,2,2015-01-01,,5\n";
  std::string addr = kAddressHeader;
  addr += "1,O0000001,Amsterdam,2016-01-01,2017-12-31\n";
  addr += "1,O0000002,Utrecht,2018-01-01,\n";
  std::string emp = kEmploymentHeader;
  emp += "1,2020-01,E0000001,2800,0,0\n";
  return {{"demographics", demo}, {"household", hh}, {"address", addr}, {"employment", emp}};
}

/// Days since 1970-01-01, written out independently of the library.
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const std::int64_t yoe = y - era * 400;
  const std::int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

inline CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = yoe + era * 400;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  const int d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  const int m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

inline CivilDate random_date(std::mt19937_64& rng, int from_year = 1900, int to_year = 2100) {
  std::uniform_int_distribution<std::int64_t> d(days_from_civil(from_year, 1, 1), days_from_civil(to_year, 12, 31));
  return civil_from_days(d(rng));
}

}  // namespace bolt::test
