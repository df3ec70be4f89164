#pragma once

// Core domain types shared by every stage: dates, persons, records and the
// schemas that describe each registry source.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bolt {

/// Temporal resolution of a date as it appears in a source. Monthly values
/// are stored with day=1, yearly values with month=1 and day=1.
enum class Resolution : std::uint8_t { Day, Month, Year };

struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;

  /// Throws Error(InvalidDate) when the triple is not a calendar date.
  static CivilDate make(int year, int month, int day);

  bool valid() const noexcept;
  auto operator<=>(const CivilDate&) const = default;
};

std::strong_ordering compare_dates(const CivilDate& a, const CivilDate& b) noexcept;

bool is_leap_year(int year) noexcept;
int days_in_month(int year, int month) noexcept;

/// Last calendar day of the period that starts at `date` at the given resolution.
CivilDate period_end(const CivilDate& date, Resolution resolution) noexcept;
CivilDate next_day(const CivilDate& date) noexcept;
CivilDate previous_day(const CivilDate& date) noexcept;

// On-disk formats: YYYY-MM-DD, YYYY-MM, YYYY.
std::optional<CivilDate> parse_iso_date(std::string_view text) noexcept;
std::optional<CivilDate> parse_year_month(std::string_view text) noexcept;
std::optional<CivilDate> parse_year(std::string_view text) noexcept;
std::optional<CivilDate> parse_date(std::string_view text, Resolution resolution) noexcept;
std::string format_iso(const CivilDate& date);
std::string format_date(const CivilDate& date, Resolution resolution);

/// Prose dates: "January 5th 2019" (day), "January 2019" (month), "2019" (year).
std::string format_long_date(const CivilDate& date, Resolution resolution = Resolution::Day);
std::optional<CivilDate> parse_long_date(std::string_view text) noexcept;

/// Inclusive date range; a missing bound is unbounded on that side.
struct DateRange {
  std::optional<CivilDate> from;
  std::optional<CivilDate> to;

  /// Interval overlap with [start, end]; an absent end means ongoing.
  bool overlaps(const CivilDate& start, const std::optional<CivilDate>& end) const noexcept;
  bool operator==(const DateRange&) const = default;
};

/// Pseudonymous person key. Never empty.
class PersonId {
 public:
  PersonId() = default;
  explicit PersonId(std::string value);

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  auto operator<=>(const PersonId&) const = default;

 private:
  std::string value_;
};

enum class SourceRole { Static, Spells, MonthlyEvents, YearlyAttributes };

enum class FieldType { String, Integer, Number, Code, Date, YearMonth, Year, Person, PersonList };

std::string_view to_string(SourceRole role) noexcept;
std::string_view to_string(FieldType type) noexcept;
std::optional<SourceRole> parse_source_role(std::string_view text) noexcept;
std::optional<FieldType> parse_field_type(std::string_view text) noexcept;

/// Separator used inside a person_list cell.
inline constexpr char kListSeparator = ';';

std::vector<std::string_view> split_list(std::string_view cell);

struct FieldSpec {
  std::string name;
  FieldType type = FieldType::String;
  bool non_negative = false;
  bool optional = false;
};

struct DateBindings {
  std::string start;   // spells
  std::string end;     // spells, may be empty in data (ongoing)
  std::string period;  // monthly events
  std::string as_of;   // yearly attributes
};

/// Fields consulted by change-detection preprocessing.
struct ChangeFields {
  std::string contract;
  std::string salary;
  std::string vacation_days;
  std::string sick_days;
  std::string level;
  std::vector<std::string> level_ordering;
};

struct SourceSchema {
  std::string name;
  std::string file;
  SourceRole role = SourceRole::Static;
  std::string focal_key;
  char delimiter = ',';
  std::vector<FieldSpec> fields;
  DateBindings dates;
  std::vector<std::string> link_fields;
  ChangeFields changes;

  const FieldSpec* field(std::string_view name) const noexcept;
  bool is_link_field(std::string_view name) const noexcept;
  Resolution resolution() const noexcept;

  /// Throws Error(SchemaError) if date bindings do not fit the role or the
  /// focal key / link fields are not declared.
  void validate() const;
};

class SchemaRegistry {
 public:
  SchemaRegistry() = default;
  explicit SchemaRegistry(std::vector<SourceSchema> sources);

  static SchemaRegistry from_json(std::string_view text);
  static SchemaRegistry load(const std::string& path);
  std::string to_json() const;

  const SourceSchema* find(std::string_view name) const noexcept;
  const SourceSchema& at(std::string_view name) const;
  const std::vector<SourceSchema>& sources() const noexcept { return sources_; }

 private:
  std::vector<SourceSchema> sources_;
};

using Payload = std::vector<std::pair<std::string, std::string>>;

std::string_view payload_value(const Payload& payload, std::string_view field) noexcept;
bool payload_has(const Payload& payload, std::string_view field) noexcept;

struct SpellRecord {
  PersonId subject;
  std::string source;
  CivilDate start;
  std::optional<CivilDate> end;
  Payload payload;
  std::vector<PersonId> co_members;
};

struct EventRecord {
  PersonId subject;
  std::string source;
  CivilDate period;
  Payload payload;
};

struct AttributeRecord {
  PersonId subject;
  std::string source;
  std::optional<int> as_of;
  Payload payload;
};

/// Returns the record unchanged, or throws StartAfterEnd / SelfCoMember.
const SpellRecord& validate_spell(const SpellRecord& record);

/// Shared check used by ingest on raw rows.
void check_spell(std::string_view subject, const CivilDate& start, const std::optional<CivilDate>& end,
                 const std::vector<std::string_view>& co_members);

}  // namespace bolt

template <>
struct std::hash<bolt::PersonId> {
  std::size_t operator()(const bolt::PersonId& id) const noexcept { return std::hash<std::string>{}(id.str()); }
};
