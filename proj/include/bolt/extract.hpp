#pragma once

// Paragraph extraction: turns indexed records of one focal person into
// candidate book content, optionally reduced to detected changes.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bolt/ingest.hpp"
#include "bolt/recipe.hpp"
#include "bolt/registry_model.hpp"
#include "bolt/thresholds.hpp"

namespace bolt {

enum class ParagraphKind { Attribute, Spell, Event, Change, SummaryScore, NestedBook };

std::string_view to_string(ParagraphKind kind) noexcept;

struct Paragraph {
  PersonId subject;
  std::string source;
  ParagraphKind kind = ParagraphKind::Attribute;
  /// Absent for undated content (static attributes, summary scores).
  std::optional<CivilDate> sort_date;
  /// Spell end (absent with a sort_date = ongoing), or the end of the
  /// event / attribute period.
  std::optional<CivilDate> end_date;
  Resolution resolution = Resolution::Day;
  Payload payload;
  int nesting_depth = 0;
  /// Source line of the originating record.
  std::uint32_t line = 0;

  bool dated() const noexcept { return sort_date.has_value(); }
  bool operator==(const Paragraph&) const = default;
};

/// One paragraph per selected record (or per detected change with
/// changes_only). Score items are skipped; see attach_summary_score.
std::vector<Paragraph> extract_paragraphs(const PersonIndex& index, const PersonId& person,
                                          std::span<const SourceSelection> what);

struct EmploymentMonth {
  CivilDate period;  // day = 1
  std::string contract;
  double salary = 0;
  double vacation_days = 0;
  double sick_days = 0;
  std::uint32_t line = 0;
};

struct EmploymentSeries {
  PersonId subject;
  std::string source;
  ChangeFields fields;
  std::vector<EmploymentMonth> months;
  /// Latest month observed in the source; contracts ending earlier emit job_end.
  std::optional<CivilDate> observation_end;
};

/// Change labels: job_start, salary_increase, vacation, sickness, job_end.
/// Throws UnsortedInput unless months are in non-decreasing period order and
/// strictly increasing within each contract.
std::vector<Paragraph> detect_employment_changes(const EmploymentSeries& series, const ChangeThresholds& thresholds);

struct EducationYear {
  int year = 0;
  std::string level;
  std::uint32_t line = 0;
};

struct EducationSeries {
  PersonId subject;
  std::string source;
  std::string year_field = "year";
  std::string level_field = "level";
  std::vector<EducationYear> years;
};

/// Initial level plus one paragraph per year whose level differs from the
/// previous year. Throws UnsortedInput unless years strictly increase.
std::vector<Paragraph> detect_education_changes(const EducationSeries& series);

using ScoreTable = std::unordered_map<std::string, double>;

/// Reads a delimited (person_id, score) table with a header row.
ScoreTable load_score_table(const std::string& path, char delimiter = ',');

/// Undated summary paragraph {label: value with two decimals}, or nothing
/// when the person has no score.
std::optional<Paragraph> attach_summary_score(const PersonId& person, const ScoreTable& scores, const std::string& label);

std::string format_score(double value);

}  // namespace bolt
