#pragma once

// Delimited-file ingestion and the person-centric index used by extraction.
//
// File format: UTF-8, LF line endings, one header row, one record per line,
// cells separated by the schema delimiter (no quoting). Dates are ISO
// (YYYY-MM-DD), months YYYY-MM, years YYYY. person_list cells separate ids
// with ';'. An empty end date marks an ongoing spell.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bolt/error.hpp"
#include "bolt/registry_model.hpp"

namespace bolt {

struct Reject {
  std::size_t line = 0;
  ErrorCode code = ErrorCode::TypeMismatch;
  std::string message;
};

/// One validated row. Cell text lives in the owning RecordSet.
struct Record {
  std::string_view subject;
  /// Spell start, first day of the event month, or January 1st of the
  /// attribute year. Unused for static sources.
  CivilDate start;
  /// Spell end (absent = ongoing); for events and yearly attributes the
  /// last day of the period. Always absent for static sources.
  std::optional<CivilDate> end;
  std::size_t row_offset = 0;
  std::uint32_t row_length = 0;
  std::uint32_t line = 0;
};

struct LoadOptions {
  /// Loading aborts when rejects / data rows exceeds this fraction.
  double max_reject_fraction = 0.01;
};

class RecordSet {
 public:
  RecordSet(SourceSchema schema, std::string text, std::string path, LoadOptions options = {});

  const SourceSchema& schema() const noexcept { return schema_; }
  const std::string& path() const noexcept { return path_; }
  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<Record>& records() const noexcept { return records_; }
  const std::vector<Reject>& rejects() const noexcept { return rejects_; }
  std::size_t rows_read() const noexcept { return rows_read_; }

  /// Cells of a record in header order.
  std::vector<std::string_view> values(const Record& record) const;
  /// Cell of one field, or an empty view if the field is unknown.
  std::string_view value(const Record& record, std::string_view field) const;
  std::string_view row_text(const Record& record) const noexcept;
  Payload payload(const Record& record) const;

  SpellRecord spell(const Record& record) const;
  EventRecord event(const Record& record) const;
  AttributeRecord attribute(const Record& record) const;

  /// Header plus every accepted row, each LF-terminated.
  std::string serialize() const;

 private:
  void parse(const LoadOptions& options);
  std::optional<std::size_t> column(std::string_view field) const noexcept;

  SourceSchema schema_;
  std::shared_ptr<const std::string> text_;
  std::string path_;
  std::vector<std::string> header_;
  std::vector<std::size_t> field_columns_;  // header column per schema field
  std::vector<Record> records_;
  std::vector<Reject> rejects_;
  std::size_t rows_read_ = 0;
};

RecordSet load_source(const SourceSchema& schema, const std::string& path, LoadOptions options = {});

std::string format_reject(const RecordSet& set, const Reject& reject);

class PersonIndex {
 public:
  /// Takes ownership of the sets. Throws DuplicateSourceName.
  static PersonIndex build(std::vector<RecordSet> sets);

  std::size_t source_count() const noexcept { return sets_.size(); }
  std::optional<std::size_t> source_ordinal(std::string_view name) const noexcept;
  const RecordSet& source(std::size_t ordinal) const { return *sets_.at(ordinal); }
  const RecordSet& source(std::string_view name) const;

  /// Every person that is a record subject in some source, sorted by id.
  const std::vector<PersonId>& persons() const noexcept { return persons_; }
  bool contains(std::string_view person) const noexcept;

  /// Indices into source(ordinal).records(), sorted by date ascending.
  std::span<const std::uint32_t> records(std::string_view person, std::size_t source) const noexcept;
  /// Persons co-listed with `person` through link fields of this source, in
  /// first-appearance order.
  std::span<const std::string_view> links(std::string_view person, std::size_t source) const noexcept;
  /// Latest record start in the source (observation end for change detection).
  std::optional<CivilDate> last_date(std::size_t source) const noexcept;

 private:
  std::optional<std::uint32_t> person_ordinal(std::string_view person) const noexcept;

  std::vector<std::unique_ptr<const RecordSet>> sets_;
  std::vector<PersonId> persons_;
  std::unordered_map<std::string_view, std::uint32_t> ordinals_;
  // CSR layout: slot = person * source_count + source.
  std::vector<std::uint32_t> record_offsets_;
  std::vector<std::uint32_t> record_refs_;
  std::vector<std::uint32_t> link_offsets_;
  std::vector<std::string_view> link_refs_;
  std::vector<std::optional<CivilDate>> last_dates_;
};

/// Records of `person` in `source` overlapping `window` (all when absent),
/// in ascending date order. Unknown persons yield an empty list.
std::vector<const Record*> query_records(const PersonIndex& index, std::string_view person, std::string_view source,
                                         const std::optional<DateRange>& window = std::nullopt);

}  // namespace bolt
