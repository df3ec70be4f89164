#include "bolt/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace bolt {

namespace {

void split_row(std::string_view row, char delimiter, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t pos = 0;
  while (true) {
    auto next = row.find(delimiter, pos);
    if (next == std::string_view::npos) {
      out.push_back(row.substr(pos));
      return;
    }
    out.push_back(row.substr(pos, next - pos));
    pos = next + 1;
  }
}

bool is_integer(std::string_view cell, bool non_negative) {
  if (cell.empty()) return false;
  std::size_t i = 0;
  if (cell[0] == '-') {
    if (non_negative || cell.size() == 1) return false;
    i = 1;
  }
  for (; i < cell.size(); ++i) {
    if (cell[i] < '0' || cell[i] > '9') return false;
  }
  return true;
}

bool is_number(std::string_view cell, bool non_negative) {
  if (cell.empty()) return false;
  double v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) return false;
  return !(non_negative && v < 0);
}

struct RowError {
  ErrorCode code;
  std::string message;
};

}  // namespace

RecordSet::RecordSet(SourceSchema schema, std::string text, std::string path, LoadOptions options)
    : schema_(std::move(schema)), text_(std::make_shared<const std::string>(std::move(text))), path_(std::move(path)) {
  parse(options);
}

std::optional<std::size_t> RecordSet::column(std::string_view field) const noexcept {
  for (std::size_t i = 0; i < schema_.fields.size(); ++i) {
    if (schema_.fields[i].name == field) return field_columns_[i];
  }
  return std::nullopt;
}

void RecordSet::parse(const LoadOptions& options) {
  const std::string& text = *text_;
  std::string_view all(text);
  std::size_t eol = all.find('\n');
  std::string_view header_line = all.substr(0, eol);
  std::vector<std::string_view> cells;
  split_row(header_line, schema_.delimiter, cells);
  for (auto c : cells) header_.emplace_back(c);

  for (const auto& h : header_) {
    if (!schema_.field(h)) {
      throw Error(ErrorCode::UnexpectedColumn, path_ + ": column '" + h + "' is not declared by source '" + schema_.name + "'", 1);
    }
  }
  field_columns_.resize(schema_.fields.size());
  for (std::size_t i = 0; i < schema_.fields.size(); ++i) {
    auto it = std::find(header_.begin(), header_.end(), schema_.fields[i].name);
    if (it == header_.end()) {
      throw Error(ErrorCode::MissingColumn, path_ + ": missing column '" + schema_.fields[i].name + "'", 1);
    }
    field_columns_[i] = static_cast<std::size_t>(it - header_.begin());
  }

  const std::size_t focal_col = *column(schema_.focal_key);
  auto binding_col = [&](const std::string& name) -> std::optional<std::size_t> {
    return name.empty() ? std::nullopt : column(name);
  };
  const auto start_col = binding_col(schema_.dates.start);
  const auto end_col = binding_col(schema_.dates.end);
  const auto period_col = binding_col(schema_.dates.period);
  const auto as_of_col = binding_col(schema_.dates.as_of);
  std::vector<std::size_t> link_cols;
  for (const auto& l : schema_.link_fields) link_cols.push_back(*column(l));

  // Duplicate detection for one-row-per-key sources.
  std::unordered_set<std::string> seen_keys;
  const bool unique_key = schema_.role == SourceRole::Static || schema_.role == SourceRole::YearlyAttributes;

  std::size_t pos = eol == std::string_view::npos ? all.size() : eol + 1;
  std::uint32_t line = 1;
  std::vector<std::string_view> members;
  while (pos < all.size()) {
    ++line;
    std::size_t next = all.find('\n', pos);
    std::size_t end = next == std::string_view::npos ? all.size() : next;
    std::string_view row = all.substr(pos, end - pos);
    std::size_t row_offset = pos;
    pos = next == std::string_view::npos ? all.size() : next + 1;
    if (row.empty()) continue;
    ++rows_read_;

    split_row(row, schema_.delimiter, cells);
    std::optional<RowError> err;
    if (cells.size() != header_.size()) {
      err = RowError{ErrorCode::TypeMismatch, "expected " + std::to_string(header_.size()) + " cells, found " +
                                                  std::to_string(cells.size())};
    }
    for (std::size_t i = 0; !err && i < schema_.fields.size(); ++i) {
      const FieldSpec& f = schema_.fields[i];
      std::string_view cell = cells[field_columns_[i]];
      const bool may_be_empty = f.optional || f.type == FieldType::String || f.type == FieldType::PersonList ||
                                (end_col && field_columns_[i] == *end_col);
      if (cell.empty()) {
        if (!may_be_empty) {
          bool date_like = f.type == FieldType::Date || f.type == FieldType::YearMonth || f.type == FieldType::Year;
          err = RowError{date_like ? ErrorCode::DateParseError : ErrorCode::TypeMismatch,
                         "field '" + f.name + "' is empty"};
        }
        continue;
      }
      bool ok = true;
      ErrorCode code = ErrorCode::TypeMismatch;
      switch (f.type) {
        case FieldType::String:
        case FieldType::Code:
        case FieldType::Person: break;
        case FieldType::Integer: ok = is_integer(cell, f.non_negative); break;
        case FieldType::Number: ok = is_number(cell, f.non_negative); break;
        case FieldType::Date:
          ok = parse_iso_date(cell).has_value();
          code = ErrorCode::DateParseError;
          break;
        case FieldType::YearMonth:
          ok = parse_year_month(cell).has_value();
          code = ErrorCode::DateParseError;
          break;
        case FieldType::Year:
          ok = parse_year(cell).has_value();
          code = ErrorCode::DateParseError;
          break;
        case FieldType::PersonList:
          for (auto id : split_list(cell)) ok = ok && !id.empty();
          break;
      }
      if (!ok) {
        err = RowError{code, "field '" + f.name + "' has invalid " + std::string(to_string(f.type)) + " value '" +
                                 std::string(cell) + "'"};
      }
    }

    Record rec;
    if (!err) {
      rec.subject = cells[focal_col];
      rec.row_offset = row_offset;
      rec.row_length = static_cast<std::uint32_t>(row.size());
      rec.line = line;
      switch (schema_.role) {
        case SourceRole::Static: break;
        case SourceRole::Spells: {
          rec.start = *parse_iso_date(cells[*start_col]);
          if (!cells[*end_col].empty()) rec.end = *parse_iso_date(cells[*end_col]);
          members.clear();
          for (auto c : link_cols) {
            for (auto id : split_list(cells[c])) members.push_back(id);
          }
          try {
            check_spell(rec.subject, rec.start, rec.end, members);
          } catch (const Error& e) {
            err = RowError{e.code(), e.what()};
          }
          break;
        }
        case SourceRole::MonthlyEvents:
          rec.start = *parse_year_month(cells[*period_col]);
          rec.end = period_end(rec.start, Resolution::Month);
          break;
        case SourceRole::YearlyAttributes:
          rec.start = *parse_year(cells[*as_of_col]);
          rec.end = period_end(rec.start, Resolution::Year);
          break;
      }
      if (!err && unique_key) {
        std::string key(rec.subject);
        if (as_of_col) {
          key += '\x1f';
          key += cells[*as_of_col];
        }
        if (!seen_keys.insert(std::move(key)).second) {
          err = RowError{ErrorCode::DuplicateRecord, "second record for '" + std::string(rec.subject) + "'" +
                                                         (as_of_col ? " in " + std::string(cells[*as_of_col]) : "")};
        }
      }
    }
    if (err) {
      rejects_.push_back(Reject{line, err->code, std::move(err->message)});
      continue;
    }
    records_.push_back(rec);
  }

  if (!rejects_.empty() &&
      static_cast<double>(rejects_.size()) > options.max_reject_fraction * static_cast<double>(rows_read_)) {
    const Reject& first = rejects_.front();
    throw Error(first.code,
                path_ + ": " + first.message + " (" + std::to_string(rejects_.size()) + " of " +
                    std::to_string(rows_read_) + " rows rejected)",
                first.line);
  }
}

std::string_view RecordSet::row_text(const Record& record) const noexcept {
  return std::string_view(*text_).substr(record.row_offset, record.row_length);
}

std::vector<std::string_view> RecordSet::values(const Record& record) const {
  std::vector<std::string_view> out;
  out.reserve(header_.size());
  split_row(row_text(record), schema_.delimiter, out);
  return out;
}

std::string_view RecordSet::value(const Record& record, std::string_view field) const {
  auto col = column(field);
  if (!col) return {};
  std::string_view row = row_text(record);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < *col; ++i) {
    pos = row.find(schema_.delimiter, pos);
    if (pos == std::string_view::npos) return {};
    ++pos;
  }
  auto end = row.find(schema_.delimiter, pos);
  return row.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
}

Payload RecordSet::payload(const Record& record) const {
  auto cells = values(record);
  Payload out;
  out.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) out.emplace_back(header_[i], std::string(cells[i]));
  return out;
}

SpellRecord RecordSet::spell(const Record& record) const {
  SpellRecord s;
  s.subject = PersonId(std::string(record.subject));
  s.source = schema_.name;
  s.start = record.start;
  s.end = record.end;
  s.payload = payload(record);
  for (const auto& l : schema_.link_fields) {
    for (auto id : split_list(value(record, l))) s.co_members.emplace_back(std::string(id));
  }
  return s;
}

EventRecord RecordSet::event(const Record& record) const {
  return EventRecord{PersonId(std::string(record.subject)), schema_.name, record.start, payload(record)};
}

AttributeRecord RecordSet::attribute(const Record& record) const {
  AttributeRecord a{PersonId(std::string(record.subject)), schema_.name, std::nullopt, payload(record)};
  if (schema_.role == SourceRole::YearlyAttributes) a.as_of = record.start.year;
  return a;
}

std::string RecordSet::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += schema_.delimiter;
    out += header_[i];
  }
  out += '\n';
  for (const auto& r : records_) {
    out += row_text(r);
    out += '\n';
  }
  return out;
}

RecordSet load_source(const SourceSchema& schema, const std::string& path, LoadOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return RecordSet(schema, ss.str(), path, options);
}

std::string format_reject(const RecordSet& set, const Reject& reject) {
  return set.path() + ":" + std::to_string(reject.line) + ": " + to_string(reject.code) + ": " + reject.message;
}

PersonIndex PersonIndex::build(std::vector<RecordSet> sets) {
  PersonIndex index;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (sets[i].schema().name == sets[j].schema().name) {
        throw Error(ErrorCode::DuplicateSourceName, "source '" + sets[i].schema().name + "' loaded twice");
      }
    }
  }
  for (auto& s : sets) index.sets_.push_back(std::make_unique<const RecordSet>(std::move(s)));
  const std::size_t n_sources = index.sets_.size();

  // Persons: every subject, sorted.
  std::vector<std::string_view> subjects;
  for (const auto& set : index.sets_) {
    for (const auto& r : set->records()) subjects.push_back(r.subject);
  }
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
  index.persons_.reserve(subjects.size());
  for (auto s : subjects) index.persons_.emplace_back(std::string(s));
  index.ordinals_.reserve(index.persons_.size());
  for (std::uint32_t i = 0; i < index.persons_.size(); ++i) index.ordinals_.emplace(index.persons_[i].str(), i);

  const std::size_t n_slots = index.persons_.size() * n_sources;
  index.record_offsets_.assign(n_slots + 1, 0);
  for (std::size_t s = 0; s < n_sources; ++s) {
    for (const auto& r : index.sets_[s]->records()) {
      ++index.record_offsets_[index.ordinals_.at(r.subject) * n_sources + s + 1];
    }
  }
  std::partial_sum(index.record_offsets_.begin(), index.record_offsets_.end(), index.record_offsets_.begin());
  index.record_refs_.resize(index.record_offsets_.back());
  std::vector<std::uint32_t> fill(index.record_offsets_.begin(), index.record_offsets_.end() - 1);
  for (std::size_t s = 0; s < n_sources; ++s) {
    const auto& recs = index.sets_[s]->records();
    for (std::uint32_t i = 0; i < recs.size(); ++i) {
      index.record_refs_[fill[index.ordinals_.at(recs[i].subject) * n_sources + s]++] = i;
    }
  }

  // Sort each slot by date; ties by end (ongoing last), row content, line.
  // Row content makes the order independent of input row order.
  for (std::size_t s = 0; s < n_sources; ++s) {
    const RecordSet& set = *index.sets_[s];
    const auto& recs = set.records();
    auto less = [&](std::uint32_t a, std::uint32_t b) {
      const Record& ra = recs[a];
      const Record& rb = recs[b];
      if (ra.start != rb.start) return ra.start < rb.start;
      if (ra.end != rb.end) {
        if (!ra.end) return false;
        if (!rb.end) return true;
        return *ra.end < *rb.end;
      }
      auto ta = set.row_text(ra);
      auto tb = set.row_text(rb);
      if (ta != tb) return ta < tb;
      return ra.line < rb.line;
    };
    for (std::size_t p = 0; p < index.persons_.size(); ++p) {
      std::size_t slot = p * n_sources + s;
      std::sort(index.record_refs_.begin() + index.record_offsets_[slot],
                index.record_refs_.begin() + index.record_offsets_[slot + 1], less);
    }
  }

  // Link adjacency, first-appearance order over the sorted record lists.
  index.link_offsets_.assign(n_slots + 1, 0);
  std::vector<std::string_view> scratch;
  for (std::size_t p = 0; p < index.persons_.size(); ++p) {
    for (std::size_t s = 0; s < n_sources; ++s) {
      const RecordSet& set = *index.sets_[s];
      std::size_t slot = p * n_sources + s;
      scratch.clear();
      if (!set.schema().link_fields.empty()) {
        for (auto ref : std::span(index.record_refs_).subspan(index.record_offsets_[slot],
                                                               index.record_offsets_[slot + 1] - index.record_offsets_[slot])) {
          const Record& r = set.records()[ref];
          for (const auto& lf : set.schema().link_fields) {
            for (auto id : split_list(set.value(r, lf))) {
              if (std::find(scratch.begin(), scratch.end(), id) == scratch.end()) scratch.push_back(id);
            }
          }
        }
      }
      index.link_refs_.insert(index.link_refs_.end(), scratch.begin(), scratch.end());
      index.link_offsets_[slot + 1] = static_cast<std::uint32_t>(index.link_refs_.size());
    }
  }

  index.last_dates_.resize(n_sources);
  for (std::size_t s = 0; s < n_sources; ++s) {
    if (index.sets_[s]->schema().role == SourceRole::Static) continue;
    for (const auto& r : index.sets_[s]->records()) {
      if (!index.last_dates_[s] || r.start > *index.last_dates_[s]) index.last_dates_[s] = r.start;
    }
  }
  return index;
}

std::optional<std::size_t> PersonIndex::source_ordinal(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (sets_[i]->schema().name == name) return i;
  }
  return std::nullopt;
}

const RecordSet& PersonIndex::source(std::string_view name) const {
  auto ord = source_ordinal(name);
  if (!ord) throw Error(ErrorCode::UnknownSource, "source '" + std::string(name) + "' is not loaded");
  return *sets_[*ord];
}

std::optional<std::uint32_t> PersonIndex::person_ordinal(std::string_view person) const noexcept {
  auto it = ordinals_.find(person);
  if (it == ordinals_.end()) return std::nullopt;
  return it->second;
}

bool PersonIndex::contains(std::string_view person) const noexcept { return person_ordinal(person).has_value(); }

std::span<const std::uint32_t> PersonIndex::records(std::string_view person, std::size_t source) const noexcept {
  auto p = person_ordinal(person);
  if (!p || source >= sets_.size()) return {};
  std::size_t slot = *p * sets_.size() + source;
  return std::span(record_refs_).subspan(record_offsets_[slot], record_offsets_[slot + 1] - record_offsets_[slot]);
}

std::span<const std::string_view> PersonIndex::links(std::string_view person, std::size_t source) const noexcept {
  auto p = person_ordinal(person);
  if (!p || source >= sets_.size()) return {};
  std::size_t slot = *p * sets_.size() + source;
  return std::span(link_refs_).subspan(link_offsets_[slot], link_offsets_[slot + 1] - link_offsets_[slot]);
}

std::optional<CivilDate> PersonIndex::last_date(std::size_t source) const noexcept {
  if (source >= last_dates_.size()) return std::nullopt;
  return last_dates_[source];
}

std::vector<const Record*> query_records(const PersonIndex& index, std::string_view person, std::string_view source,
                                         const std::optional<DateRange>& window) {
  auto ord = index.source_ordinal(source);
  if (!ord) throw Error(ErrorCode::UnknownSource, "source '" + std::string(source) + "' is not loaded");
  const RecordSet& set = index.source(*ord);
  std::vector<const Record*> out;
  for (auto ref : index.records(person, *ord)) {
    const Record& r = set.records()[ref];
    if (window && set.schema().role != SourceRole::Static && !window->overlaps(r.start, r.end)) continue;
    out.push_back(&r);
  }
  return out;
}

}  // namespace bolt
