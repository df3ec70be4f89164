#include "bolt/extract.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bolt {

namespace {

double to_number(std::string_view cell) {
  double v = 0;
  if (!cell.empty()) std::from_chars(cell.data(), cell.data() + cell.size(), v);
  return v;
}

std::string number_text(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Payload project(const RecordSet& set, const Record& record, const SourceSelection& sel) {
  const SourceSchema& schema = set.schema();
  auto cells = set.values(record);
  Payload out;
  out.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string& name = set.header()[i];
    if (name == schema.focal_key) continue;
    // Link fields always survive projection; the book pipeline strips the
    // ones no expansion uses.
    if (!sel.fields.empty() && !schema.is_link_field(name) &&
        std::find(sel.fields.begin(), sel.fields.end(), name) == sel.fields.end()) {
      continue;
    }
    out.emplace_back(name, std::string(cells[i]));
  }
  return out;
}

Paragraph change_paragraph(const EmploymentSeries& series, const EmploymentMonth& m, const char* change) {
  Paragraph p;
  p.subject = series.subject;
  p.source = series.source;
  p.kind = ParagraphKind::Change;
  p.sort_date = m.period;
  p.end_date = period_end(m.period, Resolution::Month);
  p.resolution = Resolution::Month;
  p.line = m.line;
  p.payload.emplace_back("month", format_date(m.period, Resolution::Month));
  p.payload.emplace_back("change", change);
  p.payload.emplace_back(series.fields.contract.empty() ? "contract" : series.fields.contract, m.contract);
  return p;
}

}  // namespace

std::string_view to_string(ParagraphKind kind) noexcept {
  switch (kind) {
    case ParagraphKind::Attribute: return "attribute";
    case ParagraphKind::Spell: return "spell";
    case ParagraphKind::Event: return "event";
    case ParagraphKind::Change: return "change";
    case ParagraphKind::SummaryScore: return "summary_score";
    case ParagraphKind::NestedBook: return "nested_book";
  }
  return "attribute";
}

std::vector<Paragraph> detect_employment_changes(const EmploymentSeries& series, const ChangeThresholds& thresholds) {
  const auto& months = series.months;
  for (std::size_t i = 1; i < months.size(); ++i) {
    if (months[i].period < months[i - 1].period) {
      throw Error(ErrorCode::UnsortedInput, "employment months of '" + series.subject.str() + "' are not sorted");
    }
  }
  // Group by contract in first-appearance order.
  std::vector<std::string> contracts;
  for (const auto& m : months) {
    if (std::find(contracts.begin(), contracts.end(), m.contract) == contracts.end()) contracts.push_back(m.contract);
  }
  const std::string salary_key = series.fields.salary.empty() ? "salary" : series.fields.salary;
  const std::string vacation_key = series.fields.vacation_days.empty() ? "vacation_days" : series.fields.vacation_days;
  const std::string sick_key = series.fields.sick_days.empty() ? "sick_days" : series.fields.sick_days;

  std::vector<Paragraph> out;
  for (const auto& contract : contracts) {
    const EmploymentMonth* prev = nullptr;
    const EmploymentMonth* last = nullptr;
    for (const auto& m : months) {
      if (m.contract != contract) continue;
      if (prev && !(prev->period < m.period)) {
        throw Error(ErrorCode::UnsortedInput,
                    "contract '" + contract + "' of '" + series.subject.str() + "' repeats month " +
                        format_date(m.period, Resolution::Month));
      }
      if (!prev) {
        Paragraph p = change_paragraph(series, m, "job_start");
        p.payload.emplace_back(salary_key, number_text(m.salary));
        out.push_back(std::move(p));
      } else if (m.salary > prev->salary && m.salary >= prev->salary * (1.0 + thresholds.salary_rel_jump)) {
        Paragraph p = change_paragraph(series, m, "salary_increase");
        p.payload.emplace_back("previous_" + salary_key, number_text(prev->salary));
        p.payload.emplace_back(salary_key, number_text(m.salary));
        out.push_back(std::move(p));
      }
      if (m.vacation_days >= thresholds.vacation_days_min) {
        Paragraph p = change_paragraph(series, m, "vacation");
        p.payload.emplace_back(vacation_key, number_text(m.vacation_days));
        out.push_back(std::move(p));
      }
      if (m.sick_days >= thresholds.sick_days_min) {
        Paragraph p = change_paragraph(series, m, "sickness");
        p.payload.emplace_back(sick_key, number_text(m.sick_days));
        out.push_back(std::move(p));
      }
      prev = &m;
      last = &m;
    }
    if (last && series.observation_end && last->period < *series.observation_end) {
      out.push_back(change_paragraph(series, *last, "job_end"));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Paragraph& a, const Paragraph& b) { return *a.sort_date < *b.sort_date; });
  return out;
}

std::vector<Paragraph> detect_education_changes(const EducationSeries& series) {
  std::vector<Paragraph> out;
  const std::string* previous = nullptr;
  for (std::size_t i = 0; i < series.years.size(); ++i) {
    const EducationYear& y = series.years[i];
    if (i > 0 && y.year <= series.years[i - 1].year) {
      throw Error(ErrorCode::UnsortedInput, "education years of '" + series.subject.str() + "' are not strictly increasing");
    }
    if (previous && *previous == y.level) continue;
    Paragraph p;
    p.subject = series.subject;
    p.source = series.source;
    p.kind = ParagraphKind::Change;
    p.sort_date = CivilDate{y.year, 1, 1};
    p.end_date = CivilDate{y.year, 12, 31};
    p.resolution = Resolution::Year;
    p.line = y.line;
    p.payload.emplace_back(series.year_field, std::to_string(y.year));
    p.payload.emplace_back("change", previous ? "change" : "initial");
    if (previous) p.payload.emplace_back("previous_" + series.level_field, *previous);
    p.payload.emplace_back(series.level_field, y.level);
    out.push_back(std::move(p));
    previous = &y.level;
  }
  return out;
}

std::vector<Paragraph> extract_paragraphs(const PersonIndex& index, const PersonId& person,
                                          std::span<const SourceSelection> what) {
  std::vector<Paragraph> out;
  for (const auto& sel : what) {
    if (sel.is_score()) continue;
    auto ordinal = index.source_ordinal(sel.source);
    if (!ordinal) throw Error(ErrorCode::UnknownSource, "source '" + sel.source + "' is not loaded");
    const RecordSet& set = index.source(*ordinal);
    const SourceSchema& schema = set.schema();
    auto records = query_records(index, person.str(), sel.source, sel.window);

    if (sel.changes_only && schema.role == SourceRole::MonthlyEvents) {
      EmploymentSeries series{person, schema.name, schema.changes, {}, index.last_date(*ordinal)};
      series.months.reserve(records.size());
      for (const Record* r : records) {
        EmploymentMonth m;
        m.period = r->start;
        m.contract = std::string(set.value(*r, schema.changes.contract));
        if (!schema.changes.salary.empty()) m.salary = to_number(set.value(*r, schema.changes.salary));
        if (!schema.changes.vacation_days.empty()) m.vacation_days = to_number(set.value(*r, schema.changes.vacation_days));
        if (!schema.changes.sick_days.empty()) m.sick_days = to_number(set.value(*r, schema.changes.sick_days));
        m.line = r->line;
        series.months.push_back(std::move(m));
      }
      for (auto& p : detect_employment_changes(series, sel.thresholds)) out.push_back(std::move(p));
      continue;
    }
    if (sel.changes_only && schema.role == SourceRole::YearlyAttributes) {
      EducationSeries series{person, schema.name, schema.dates.as_of, schema.changes.level, {}};
      for (const Record* r : records) {
        series.years.push_back(EducationYear{r->start.year, std::string(set.value(*r, schema.changes.level)), r->line});
      }
      for (auto& p : detect_education_changes(series)) out.push_back(std::move(p));
      continue;
    }

    for (const Record* r : records) {
      Paragraph p;
      p.subject = person;
      p.source = schema.name;
      p.line = r->line;
      p.payload = project(set, *r, sel);
      p.resolution = schema.resolution();
      switch (schema.role) {
        case SourceRole::Static: p.kind = ParagraphKind::Attribute; break;
        case SourceRole::Spells:
          p.kind = ParagraphKind::Spell;
          p.sort_date = r->start;
          p.end_date = r->end;
          break;
        case SourceRole::MonthlyEvents:
          p.kind = ParagraphKind::Event;
          p.sort_date = r->start;
          p.end_date = r->end;
          break;
        case SourceRole::YearlyAttributes:
          p.kind = ParagraphKind::Attribute;
          p.sort_date = r->start;
          p.end_date = r->end;
          break;
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

ScoreTable load_score_table(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open scores table " + path);
  ScoreTable table;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1 || line.empty()) continue;
    auto sep = line.find(delimiter);
    if (sep == std::string::npos) {
      throw Error(ErrorCode::TypeMismatch, path + ": expected person_id" + std::string(1, delimiter) + "score", number);
    }
    std::string_view score(line);
    score.remove_prefix(sep + 1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(score.data(), score.data() + score.size(), v);
    if (ec != std::errc{} || ptr != score.data() + score.size()) {
      throw Error(ErrorCode::TypeMismatch, path + ": score '" + std::string(score) + "' is not a number", number);
    }
    table[line.substr(0, sep)] = v;
  }
  return table;
}

std::string format_score(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::optional<Paragraph> attach_summary_score(const PersonId& person, const ScoreTable& scores, const std::string& label) {
  auto it = scores.find(person.str());
  if (it == scores.end()) return std::nullopt;
  Paragraph p;
  p.subject = person;
  p.source = label;
  p.kind = ParagraphKind::SummaryScore;
  p.payload.emplace_back(label, format_score(it->second));
  return p;
}

}  // namespace bolt
