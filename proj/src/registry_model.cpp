#include "bolt/registry_model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bolt/error.hpp"

namespace bolt {

namespace {

constexpr std::array<std::string_view, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

bool parse_digits(std::string_view text, int& out) noexcept {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string pad(int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

std::string_view ordinal_suffix(int day) noexcept {
  if (day % 100 >= 11 && day % 100 <= 13) return "th";
  switch (day % 10) {
    case 1: return "st";
    case 2: return "nd";
    case 3: return "rd";
    default: return "th";
  }
}

}  // namespace

bool is_leap_year(int year) noexcept { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

int days_in_month(int year, int month) noexcept {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12) return 0;
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[static_cast<std::size_t>(month - 1)];
}

bool CivilDate::valid() const noexcept {
  return year >= 1 && year <= 9999 && month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

CivilDate CivilDate::make(int year, int month, int day) {
  CivilDate d{year, month, day};
  if (!d.valid()) {
    throw Error(ErrorCode::InvalidDate,
                "not a calendar date: " + std::to_string(year) + "-" + std::to_string(month) + "-" + std::to_string(day));
  }
  return d;
}

std::strong_ordering compare_dates(const CivilDate& a, const CivilDate& b) noexcept { return a <=> b; }

CivilDate period_end(const CivilDate& date, Resolution resolution) noexcept {
  switch (resolution) {
    case Resolution::Day: return date;
    case Resolution::Month: return {date.year, date.month, days_in_month(date.year, date.month)};
    case Resolution::Year: return {date.year, 12, 31};
  }
  return date;
}

CivilDate next_day(const CivilDate& date) noexcept {
  CivilDate d = date;
  if (++d.day > days_in_month(d.year, d.month)) {
    d.day = 1;
    if (++d.month > 12) {
      d.month = 1;
      ++d.year;
    }
  }
  return d;
}

CivilDate previous_day(const CivilDate& date) noexcept {
  CivilDate d = date;
  if (--d.day < 1) {
    if (--d.month < 1) {
      d.month = 12;
      --d.year;
    }
    d.day = days_in_month(d.year, d.month);
  }
  return d;
}

std::optional<CivilDate> parse_iso_date(std::string_view text) noexcept {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  CivilDate d;
  if (!parse_digits(text.substr(0, 4), d.year) || !parse_digits(text.substr(5, 2), d.month) ||
      !parse_digits(text.substr(8, 2), d.day)) {
    return std::nullopt;
  }
  if (!d.valid()) return std::nullopt;
  return d;
}

std::optional<CivilDate> parse_year_month(std::string_view text) noexcept {
  if (text.size() != 7 || text[4] != '-') return std::nullopt;
  CivilDate d;
  if (!parse_digits(text.substr(0, 4), d.year) || !parse_digits(text.substr(5, 2), d.month)) return std::nullopt;
  if (!d.valid()) return std::nullopt;
  return d;
}

std::optional<CivilDate> parse_year(std::string_view text) noexcept {
  if (text.size() != 4) return std::nullopt;
  CivilDate d;
  if (!parse_digits(text, d.year)) return std::nullopt;
  if (!d.valid()) return std::nullopt;
  return d;
}

std::optional<CivilDate> parse_date(std::string_view text, Resolution resolution) noexcept {
  switch (resolution) {
    case Resolution::Day: return parse_iso_date(text);
    case Resolution::Month: return parse_year_month(text);
    case Resolution::Year: return parse_year(text);
  }
  return std::nullopt;
}

std::string format_iso(const CivilDate& date) {
  return pad(date.year, 4) + "-" + pad(date.month, 2) + "-" + pad(date.day, 2);
}

std::string format_date(const CivilDate& date, Resolution resolution) {
  switch (resolution) {
    case Resolution::Day: return format_iso(date);
    case Resolution::Month: return pad(date.year, 4) + "-" + pad(date.month, 2);
    case Resolution::Year: return pad(date.year, 4);
  }
  return format_iso(date);
}

std::string format_long_date(const CivilDate& date, Resolution resolution) {
  std::string month(kMonthNames[static_cast<std::size_t>(date.month - 1)]);
  switch (resolution) {
    case Resolution::Day:
      return month + " " + std::to_string(date.day) + std::string(ordinal_suffix(date.day)) + " " +
             std::to_string(date.year);
    case Resolution::Month: return month + " " + std::to_string(date.year);
    case Resolution::Year: return std::to_string(date.year);
  }
  return format_iso(date);
}

std::optional<CivilDate> parse_long_date(std::string_view text) noexcept {
  auto first = text.find(' ');
  if (first == std::string_view::npos) return std::nullopt;
  auto second = text.find(' ', first + 1);
  if (second == std::string_view::npos) return std::nullopt;
  auto month_it = std::find(kMonthNames.begin(), kMonthNames.end(), text.substr(0, first));
  if (month_it == kMonthNames.end()) return std::nullopt;
  std::string_view day_part = text.substr(first + 1, second - first - 1);
  if (day_part.size() < 3) return std::nullopt;
  std::string_view suffix = day_part.substr(day_part.size() - 2);
  CivilDate d;
  d.month = static_cast<int>(month_it - kMonthNames.begin()) + 1;
  if (!parse_digits(day_part.substr(0, day_part.size() - 2), d.day)) return std::nullopt;
  if (day_part[0] == '0') return std::nullopt;
  if (suffix != ordinal_suffix(d.day)) return std::nullopt;
  if (!parse_digits(text.substr(second + 1), d.year)) return std::nullopt;
  if (!d.valid()) return std::nullopt;
  return d;
}

bool DateRange::overlaps(const CivilDate& start, const std::optional<CivilDate>& end) const noexcept {
  if (to && start > *to) return false;
  if (from && end && *end < *from) return false;
  return true;
}

PersonId::PersonId(std::string value) : value_(std::move(value)) {
  if (value_.empty()) throw Error(ErrorCode::InvalidValue, "person id must not be empty");
}

std::string_view to_string(SourceRole role) noexcept {
  switch (role) {
    case SourceRole::Static: return "static";
    case SourceRole::Spells: return "spells";
    case SourceRole::MonthlyEvents: return "monthly_events";
    case SourceRole::YearlyAttributes: return "yearly_attributes";
  }
  return "static";
}

std::string_view to_string(FieldType type) noexcept {
  switch (type) {
    case FieldType::String: return "string";
    case FieldType::Integer: return "integer";
    case FieldType::Number: return "number";
    case FieldType::Code: return "code";
    case FieldType::Date: return "date";
    case FieldType::YearMonth: return "year_month";
    case FieldType::Year: return "year";
    case FieldType::Person: return "person_id";
    case FieldType::PersonList: return "person_list";
  }
  return "string";
}

std::optional<SourceRole> parse_source_role(std::string_view text) noexcept {
  for (auto role : {SourceRole::Static, SourceRole::Spells, SourceRole::MonthlyEvents, SourceRole::YearlyAttributes}) {
    if (to_string(role) == text) return role;
  }
  return std::nullopt;
}

std::optional<FieldType> parse_field_type(std::string_view text) noexcept {
  for (auto type : {FieldType::String, FieldType::Integer, FieldType::Number, FieldType::Code, FieldType::Date,
                    FieldType::YearMonth, FieldType::Year, FieldType::Person, FieldType::PersonList}) {
    if (to_string(type) == text) return type;
  }
  return std::nullopt;
}

std::vector<std::string_view> split_list(std::string_view cell) {
  std::vector<std::string_view> out;
  if (cell.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    auto next = cell.find(kListSeparator, pos);
    out.push_back(cell.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

const FieldSpec* SourceSchema::field(std::string_view field_name) const noexcept {
  for (const auto& f : fields) {
    if (f.name == field_name) return &f;
  }
  return nullptr;
}

bool SourceSchema::is_link_field(std::string_view field_name) const noexcept {
  return std::find(link_fields.begin(), link_fields.end(), field_name) != link_fields.end();
}

Resolution SourceSchema::resolution() const noexcept {
  switch (role) {
    case SourceRole::MonthlyEvents: return Resolution::Month;
    case SourceRole::YearlyAttributes: return Resolution::Year;
    default: return Resolution::Day;
  }
}

void SourceSchema::validate() const {
  auto fail = [&](const std::string& what) { throw Error(ErrorCode::SchemaError, "source '" + name + "': " + what); };
  if (name.empty()) throw Error(ErrorCode::SchemaError, "source without a name");
  if (!field(focal_key)) fail("focal key '" + focal_key + "' is not a declared field");
  auto require = [&](const std::string& binding, FieldType type, const char* what) {
    if (binding.empty()) fail(std::string("role ") + std::string(to_string(role)) + " requires a " + what + " binding");
    const FieldSpec* f = field(binding);
    if (!f) fail(std::string(what) + " binding '" + binding + "' is not a declared field");
    if (f->type != type) fail(std::string(what) + " field '" + binding + "' must have type " + std::string(to_string(type)));
  };
  auto forbid = [&](const std::string& binding, const char* what) {
    if (!binding.empty()) fail(std::string("role ") + std::string(to_string(role)) + " does not take a " + what + " binding");
  };
  switch (role) {
    case SourceRole::Static:
      forbid(dates.start, "start");
      forbid(dates.end, "end");
      forbid(dates.period, "period");
      forbid(dates.as_of, "as_of");
      break;
    case SourceRole::Spells:
      require(dates.start, FieldType::Date, "start");
      require(dates.end, FieldType::Date, "end");
      forbid(dates.period, "period");
      forbid(dates.as_of, "as_of");
      break;
    case SourceRole::MonthlyEvents:
      require(dates.period, FieldType::YearMonth, "period");
      forbid(dates.start, "start");
      forbid(dates.end, "end");
      forbid(dates.as_of, "as_of");
      break;
    case SourceRole::YearlyAttributes:
      require(dates.as_of, FieldType::Year, "as_of");
      forbid(dates.start, "start");
      forbid(dates.end, "end");
      forbid(dates.period, "period");
      break;
  }
  for (const auto& link : link_fields) {
    const FieldSpec* f = field(link);
    if (!f) fail("link field '" + link + "' is not a declared field");
    if (f->type != FieldType::Person && f->type != FieldType::PersonList) {
      fail("link field '" + link + "' must be person_id or person_list");
    }
  }
  for (const auto* binding : {&changes.contract, &changes.salary, &changes.vacation_days, &changes.sick_days,
                              &changes.level}) {
    if (!binding->empty() && !field(*binding)) fail("change field '" + *binding + "' is not a declared field");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i + 1; j < fields.size(); ++j) {
      if (fields[i].name == fields[j].name) fail("duplicate field '" + fields[i].name + "'");
    }
  }
}

SchemaRegistry::SchemaRegistry(std::vector<SourceSchema> sources) : sources_(std::move(sources)) {
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    sources_[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (sources_[i].name == sources_[j].name) {
        throw Error(ErrorCode::DuplicateSourceName, "source '" + sources_[i].name + "' declared twice");
      }
    }
  }
}

SchemaRegistry SchemaRegistry::from_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("schema registry is not valid JSON: ") + e.what());
  }
  std::vector<SourceSchema> sources;
  try {
    for (const auto& s : doc.at("sources")) {
      SourceSchema schema;
      schema.name = s.at("name").get<std::string>();
      schema.file = s.value("file", schema.name + ".csv");
      auto role = parse_source_role(s.at("role").get<std::string>());
      if (!role) throw Error(ErrorCode::SchemaError, "source '" + schema.name + "': unknown role");
      schema.role = *role;
      schema.focal_key = s.at("focal_key").get<std::string>();
      std::string delim = s.value("delimiter", std::string(","));
      if (delim.size() != 1) throw Error(ErrorCode::SchemaError, "source '" + schema.name + "': delimiter must be one character");
      schema.delimiter = delim[0];
      for (const auto& f : s.at("fields")) {
        FieldSpec spec;
        spec.name = f.at("name").get<std::string>();
        auto type = parse_field_type(f.value("type", std::string("string")));
        if (!type) throw Error(ErrorCode::SchemaError, "field '" + spec.name + "': unknown type");
        spec.type = *type;
        spec.non_negative = f.value("non_negative", false);
        spec.optional = f.value("optional", false);
        schema.fields.push_back(std::move(spec));
      }
      if (s.contains("dates")) {
        const auto& d = s.at("dates");
        schema.dates.start = d.value("start", std::string());
        schema.dates.end = d.value("end", std::string());
        schema.dates.period = d.value("period", std::string());
        schema.dates.as_of = d.value("as_of", std::string());
      }
      if (s.contains("link_fields")) schema.link_fields = s.at("link_fields").get<std::vector<std::string>>();
      if (s.contains("changes")) {
        const auto& c = s.at("changes");
        schema.changes.contract = c.value("contract", std::string());
        schema.changes.salary = c.value("salary", std::string());
        schema.changes.vacation_days = c.value("vacation_days", std::string());
        schema.changes.sick_days = c.value("sick_days", std::string());
        schema.changes.level = c.value("level", std::string());
        if (c.contains("level_ordering")) {
          schema.changes.level_ordering = c.at("level_ordering").get<std::vector<std::string>>();
        }
      }
      sources.push_back(std::move(schema));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed schema registry: ") + e.what());
  }
  return SchemaRegistry(std::move(sources));
}

SchemaRegistry SchemaRegistry::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open schema registry " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string SchemaRegistry::to_json() const {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["sources"] = ordered_json::array();
  for (const auto& s : sources_) {
    ordered_json j;
    j["name"] = s.name;
    j["file"] = s.file;
    j["role"] = std::string(to_string(s.role));
    j["focal_key"] = s.focal_key;
    j["delimiter"] = std::string(1, s.delimiter);
    j["fields"] = ordered_json::array();
    for (const auto& f : s.fields) {
      ordered_json fj;
      fj["name"] = f.name;
      fj["type"] = std::string(to_string(f.type));
      if (f.non_negative) fj["non_negative"] = true;
      if (f.optional) fj["optional"] = true;
      j["fields"].push_back(fj);
    }
    ordered_json dates = ordered_json::object();
    if (!s.dates.start.empty()) dates["start"] = s.dates.start;
    if (!s.dates.end.empty()) dates["end"] = s.dates.end;
    if (!s.dates.period.empty()) dates["period"] = s.dates.period;
    if (!s.dates.as_of.empty()) dates["as_of"] = s.dates.as_of;
    j["dates"] = dates;
    if (!s.link_fields.empty()) j["link_fields"] = s.link_fields;
    ordered_json changes = ordered_json::object();
    if (!s.changes.contract.empty()) changes["contract"] = s.changes.contract;
    if (!s.changes.salary.empty()) changes["salary"] = s.changes.salary;
    if (!s.changes.vacation_days.empty()) changes["vacation_days"] = s.changes.vacation_days;
    if (!s.changes.sick_days.empty()) changes["sick_days"] = s.changes.sick_days;
    if (!s.changes.level.empty()) changes["level"] = s.changes.level;
    if (!s.changes.level_ordering.empty()) changes["level_ordering"] = s.changes.level_ordering;
    if (!changes.empty()) j["changes"] = changes;
    doc["sources"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

const SourceSchema* SchemaRegistry::find(std::string_view name) const noexcept {
  for (const auto& s : sources_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const SourceSchema& SchemaRegistry::at(std::string_view name) const {
  const SourceSchema* s = find(name);
  if (!s) throw Error(ErrorCode::UnknownSource, "unknown source '" + std::string(name) + "'");
  return *s;
}

std::string_view payload_value(const Payload& payload, std::string_view field) noexcept {
  for (const auto& [k, v] : payload) {
    if (k == field) return v;
  }
  return {};
}

bool payload_has(const Payload& payload, std::string_view field) noexcept {
  return std::any_of(payload.begin(), payload.end(), [&](const auto& kv) { return kv.first == field; });
}

void check_spell(std::string_view subject, const CivilDate& start, const std::optional<CivilDate>& end,
                 const std::vector<std::string_view>& co_members) {
  if (end && *end < start) {
    throw Error(ErrorCode::StartAfterEnd, "spell of '" + std::string(subject) + "' starts " + format_iso(start) +
                                              " after it ends " + format_iso(*end));
  }
  if (std::find(co_members.begin(), co_members.end(), subject) != co_members.end()) {
    throw Error(ErrorCode::SelfCoMember, "'" + std::string(subject) + "' is listed as their own co-member");
  }
}

const SpellRecord& validate_spell(const SpellRecord& record) {
  std::vector<std::string_view> members;
  members.reserve(record.co_members.size());
  for (const auto& m : record.co_members) members.push_back(m.str());
  check_spell(record.subject.str(), record.start, record.end, members);
  return record;
}

}  // namespace bolt
