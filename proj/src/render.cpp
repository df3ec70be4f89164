#include "bolt/render.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bolt {

namespace {

using Segment = SentenceTemplate::Segment;

std::size_t code_points(std::string_view text) noexcept {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::vector<Segment> parse_pattern(const std::string& pattern) {
  std::vector<Segment> top;
  std::vector<Segment>* current = &top;
  Segment optional;
  bool in_optional = false;
  std::string literal;
  auto flush = [&] {
    if (!literal.empty()) {
      current->push_back(Segment{Segment::Kind::Literal, literal, {}});
      literal.clear();
    }
  };
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    char c = pattern[i];
    if (c == '\\') {
      if (i + 1 == pattern.size()) throw Error(ErrorCode::TemplateError, "dangling escape in '" + pattern + "'");
      literal += pattern[++i];
    } else if (c == '{') {
      auto close = pattern.find('}', i);
      if (close == std::string::npos) throw Error(ErrorCode::TemplateError, "unterminated slot in '" + pattern + "'");
      std::string name = pattern.substr(i + 1, close - i - 1);
      if (name.empty()) throw Error(ErrorCode::TemplateError, "empty slot in '" + pattern + "'");
      flush();
      current->push_back(Segment{Segment::Kind::Slot, name, {}});
      i = close;
    } else if (c == '[') {
      if (in_optional) throw Error(ErrorCode::TemplateError, "optional segments cannot nest in '" + pattern + "'");
      flush();
      in_optional = true;
      optional = Segment{Segment::Kind::Optional, {}, {}};
      current = &optional.children;
    } else if (c == ']') {
      if (!in_optional) throw Error(ErrorCode::TemplateError, "unbalanced ']' in '" + pattern + "'");
      flush();
      in_optional = false;
      current = &top;
      bool has_slot = std::any_of(optional.children.begin(), optional.children.end(),
                                  [](const Segment& s) { return s.kind == Segment::Kind::Slot; });
      if (!has_slot) throw Error(ErrorCode::TemplateError, "optional segment without a slot in '" + pattern + "'");
      top.push_back(std::move(optional));
    } else {
      literal += c;
    }
  }
  if (in_optional) throw Error(ErrorCode::TemplateError, "unterminated optional segment in '" + pattern + "'");
  flush();
  return top;
}

void collect_slots(const std::vector<Segment>& segs, std::vector<std::string>& out) {
  for (const auto& s : segs) {
    if (s.kind == Segment::Kind::Slot) {
      if (std::find(out.begin(), out.end(), s.text) == out.end()) out.push_back(s.text);
    } else if (s.kind == Segment::Kind::Optional) {
      collect_slots(s.children, out);
    }
  }
}

/// All flat variants; variants keeping more optional segments come first.
std::vector<std::vector<Segment>> expand(const std::vector<Segment>& segs) {
  std::vector<std::size_t> optionals;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].kind == Segment::Kind::Optional) optionals.push_back(i);
  }
  std::vector<std::vector<Segment>> out;
  const std::size_t n = std::size_t{1} << optionals.size();
  for (std::size_t mask = 0; mask < n; ++mask) {
    std::size_t keep = (n - 1) & ~mask;
    std::vector<Segment> flat;
    for (std::size_t i = 0, o = 0; i < segs.size(); ++i) {
      if (segs[i].kind != Segment::Kind::Optional) {
        flat.push_back(segs[i]);
        continue;
      }
      if (keep & (std::size_t{1} << o)) {
        for (const auto& c : segs[i].children) flat.push_back(c);
      }
      ++o;
    }
    // Merge adjacent literals.
    std::vector<Segment> merged;
    for (auto& s : flat) {
      if (!merged.empty() && merged.back().kind == Segment::Kind::Literal && s.kind == Segment::Kind::Literal) {
        merged.back().text += s.text;
      } else {
        merged.push_back(std::move(s));
      }
    }
    out.push_back(std::move(merged));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

void check_adjacent_slots(const std::vector<Segment>& segs, const std::string& pattern) {
  for (const auto& flat : expand(segs)) {
    for (std::size_t i = 1; i < flat.size(); ++i) {
      if (flat[i].kind == Segment::Kind::Slot && flat[i - 1].kind == Segment::Kind::Slot) {
        throw Error(ErrorCode::TemplateError, "adjacent slots cannot be inverted in '" + pattern + "'");
      }
    }
  }
}

const FieldSpec* field_spec(const SlotContext& ctx, std::string_view name) {
  return ctx.schema ? ctx.schema->field(name) : nullptr;
}

std::string_view month_name(int month) {
  static constexpr std::array<std::string_view, 12> kNames = {"January", "February", "March",     "April",
                                                              "May",     "June",     "July",      "August",
                                                              "September", "October", "November", "December"};
  return kNames[static_cast<std::size_t>(month - 1)];
}

std::optional<std::string> parse_long_month(std::string_view text) {
  auto space = text.find(' ');
  if (space == std::string_view::npos) return std::nullopt;
  for (int m = 1; m <= 12; ++m) {
    if (month_name(m) == text.substr(0, space)) {
      auto year = parse_year(text.substr(space + 1));
      if (!year) return std::nullopt;
      return format_date(CivilDate{year->year, m, 1}, Resolution::Month);
    }
  }
  return std::nullopt;
}

std::string display_person(const SlotContext& ctx, std::string_view id) {
  return std::string(ctx.names ? ctx.names->display(id) : id);
}

/// Prose form of a slot, empty when the value is absent.
std::string slot_text(const std::string& slot, const Paragraph& p, const SlotContext& ctx) {
  if (slot == "subject") return display_person(ctx, p.subject.str());
  std::string_view raw = payload_value(p.payload, slot);
  if (raw.empty()) return {};
  const FieldSpec* f = field_spec(ctx, slot);
  FieldType type = f ? f->type : FieldType::String;
  switch (type) {
    case FieldType::Date: {
      auto d = parse_iso_date(raw);
      return d ? format_long_date(*d, Resolution::Day) : std::string(raw);
    }
    case FieldType::YearMonth: {
      auto d = parse_year_month(raw);
      return d ? format_long_date(*d, Resolution::Month) : std::string(raw);
    }
    case FieldType::Person: return display_person(ctx, raw);
    case FieldType::PersonList: {
      std::vector<std::string> names;
      for (auto id : split_list(raw)) names.push_back(display_person(ctx, id));
      return join_names(names);
    }
    default: break;
  }
  if (ctx.dictionary) return ctx.dictionary->map_value(slot, raw);
  return std::string(raw);
}

/// Raw file encoding of a slot's prose, or nullopt if it does not parse.
std::optional<std::string> slot_raw(const std::string& slot, std::string_view text, const SlotContext& ctx) {
  if (text.empty()) return std::nullopt;
  auto id_of = [&](std::string_view name) { return std::string(ctx.names ? ctx.names->id_for(name) : name); };
  if (slot == "subject") return id_of(text);
  const FieldSpec* f = field_spec(ctx, slot);
  FieldType type = f ? f->type : FieldType::String;
  switch (type) {
    case FieldType::Date: {
      auto d = parse_long_date(text);
      if (!d) return std::nullopt;
      return format_iso(*d);
    }
    case FieldType::YearMonth: return parse_long_month(text);
    case FieldType::Person: return id_of(text);
    case FieldType::PersonList: {
      std::string out;
      for (const auto& name : split_names(text)) {
        if (name.empty()) return std::nullopt;
        if (!out.empty()) out += kListSeparator;
        out += id_of(name);
      }
      return out;
    }
    default: break;
  }
  if (ctx.dictionary) {
    if (const ValueMap* vm = ctx.dictionary->value_map(slot)) {
      const std::string* code = vm->find_code(text);
      if (!code) return std::nullopt;
      return *code;
    }
  }
  return std::string(text);
}

bool match_flat(const std::vector<Segment>& segs, std::size_t i, std::string_view text, std::size_t pos,
                const SlotContext& ctx, std::vector<std::pair<std::string, std::string>>& out) {
  if (i == segs.size()) return pos == text.size();
  const Segment& s = segs[i];
  if (s.kind == Segment::Kind::Literal) {
    if (text.substr(pos, s.text.size()) != s.text) return false;
    return match_flat(segs, i + 1, text, pos + s.text.size(), ctx, out);
  }
  auto attempt = [&](std::size_t end) {
    auto raw = slot_raw(s.text, text.substr(pos, end - pos), ctx);
    if (!raw) return false;
    out.emplace_back(s.text, std::move(*raw));
    if (match_flat(segs, i + 1, text, end, ctx, out)) return true;
    out.pop_back();
    return false;
  };
  if (i + 1 == segs.size()) return attempt(text.size());
  const std::string& next = segs[i + 1].text;  // literal by construction
  for (std::size_t q = text.find(next, pos + 1); q != std::string_view::npos; q = text.find(next, q + 1)) {
    if (attempt(q)) return true;
  }
  return false;
}

std::string render_segments(const std::vector<Segment>& segs, const Paragraph& p, const SlotContext& ctx,
                            const std::string& pattern) {
  std::string out;
  for (const auto& s : segs) {
    switch (s.kind) {
      case Segment::Kind::Literal: out += s.text; break;
      case Segment::Kind::Slot: {
        std::string v = slot_text(s.text, p, ctx);
        if (v.empty()) {
          throw Error(ErrorCode::MissingSlotValue, "template '" + pattern + "' needs a value for '" + s.text + "'");
        }
        out += v;
        break;
      }
      case Segment::Kind::Optional: {
        std::string part;
        bool complete = true;
        for (const auto& c : s.children) {
          if (c.kind == Segment::Kind::Literal) {
            part += c.text;
            continue;
          }
          std::string v = slot_text(c.text, p, ctx);
          if (v.empty()) {
            complete = false;
            break;
          }
          part += v;
        }
        if (complete) out += part;
        break;
      }
    }
  }
  return out;
}

// Raw style brackets lists so an empty one stays visible; dictionary style
// prints the bare names.
std::string list_text(std::string_view cell, bool map_names, const NameMap* names) {
  std::string out = map_names ? "" : "[";
  bool first = true;
  for (auto id : split_list(cell)) {
    if (!first) out += ", ";
    first = false;
    out += map_names && names ? names->display(id) : id;
  }
  if (!map_names) out += "]";
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

NameMap::NameMap(std::unordered_map<std::string, std::string> names) : names_(std::move(names)) {
  for (const auto& [id, name] : names_) ids_.emplace(name, id);
}

NameMap NameMap::load(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open name map " + path);
  std::unordered_map<std::string, std::string> names;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1 || line.empty()) continue;
    auto sep = line.find(delimiter);
    if (sep == std::string::npos || sep + 1 == line.size()) {
      throw Error(ErrorCode::TypeMismatch, path + ": expected person_id" + std::string(1, delimiter) + "name", number);
    }
    names.emplace(line.substr(0, sep), line.substr(sep + 1));
  }
  return NameMap(std::move(names));
}

std::string_view NameMap::display(std::string_view id) const noexcept {
  auto it = names_.find(std::string(id));
  return it == names_.end() ? id : std::string_view(it->second);
}

std::string_view NameMap::id_for(std::string_view name) const noexcept {
  auto it = ids_.find(std::string(name));
  return it == ids_.end() ? name : std::string_view(it->second);
}

const std::string* ValueMap::find(std::string_view code) const noexcept {
  for (const auto& [c, d] : codes) {
    if (c == code) return &d;
  }
  return nullptr;
}

const std::string* ValueMap::find_code(std::string_view display) const noexcept {
  for (const auto& [c, d] : codes) {
    if (d == display) return &c;
  }
  return nullptr;
}

SentenceTemplate SentenceTemplate::compile(std::string pattern, std::optional<std::string> ongoing_pattern) {
  SentenceTemplate t;
  t.main_ = parse_pattern(pattern);
  check_adjacent_slots(t.main_, pattern);
  if (ongoing_pattern) {
    t.ongoing_segments_ = parse_pattern(*ongoing_pattern);
    check_adjacent_slots(t.ongoing_segments_, *ongoing_pattern);
  }
  t.pattern_ = std::move(pattern);
  t.ongoing_ = std::move(ongoing_pattern);
  return t;
}

std::vector<std::string> SentenceTemplate::slots() const {
  std::vector<std::string> out;
  collect_slots(main_, out);
  return out;
}

bool SentenceTemplate::has_slot(std::string_view name) const noexcept {
  std::vector<std::string> all;
  collect_slots(main_, all);
  collect_slots(ongoing_segments_, all);
  return std::find(all.begin(), all.end(), name) != all.end();
}

std::string SentenceTemplate::render(const Paragraph& paragraph, const SlotContext& context) const {
  bool ongoing = paragraph.kind == ParagraphKind::Spell && paragraph.dated() && !paragraph.end_date;
  if (ongoing && ongoing_) return render_segments(ongoing_segments_, paragraph, context, *ongoing_);
  return render_segments(main_, paragraph, context, pattern_);
}

std::optional<Payload> SentenceTemplate::invert(std::string_view sentence, const SlotContext& context) const {
  std::vector<std::string> all;
  collect_slots(main_, all);
  collect_slots(ongoing_segments_, all);
  auto try_pattern = [&](const std::vector<Segment>& segs) -> std::optional<Payload> {
    for (const auto& flat : expand(segs)) {
      std::vector<std::pair<std::string, std::string>> found;
      if (!match_flat(flat, 0, sentence, 0, context, found)) continue;
      Payload out;
      for (const auto& slot : all) {
        auto it = std::find_if(found.begin(), found.end(), [&](const auto& kv) { return kv.first == slot; });
        out.emplace_back(slot, it == found.end() ? std::string() : it->second);
      }
      return out;
    }
    return std::nullopt;
  };
  if (auto r = try_pattern(main_)) return r;
  if (ongoing_) return try_pattern(ongoing_segments_);
  return std::nullopt;
}

std::string_view ParsingDictionary::field_name(std::string_view field) const noexcept {
  for (const auto& [raw, display] : field_names) {
    if (raw == field) return display;
  }
  return field;
}

const ValueMap* ParsingDictionary::value_map(std::string_view field) const noexcept {
  for (const auto& [f, vm] : value_maps) {
    if (f == field) return &vm;
  }
  return nullptr;
}

std::string ParsingDictionary::map_value(std::string_view field, std::string_view code) const {
  const ValueMap* vm = value_map(field);
  if (!vm) return std::string(code);
  if (const std::string* d = vm->find(code)) return *d;
  if (vm->fallback) return *vm->fallback;
  throw Error(ErrorCode::UnmappedCode,
              "dictionary '" + name + "' has no mapping for " + std::string(field) + "=" + std::string(code));
}

void ParsingDictionary::validate() const {
  if (name.empty()) throw Error(ErrorCode::TemplateError, "dictionary without a name");
  for (const auto& [raw, display] : field_names) {
    if (display.empty()) throw Error(ErrorCode::TemplateError, "dictionary '" + name + "': empty display name for " + raw);
  }
  for (const auto& [field, vm] : value_maps) {
    for (const auto& [code, display] : vm.codes) {
      if (display.empty()) {
        throw Error(ErrorCode::TemplateError, "dictionary '" + name + "': empty display value for " + field + "=" + code);
      }
    }
    if (sentence && sentence->has_slot(field)) {
      std::set<std::string> seen;
      for (const auto& [code, display] : vm.codes) {
        if (!seen.insert(display).second) {
          throw Error(ErrorCode::TemplateError, "dictionary '" + name + "': value map of template slot '" + field +
                                                    "' maps two codes to '" + display + "'");
        }
      }
    }
  }
}

DictionaryRegistry::DictionaryRegistry(std::vector<ParsingDictionary> dictionaries)
    : dictionaries_(std::move(dictionaries)) {
  for (std::size_t i = 0; i < dictionaries_.size(); ++i) {
    dictionaries_[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (dictionaries_[i].name == dictionaries_[j].name) {
        throw Error(ErrorCode::TemplateError, "dictionary '" + dictionaries_[i].name + "' defined twice");
      }
    }
  }
}

DictionaryRegistry DictionaryRegistry::from_json(std::string_view text) {
  using nlohmann::ordered_json;
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw Error(ErrorCode::TemplateError, std::string("dictionaries are not valid JSON: ") + e.what());
  }
  std::vector<ParsingDictionary> out;
  try {
    for (const auto& d : doc.at("dictionaries")) {
      ParsingDictionary dict;
      dict.name = d.at("name").get<std::string>();
      dict.source = d.value("source", dict.name);
      dict.display_name = d.value("display_name", dict.source);
      if (d.contains("field_names")) {
        for (const auto& [k, v] : d.at("field_names").items()) dict.field_names.emplace_back(k, v.get<std::string>());
      }
      if (d.contains("value_maps")) {
        for (const auto& [field, vm] : d.at("value_maps").items()) {
          ValueMap map;
          const auto& codes = vm.contains("codes") ? vm.at("codes") : vm;
          for (const auto& [code, display] : codes.items()) {
            if (code == "fallback" && !vm.contains("codes")) continue;
            map.codes.emplace_back(code, display.get<std::string>());
          }
          if (vm.contains("fallback")) map.fallback = vm.at("fallback").get<std::string>();
          dict.value_maps.emplace_back(field, std::move(map));
        }
      }
      if (d.contains("template")) {
        const auto& t = d.at("template");
        std::optional<std::string> ongoing;
        if (t.contains("ongoing")) ongoing = t.at("ongoing").get<std::string>();
        dict.sentence = SentenceTemplate::compile(t.at("pattern").get<std::string>(), ongoing);
      }
      out.push_back(std::move(dict));
    }
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::TemplateError, std::string("malformed dictionaries: ") + e.what());
  }
  return DictionaryRegistry(std::move(out));
}

DictionaryRegistry DictionaryRegistry::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open dictionaries " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

const ParsingDictionary* DictionaryRegistry::find(std::string_view name) const noexcept {
  for (const auto& d : dictionaries_) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

const ParsingDictionary* DictionaryRegistry::for_source(std::string_view source) const noexcept {
  if (const ParsingDictionary* d = find(source)) return d;
  for (const auto& d : dictionaries_) {
    if (d.source == source) return &d;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

namespace {

/// Clears keep[i] for members of `group` that the filter rejects.
void filter_group(const std::vector<Paragraph>& paragraphs, std::vector<std::size_t> group, const FilterSpec& filter,
                  std::vector<bool>& keep) {
  if (filter.window) {
    std::erase_if(group, [&](std::size_t i) {
      const Paragraph& p = paragraphs[i];
      bool out = p.dated() && !filter.window->overlaps(*p.sort_date, p.end_date);
      if (out) keep[i] = false;
      return out;
    });
  }
  if (!filter.last_n) return;
  const auto n = static_cast<std::size_t>(*filter.last_n);
  std::map<std::string_view, std::vector<std::size_t>> by_source;
  for (std::size_t i : group) {
    if (paragraphs[i].dated()) by_source[paragraphs[i].source].push_back(i);
  }
  for (auto& [source, idx] : by_source) {
    // Newest first; exact ties keep the later paragraph.
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const Paragraph& pa = paragraphs[a];
      const Paragraph& pb = paragraphs[b];
      if (*pa.sort_date != *pb.sort_date) return *pa.sort_date > *pb.sort_date;
      if (pa.line != pb.line) return pa.line > pb.line;
      return a > b;
    });
    for (std::size_t k = n; k < idx.size(); ++k) keep[idx[k]] = false;
  }
}

std::vector<Paragraph> take_kept(std::vector<Paragraph>& paragraphs, const std::vector<bool>& keep) {
  std::vector<Paragraph> out;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (keep[i]) out.push_back(std::move(paragraphs[i]));
  }
  return out;
}

}  // namespace

std::vector<Paragraph> apply_filter(std::vector<Paragraph> paragraphs, const FilterSpec& filter) {
  std::vector<bool> keep(paragraphs.size(), true);
  std::vector<std::size_t> all(paragraphs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  filter_group(paragraphs, std::move(all), filter, keep);
  return take_kept(paragraphs, keep);
}

std::vector<Paragraph> apply_recipe_filters(std::vector<Paragraph> paragraphs, const Recipe& recipe) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) groups[paragraphs[i].source].push_back(i);
  std::vector<bool> keep(paragraphs.size(), true);
  for (auto& [source, idx] : groups) {
    const SourceSelection* sel = recipe.selection(source);
    const FilterSpec& spec = sel && sel->filter ? *sel->filter : recipe.how.filter;
    filter_group(paragraphs, std::move(idx), spec, keep);
  }
  return take_kept(paragraphs, keep);
}

std::vector<Paragraph> order_paragraphs(std::vector<Paragraph> paragraphs, Order order,
                                        std::span<const std::string> source_order) {
  auto position = [&](const std::string& source) {
    auto it = std::find(source_order.begin(), source_order.end(), source);
    return static_cast<std::size_t>(it - source_order.begin());
  };
  struct Key {
    std::size_t index;
    std::size_t position;
  };
  std::vector<Key> keys(paragraphs.size());
  for (std::size_t i = 0; i < paragraphs.size(); ++i) keys[i] = Key{i, position(paragraphs[i].source)};
  auto undated_less = [&](const Key& a, const Key& b) {
    const Paragraph& pa = paragraphs[a.index];
    const Paragraph& pb = paragraphs[b.index];
    bool sa = pa.kind == ParagraphKind::SummaryScore;
    bool sb = pb.kind == ParagraphKind::SummaryScore;
    if (sa != sb) return sb;
    if (sa) return pa.source < pb.source;
    if (a.position != b.position) return a.position < b.position;
    return pa.line < pb.line;
  };
  auto less = [&](const Key& a, const Key& b) {
    const Paragraph& pa = paragraphs[a.index];
    const Paragraph& pb = paragraphs[b.index];
    if (pa.dated() != pb.dated()) return !pa.dated();
    if (!pa.dated()) return undated_less(a, b);
    if (order == Order::BySourceThenChronological && a.position != b.position) return a.position < b.position;
    if (*pa.sort_date != *pb.sort_date) return *pa.sort_date < *pb.sort_date;
    if (a.position != b.position) return a.position < b.position;
    return pa.line < pb.line;
  };
  std::stable_sort(keys.begin(), keys.end(), less);
  std::vector<Paragraph> out;
  out.reserve(paragraphs.size());
  for (const auto& k : keys) out.push_back(std::move(paragraphs[k.index]));
  return out;
}

// ---------------------------------------------------------------------------

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += i + 1 == names.size() ? " and " : ", ";
    out += names[i];
  }
  return out;
}

std::vector<std::string> split_names(std::string_view text) {
  std::vector<std::string> out;
  auto last_and = text.rfind(" and ");
  std::string_view head = last_and == std::string_view::npos ? text : text.substr(0, last_and);
  std::size_t pos = 0;
  while (true) {
    auto comma = head.find(", ", pos);
    out.emplace_back(head.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 2;
  }
  if (last_and != std::string_view::npos) out.emplace_back(text.substr(last_and + 5));
  return out;
}

int estimate_tokens(std::string_view text) noexcept {
  return static_cast<int>((code_points(text) + 3) / 4);
}

std::string style_paragraph(const Paragraph& paragraph, const StyleSpec& style, const StyleContext& context) {
  const SourceSchema* schema = context.schemas ? context.schemas->find(paragraph.source) : nullptr;
  const ParsingDictionary* dict = nullptr;
  if (style.kind != StyleKind::Raw && context.dictionaries) {
    dict = style.dictionary.empty() ? context.dictionaries->for_source(paragraph.source)
                                    : context.dictionaries->find(style.dictionary);
    if (!dict && !style.dictionary.empty()) {
      throw Error(ErrorCode::UnknownDictionary, "unknown dictionary '" + style.dictionary + "'");
    }
  }
  if (style.kind == StyleKind::Template) {
    if (!dict || !dict->sentence) {
      throw Error(ErrorCode::UnknownDictionary, "dictionary '" + style.dictionary + "' has no sentence template");
    }
    return dict->sentence->render(paragraph, SlotContext{schema, dict, context.names});
  }
  const bool mapped = style.kind == StyleKind::Dictionary;
  std::string out;
  for (const auto& [field, value] : paragraph.payload) {
    const FieldSpec* f = schema ? schema->field(field) : nullptr;
    if (mapped && value.empty() && f && f->optional) continue;
    if (!out.empty()) out += ", ";
    out += mapped && dict ? dict->field_name(field) : std::string_view(field);
    out += ": ";
    if (f && f->type == FieldType::PersonList) {
      out += list_text(value, mapped, context.names);
    } else if (mapped && f && f->type == FieldType::Person && context.names) {
      out += context.names->display(value);
    } else if (mapped && dict) {
      out += dict->map_value(field, value);
    } else {
      out += value;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct RenderedLine {
  std::size_t indent;
  std::string text;
  std::optional<ManifestEntry> entry;
};

void flatten(const StyledParagraph& sp, int depth, const std::string& section, std::vector<RenderedLine>& out) {
  const auto own = static_cast<std::size_t>(4 * depth);
  out.push_back(RenderedLine{own, sp.text, ManifestEntry{sp.paragraph.source, sp.paragraph.line, sp.paragraph.kind,
                                                         depth, section, sp.paragraph.subject.str()}});
  for (const auto& nested : sp.nested) {
    ManifestEntry about{"", 0, ParagraphKind::NestedBook, depth + 1, section, ""};
    if (!nested.paragraphs.empty()) about.subject = nested.paragraphs.front().paragraph.subject.str();
    out.push_back(RenderedLine{own + 2, "About " + nested.display_name + ":", about});
    for (const auto& child : nested.paragraphs) flatten(child, depth + 1, section, out);
  }
}

}  // namespace

Book assemble_book(const PersonId& focal, const std::string& recipe_name, std::vector<StyledParagraph> paragraphs,
                   const AssemblyOptions& options) {
  auto section_of = [&](const std::string& source) -> std::string {
    for (const auto& [s, name] : options.section_names) {
      if (s == source) return name;
    }
    return source;
  };

  struct Unit {
    std::vector<RenderedLine> lines;
    std::size_t chars = 0;  // code points including indentation, excluding newlines
    std::string section;
  };
  std::vector<Unit> units(paragraphs.size());
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    units[i].section = section_of(paragraphs[i].paragraph.source);
    flatten(paragraphs[i], 0, units[i].section, units[i].lines);
    for (const auto& l : units[i].lines) units[i].chars += l.indent + code_points(l.text);
  }
  std::vector<bool> kept(units.size(), true);

  auto render_text = [&](std::vector<ManifestEntry>* manifest) {
    std::string text;
    const std::string* current = nullptr;
    bool first_line = true;
    auto emit = [&](std::size_t indent, const std::string& line) {
      if (!first_line) text += '\n';
      first_line = false;
      text.append(indent, ' ');
      text += line;
    };
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (!kept[i]) continue;
      if (options.section_headers && (!current || *current != units[i].section)) {
        if (current) emit(0, "");
        emit(0, units[i].section);
        current = &units[i].section;
      }
      for (const auto& line : units[i].lines) {
        emit(line.indent, line.text);
        if (manifest && line.entry) manifest->push_back(*line.entry);
      }
    }
    return text;
  };

  // Same arithmetic as estimate_tokens on the rendered text, without building it.
  auto measure = [&]() {
    if (options.estimator) return options.estimator(render_text(nullptr));
    std::size_t chars = 0;
    std::size_t lines = 0;
    const std::string* current = nullptr;
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (!kept[i]) continue;
      if (options.section_headers && (!current || *current != units[i].section)) {
        if (current) ++lines;  // blank separator
        chars += code_points(units[i].section);
        ++lines;
        current = &units[i].section;
      }
      chars += units[i].chars;
      lines += units[i].lines.size();
    }
    std::size_t total = chars + (lines ? lines - 1 : 0);
    return static_cast<int>((total + 3) / 4);
  };

  std::vector<std::size_t> droppable;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (paragraphs[i].paragraph.dated()) droppable.push_back(i);
  }
  std::stable_sort(droppable.begin(), droppable.end(), [&](std::size_t a, std::size_t b) {
    const Paragraph& pa = paragraphs[a].paragraph;
    const Paragraph& pb = paragraphs[b].paragraph;
    if (*pa.sort_date != *pb.sort_date) return *pa.sort_date < *pb.sort_date;
    return pa.line < pb.line;
  });

  Book book;
  book.focal = focal;
  book.recipe = recipe_name;
  int tokens = measure();
  std::size_t next_drop = 0;
  while (tokens > options.budget && next_drop < droppable.size()) {
    std::size_t i = droppable[next_drop++];
    kept[i] = false;
    const Paragraph& p = paragraphs[i].paragraph;
    book.dropped.push_back(ManifestEntry{p.source, p.line, p.kind, 0, units[i].section, p.subject.str()});
    tokens = measure();
  }
  if (tokens > options.budget) {
    throw Error(ErrorCode::BudgetUnsatisfiable, "undated content of '" + focal.str() + "' needs " +
                                                    std::to_string(tokens) + " tokens, budget is " +
                                                    std::to_string(options.budget));
  }

  std::string text = render_text(&book.manifest);
  book.text = std::move(text);
  book.token_estimate = options.estimator ? options.estimator(book.text) : estimate_tokens(book.text);
  return book;
}

}  // namespace bolt
