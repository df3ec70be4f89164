#include "bolt/recipe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "bolt/render.hpp"

namespace bolt {

namespace {

// ---------------------------------------------------------------------------
// Document tree

struct Node {
  enum class Kind { Scalar, Map, List };
  Kind kind = Kind::Map;
  std::string scalar;
  std::vector<std::pair<std::string, Node>> entries;
  std::vector<Node> items;
  std::size_t line = 0;
  std::size_t column = 0;
  std::size_t key_column = 0;  // of the key this node is the value of

  bool is_empty_block() const { return kind == Kind::Map && entries.empty(); }
};

struct Line {
  std::size_t number;
  std::size_t indent;
  std::string text;  // without indentation, comments and trailing blanks
};

std::vector<Line> split_lines(std::string_view doc) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= doc.size()) {
    auto nl = doc.find('\n', pos);
    std::string_view raw = doc.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++number;
    pos = nl == std::string_view::npos ? doc.size() + 1 : nl + 1;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::size_t indent = 0;
    while (indent < raw.size() && raw[indent] == ' ') ++indent;
    if (indent < raw.size() && raw[indent] == '\t') {
      throw Error(ErrorCode::SyntaxError, "tab characters are not allowed in indentation", number, indent + 1);
    }
    std::string_view body = raw.substr(indent);
    // Comments: '#' at the start or preceded by a blank.
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '#' && (i == 0 || body[i - 1] == ' ')) {
        body = body.substr(0, i);
        break;
      }
    }
    while (!body.empty() && body.back() == ' ') body.remove_suffix(1);
    if (body.empty()) continue;
    out.push_back(Line{number, indent, std::string(body)});
  }
  return out;
}

bool is_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
         c == '-';
}

bool is_list_item(const std::string& text) { return text == "-" || text.rfind("- ", 0) == 0; }

class TreeParser {
 public:
  explicit TreeParser(std::vector<Line> lines) : lines_(std::move(lines)) {}

  Node parse_document() {
    Node root;
    root.line = 1;
    root.column = 1;
    if (lines_.empty()) return root;
    if (lines_[0].indent != 0) {
      throw Error(ErrorCode::SyntaxError, "document must start at column 1", lines_[0].number, lines_[0].indent + 1);
    }
    root = parse_block(0);
    if (pos_ < lines_.size()) {
      throw Error(ErrorCode::SyntaxError, "unexpected indentation", lines_[pos_].number, lines_[pos_].indent + 1);
    }
    return root;
  }

 private:
  Node parse_block(std::size_t indent) {
    return is_list_item(lines_[pos_].text) ? parse_list(indent) : parse_map(indent);
  }

  Node parse_map(std::size_t indent) {
    Node node;
    node.kind = Node::Kind::Map;
    node.line = lines_[pos_].number;
    node.column = indent + 1;
    while (pos_ < lines_.size() && lines_[pos_].indent == indent) {
      const Line& ln = lines_[pos_];
      if (is_list_item(ln.text)) {
        throw Error(ErrorCode::SyntaxError, "list item where a key was expected", ln.number, ln.indent + 1);
      }
      std::size_t colon = ln.text.find(':');
      if (colon == std::string::npos || colon == 0) {
        throw Error(ErrorCode::SyntaxError, "expected 'key: value'", ln.number, ln.indent + 1);
      }
      std::string key = ln.text.substr(0, colon);
      for (std::size_t i = 0; i < key.size(); ++i) {
        if (!is_key_char(key[i])) {
          throw Error(ErrorCode::SyntaxError, "invalid character in key '" + key + "'", ln.number, ln.indent + 1 + i);
        }
      }
      if (colon + 1 < ln.text.size() && ln.text[colon + 1] != ' ') {
        throw Error(ErrorCode::SyntaxError, "expected a blank after ':'", ln.number, ln.indent + colon + 2);
      }
      for (const auto& [k, _] : node.entries) {
        if (k == key) throw Error(ErrorCode::SyntaxError, "duplicate key '" + key + "'", ln.number, ln.indent + 1);
      }
      std::string value = colon + 1 < ln.text.size() ? ln.text.substr(colon + 2) : std::string();
      while (!value.empty() && value.front() == ' ') value.erase(value.begin());
      ++pos_;
      Node child;
      child.line = ln.number;
      child.column = ln.indent + 1;
      if (!value.empty()) {
        child.kind = Node::Kind::Scalar;
        child.scalar = value;
        child.column = ln.indent + colon + 3;
      } else if (pos_ < lines_.size() && lines_[pos_].indent > indent) {
        child = parse_block(lines_[pos_].indent);
        child.line = ln.number;
        child.column = ln.indent + 1;
      }
      child.key_column = ln.indent + 1;
      node.entries.emplace_back(std::move(key), std::move(child));
    }
    if (pos_ < lines_.size() && lines_[pos_].indent > indent) {
      throw Error(ErrorCode::SyntaxError, "unexpected indentation", lines_[pos_].number, lines_[pos_].indent + 1);
    }
    return node;
  }

  Node parse_list(std::size_t indent) {
    Node node;
    node.kind = Node::Kind::List;
    node.line = lines_[pos_].number;
    node.column = indent + 1;
    while (pos_ < lines_.size() && lines_[pos_].indent == indent) {
      Line& ln = lines_[pos_];
      if (!is_list_item(ln.text)) {
        throw Error(ErrorCode::SyntaxError, "expected a list item", ln.number, ln.indent + 1);
      }
      if (ln.text == "-") {
        ++pos_;
        if (pos_ < lines_.size() && lines_[pos_].indent > indent) {
          node.items.push_back(parse_block(lines_[pos_].indent));
        } else {
          node.items.emplace_back();
        }
        continue;
      }
      std::string content = ln.text.substr(2);
      std::size_t colon = content.find(':');
      bool map_item = colon != std::string::npos && colon > 0 &&
                      std::all_of(content.begin(), content.begin() + static_cast<std::ptrdiff_t>(colon), is_key_char) &&
                      (colon + 1 == content.size() || content[colon + 1] == ' ');
      if (map_item) {
        // Re-read the item as a map whose first key sits after "- ".
        ln.text = content;
        ln.indent = indent + 2;
        node.items.push_back(parse_map(indent + 2));
      } else {
        Node scalar;
        scalar.kind = Node::Kind::Scalar;
        scalar.scalar = content;
        scalar.line = ln.number;
        scalar.column = indent + 3;
        node.items.push_back(std::move(scalar));
        ++pos_;
      }
    }
    if (pos_ < lines_.size() && lines_[pos_].indent > indent) {
      throw Error(ErrorCode::SyntaxError, "unexpected indentation", lines_[pos_].number, lines_[pos_].indent + 1);
    }
    return node;
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Interpretation

[[noreturn]] void invalid(const Node& node, const std::string& message) {
  throw Error(ErrorCode::InvalidValue, message, node.line, node.column);
}

const std::string& scalar(const Node& node, const std::string& path) {
  if (node.kind != Node::Kind::Scalar) invalid(node, "'" + path + "' expects a value");
  return node.scalar;
}

const Node& map_node(const Node& node, const std::string& path) {
  if (node.kind != Node::Kind::Map) invalid(node, "'" + path + "' expects a block of keys");
  return node;
}

std::vector<const Node*> list_items(const Node& node, const std::string& path) {
  std::vector<const Node*> out;
  if (node.is_empty_block()) return out;
  if (node.kind != Node::Kind::List) invalid(node, "'" + path + "' expects a list");
  for (const auto& item : node.items) out.push_back(&item);
  return out;
}

void check_keys(const Node& node, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, child] : node.entries) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      std::string full = path.empty() ? key : path + "." + key;
      throw Error(ErrorCode::UnknownKey, "unknown key '" + full + "'", child.line, child.key_column);
    }
  }
}

const Node* get(const Node& node, std::string_view key) {
  for (const auto& [k, child] : node.entries) {
    if (k == key) return &child;
  }
  return nullptr;
}

int parse_int(const Node& node, const std::string& path) {
  const std::string& s = scalar(node, path);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) invalid(node, "'" + path + "' expects an integer, got '" + s + "'");
  return v;
}

double parse_double(const Node& node, const std::string& path) {
  const std::string& s = scalar(node, path);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) {
    invalid(node, "'" + path + "' expects a non-negative number, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const Node& node, const std::string& path) {
  const std::string& s = scalar(node, path);
  if (s == "on" || s == "true" || s == "yes") return true;
  if (s == "off" || s == "false" || s == "no") return false;
  invalid(node, "'" + path + "' expects on/off, got '" + s + "'");
}

DateRange parse_range_node(const Node& node, const std::string& path) {
  auto r = parse_range(scalar(node, path));
  if (!r) invalid(node, "'" + path + "' expects YYYY-MM-DD..YYYY-MM-DD, got '" + node.scalar + "'");
  return *r;
}

FilterSpec parse_filter(const Node& node, const std::string& path) {
  const std::string& s = scalar(node, path);
  FilterSpec f;
  if (s == "all") return f;
  if (s.rfind("last ", 0) == 0) {
    int n = 0;
    std::string_view num(s);
    num.remove_prefix(5);
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
    if (ec == std::errc{} && ptr == num.data() + num.size()) {
      if (n < 1) invalid(node, "'" + path + "': last_n must be at least 1");
      f.last_n = n;
      return f;
    }
  }
  invalid(node, "'" + path + "' expects 'all' or 'last N', got '" + s + "'");
}

std::vector<std::string> parse_name_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

StyleSpec parse_style(const Node& node, const std::string& path) {
  const std::string& s = scalar(node, path);
  StyleSpec spec;
  if (s == "raw") return spec;
  auto space = s.find(' ');
  std::string head = s.substr(0, space);
  std::string arg = space == std::string::npos ? std::string() : s.substr(space + 1);
  if (head == "dictionary") {
    spec.kind = StyleKind::Dictionary;
    spec.dictionary = arg;
    return spec;
  }
  if (head == "template" && !arg.empty()) {
    spec.kind = StyleKind::Template;
    spec.dictionary = arg;
    return spec;
  }
  invalid(node, "'" + path + "' expects raw, dictionary [name] or template <name>, got '" + s + "'");
}

SourceSelection parse_selection(const Node& node, const std::string& path) {
  map_node(node, path);
  check_keys(node, path, {"source", "score", "file", "fields", "window", "preprocess", "filter", "salary_jump",
                          "vacation_days_min", "sick_days_min"});
  SourceSelection sel;
  const Node* source = get(node, "source");
  const Node* score = get(node, "score");
  if ((source != nullptr) == (score != nullptr)) invalid(node, "'" + path + "' needs exactly one of source or score");
  if (score) {
    sel.source = scalar(*score, path + ".score");
    const Node* file = get(node, "file");
    if (!file) invalid(node, "'" + path + "': score items need a file");
    sel.score_file = scalar(*file, path + ".file");
    for (auto key : {"fields", "window", "preprocess", "filter", "salary_jump", "vacation_days_min", "sick_days_min"}) {
      if (const Node* n = get(node, key)) invalid(*n, "'" + path + "." + key + "' is not valid on score items");
    }
    return sel;
  }
  sel.source = scalar(*source, path + ".source");
  if (const Node* n = get(node, "file")) invalid(*n, "'" + path + ".file' is only valid on score items");
  if (const Node* n = get(node, "fields")) sel.fields = parse_name_list(scalar(*n, path + ".fields"));
  if (const Node* n = get(node, "window")) sel.window = parse_range_node(*n, path + ".window");
  if (const Node* n = get(node, "preprocess")) {
    const std::string& p = scalar(*n, path + ".preprocess");
    if (p == "changes_only") {
      sel.changes_only = true;
    } else if (p != "none") {
      invalid(*n, "'" + path + ".preprocess' expects changes_only or none");
    }
  }
  if (const Node* n = get(node, "filter")) sel.filter = parse_filter(*n, path + ".filter");
  if (const Node* n = get(node, "salary_jump")) sel.thresholds.salary_rel_jump = parse_double(*n, path + ".salary_jump");
  if (const Node* n = get(node, "vacation_days_min")) {
    sel.thresholds.vacation_days_min = parse_double(*n, path + ".vacation_days_min");
  }
  if (const Node* n = get(node, "sick_days_min")) sel.thresholds.sick_days_min = parse_double(*n, path + ".sick_days_min");
  return sel;
}

WhoExpansion parse_who(const Node& node, const std::string& path) {
  map_node(node, path);
  check_keys(node, path, {"via", "mode", "max_depth"});
  WhoExpansion who;
  const Node* via = get(node, "via");
  if (!via) invalid(node, "'" + path + "' needs a via: source.link_field");
  const std::string& v = scalar(*via, path + ".via");
  auto dot = v.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == v.size()) {
    invalid(*via, "'" + path + ".via' expects source.link_field, got '" + v + "'");
  }
  who.source = v.substr(0, dot);
  who.link_field = v.substr(dot + 1);
  if (const Node* m = get(node, "mode")) {
    const std::string& mode = scalar(*m, path + ".mode");
    if (mode == "ids_only") {
      who.mode = WhoMode::IdsOnly;
    } else if (mode.rfind("nested ", 0) == 0 && mode.size() > 7) {
      who.mode = WhoMode::Nested;
      who.nested_recipe = mode.substr(7);
    } else {
      invalid(*m, "'" + path + ".mode' expects ids_only or nested <recipe>, got '" + mode + "'");
    }
  }
  if (const Node* d = get(node, "max_depth")) {
    who.max_depth = parse_int(*d, path + ".max_depth");
    if (*who.max_depth < 1) invalid(*d, "'" + path + ".max_depth' must be at least 1");
  }
  return who;
}

HowSpec parse_how(const Node& node, const std::string& path) {
  map_node(node, path);
  check_keys(node, path, {"filter", "window", "order", "style", "section_headers"});
  HowSpec how;
  if (const Node* n = get(node, "filter")) {
    FilterSpec f = parse_filter(*n, path + ".filter");
    how.filter.last_n = f.last_n;
  }
  if (const Node* n = get(node, "window")) how.filter.window = parse_range_node(*n, path + ".window");
  if (const Node* n = get(node, "order")) {
    const std::string& o = scalar(*n, path + ".order");
    if (o == "chronological") {
      how.order = Order::Chronological;
    } else if (o == "by_source_then_chronological") {
      how.order = Order::BySourceThenChronological;
    } else {
      invalid(*n, "'" + path + ".order' expects chronological or by_source_then_chronological");
    }
  }
  if (const Node* n = get(node, "style")) {
    if (n->kind == Node::Kind::Scalar) {
      how.style.fallback = parse_style(*n, path + ".style");
    } else {
      map_node(*n, path + ".style");
      for (const auto& [key, child] : n->entries) {
        StyleSpec spec = parse_style(child, path + ".style." + key);
        if (key == "default") {
          how.style.fallback = spec;
        } else {
          how.style.per_source.emplace_back(key, spec);
        }
      }
    }
  }
  if (const Node* n = get(node, "section_headers")) how.section_headers = parse_bool(*n, path + ".section_headers");
  return how;
}

Recipe parse_body(const Node& node, const std::string& path, bool top_level) {
  map_node(node, path);
  if (top_level) {
    check_keys(node, path, {"recipe_version", "name", "budget", "what", "who", "how", "recipes"});
  } else {
    check_keys(node, path, {"budget", "what", "who", "how"});
  }
  auto child_path = [&](const char* key) { return path.empty() ? std::string(key) : path + "." + key; };
  Recipe r;
  if (top_level) {
    const Node* version = get(node, "recipe_version");
    if (!version) throw Error(ErrorCode::InvalidValue, "missing recipe_version header", 1, 1);
    r.version = parse_int(*version, "recipe_version");
    if (r.version != kRecipeVersion) invalid(*version, "unsupported recipe_version " + std::to_string(r.version));
    const Node* name = get(node, "name");
    if (!name) throw Error(ErrorCode::InvalidValue, "missing recipe name", node.line, 1);
    r.name = scalar(*name, "name");
  }
  if (const Node* b = get(node, "budget")) {
    r.budget = parse_int(*b, child_path("budget"));
    if (r.budget < 1) invalid(*b, "budget must be positive");
  }
  if (const Node* w = get(node, "what")) {
    std::size_t i = 0;
    for (const Node* item : list_items(*w, child_path("what"))) {
      r.what.push_back(parse_selection(*item, child_path("what") + "[" + std::to_string(i++) + "]"));
    }
  }
  if (const Node* w = get(node, "who")) {
    std::size_t i = 0;
    for (const Node* item : list_items(*w, child_path("who"))) {
      r.who.push_back(parse_who(*item, child_path("who") + "[" + std::to_string(i++) + "]"));
    }
  }
  if (const Node* h = get(node, "how")) {
    if (!h->is_empty_block()) r.how = parse_how(*h, child_path("how"));
  }
  if (top_level) {
    if (const Node* rs = get(node, "recipes")) {
      map_node(*rs, "recipes");
      for (const auto& [key, child] : rs->entries) {
        if (key == r.name) invalid(child, "sub-recipe '" + key + "' shadows the top-level recipe");
        Recipe sub = child.is_empty_block() ? Recipe{} : parse_body(child, "recipes." + key, false);
        sub.name = key;
        r.recipes.push_back(std::move(sub));
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Rendering

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string style_text(const StyleSpec& s) {
  switch (s.kind) {
    case StyleKind::Raw: return "raw";
    case StyleKind::Dictionary: return s.dictionary.empty() ? "dictionary" : "dictionary " + s.dictionary;
    case StyleKind::Template: return "template " + s.dictionary;
  }
  return "raw";
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

void render_body(const Recipe& r, std::string& out, const std::string& ind, bool top_level) {
  auto line = [&](const std::string& text) {
    out += ind;
    out += text;
    out += '\n';
  };
  if (top_level) {
    line("recipe_version: " + std::to_string(r.version));
    line("name: " + r.name);
  }
  line("budget: " + std::to_string(r.budget));
  if (!r.what.empty()) {
    line("what:");
    const ChangeThresholds defaults;
    for (const auto& s : r.what) {
      if (s.is_score()) {
        line("  - score: " + s.source);
        line("    file: " + s.score_file);
        continue;
      }
      line("  - source: " + s.source);
      if (!s.fields.empty()) line("    fields: " + join(s.fields, ", "));
      if (s.window) line("    window: " + format_range(*s.window));
      if (s.changes_only) line("    preprocess: changes_only");
      if (s.filter) line("    filter: " + (s.filter->last_n ? "last " + std::to_string(*s.filter->last_n) : std::string("all")));
      if (s.thresholds.salary_rel_jump != defaults.salary_rel_jump) {
        line("    salary_jump: " + format_number(s.thresholds.salary_rel_jump));
      }
      if (s.thresholds.vacation_days_min != defaults.vacation_days_min) {
        line("    vacation_days_min: " + format_number(s.thresholds.vacation_days_min));
      }
      if (s.thresholds.sick_days_min != defaults.sick_days_min) {
        line("    sick_days_min: " + format_number(s.thresholds.sick_days_min));
      }
    }
  }
  if (!r.who.empty()) {
    line("who:");
    for (const auto& w : r.who) {
      line("  - via: " + w.source + "." + w.link_field);
      line(std::string("    mode: ") + (w.mode == WhoMode::IdsOnly ? "ids_only" : "nested " + w.nested_recipe));
      if (w.max_depth) line("    max_depth: " + std::to_string(*w.max_depth));
    }
  }
  line("how:");
  if (r.how.filter.last_n) line("  filter: last " + std::to_string(*r.how.filter.last_n));
  if (r.how.filter.window) line("  window: " + format_range(*r.how.filter.window));
  line(std::string("  order: ") +
       (r.how.order == Order::Chronological ? "chronological" : "by_source_then_chronological"));
  if (r.how.style.fallback || !r.how.style.per_source.empty()) {
    line("  style:");
    if (r.how.style.fallback) line("    default: " + style_text(*r.how.style.fallback));
    for (const auto& [src, spec] : r.how.style.per_source) line("    " + src + ": " + style_text(spec));
  }
  line(std::string("  section_headers: ") + (r.how.section_headers ? "on" : "off"));
}

}  // namespace

// ---------------------------------------------------------------------------

const StyleSpec* StyleMap::find(std::string_view source) const noexcept {
  for (const auto& [s, spec] : per_source) {
    if (s == source) return &spec;
  }
  return nullptr;
}

StyleSpec StyleMap::resolve(std::string_view source) const noexcept {
  if (const StyleSpec* s = find(source)) return *s;
  return fallback.value_or(StyleSpec{});
}

StyleMap StyleMap::merge(const StyleMap& base, const StyleMap& overrides) {
  StyleMap out = overrides;
  if (!out.fallback) out.fallback = base.fallback;
  for (const auto& [src, spec] : base.per_source) {
    if (!out.find(src)) out.per_source.emplace_back(src, spec);
  }
  return out;
}

const SourceSelection* Recipe::selection(std::string_view source) const noexcept {
  for (const auto& s : what) {
    if (s.source == source) return &s;
  }
  return nullptr;
}

std::size_t Recipe::source_position(std::string_view source) const noexcept {
  for (std::size_t i = 0; i < what.size(); ++i) {
    if (what[i].source == source) return i;
  }
  return what.size();
}

const Recipe* Recipe::find_recipe(std::string_view recipe_name) const noexcept {
  if (name == recipe_name) return this;
  for (const auto& r : recipes) {
    if (r.name == recipe_name) return &r;
  }
  return nullptr;
}

std::string format_range(const DateRange& range) {
  return (range.from ? format_iso(*range.from) : std::string()) + ".." + (range.to ? format_iso(*range.to) : std::string());
}

std::optional<DateRange> parse_range(std::string_view text) noexcept {
  auto dots = text.find("..");
  if (dots == std::string_view::npos) return std::nullopt;
  DateRange r;
  auto from = text.substr(0, dots);
  auto to = text.substr(dots + 2);
  if (!from.empty()) {
    r.from = parse_iso_date(from);
    if (!r.from) return std::nullopt;
  }
  if (!to.empty()) {
    r.to = parse_iso_date(to);
    if (!r.to) return std::nullopt;
  }
  if (r.from && r.to && *r.to < *r.from) return std::nullopt;
  return r;
}

Recipe parse_recipe(std::string_view text) {
  TreeParser parser(split_lines(text));
  Node root = parser.parse_document();
  return parse_body(root, "", true);
}

Recipe load_recipe(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open recipe " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_recipe(ss.str());
}

std::string render_recipe(const Recipe& recipe) {
  std::string out;
  render_body(recipe, out, "", true);
  if (!recipe.recipes.empty()) {
    out += "recipes:\n";
    for (const auto& sub : recipe.recipes) {
      out += "  " + sub.name + ":\n";
      render_body(sub, out, "    ", false);
    }
  }
  return out;
}

int effective_max_depth(const WhoExpansion& who, const ValidateOptions& options) noexcept {
  if (who.max_depth) return *who.max_depth;
  if (options.default_depth_cap) return *options.default_depth_cap;
  return std::numeric_limits<int>::max();
}

std::vector<Error> validate_recipe(const Recipe& recipe, const SchemaRegistry& schemas,
                                   const DictionaryRegistry& dictionaries, const ValidateOptions& options) {
  std::vector<Error> errors;
  auto fail = [&](ErrorCode code, const std::string& where, const std::string& msg) {
    errors.emplace_back(code, "recipe '" + where + "': " + msg);
  };

  auto check_style = [&](const std::string& where, const std::string& source, const StyleSpec& spec) {
    if (spec.kind == StyleKind::Raw) return;
    if (spec.kind == StyleKind::Dictionary && spec.dictionary.empty()) return;
    const ParsingDictionary* d = dictionaries.find(spec.dictionary);
    if (!d) {
      fail(ErrorCode::UnknownDictionary, where, "style for '" + source + "' references unknown dictionary '" + spec.dictionary + "'");
    } else if (spec.kind == StyleKind::Template && !d->sentence) {
      fail(ErrorCode::UnknownDictionary, where, "dictionary '" + spec.dictionary + "' has no sentence template");
    }
  };

  auto check_one = [&](const Recipe& r) {
    std::set<std::string> seen;
    for (const auto& sel : r.what) {
      if (!seen.insert(sel.source).second) {
        fail(ErrorCode::InvalidValue, r.name, "source '" + sel.source + "' selected more than once");
      }
      if (sel.is_score()) continue;
      const SourceSchema* schema = schemas.find(sel.source);
      if (!schema) {
        fail(ErrorCode::UnknownSource, r.name, "unknown source '" + sel.source + "'");
        continue;
      }
      for (const auto& f : sel.fields) {
        if (!schema->field(f)) fail(ErrorCode::UnknownField, r.name, "source '" + sel.source + "' has no field '" + f + "'");
      }
      if (sel.changes_only) {
        bool ok = (schema->role == SourceRole::MonthlyEvents && !schema->changes.contract.empty()) ||
                  (schema->role == SourceRole::YearlyAttributes && !schema->changes.level.empty());
        if (!ok) {
          fail(ErrorCode::InvalidValue, r.name,
               "changes_only needs a monthly source with a contract field or a yearly source with a level field ('" +
                   sel.source + "')");
        }
      }
    }
    for (const auto& w : r.who) {
      const SourceSchema* schema = schemas.find(w.source);
      if (!schema) {
        fail(ErrorCode::UnknownSource, r.name, "who expansion via unknown source '" + w.source + "'");
        continue;
      }
      if (!schema->is_link_field(w.link_field)) {
        fail(ErrorCode::UnknownField, r.name, "'" + w.link_field + "' is not a link field of '" + w.source + "'");
      }
      if (!r.selection(w.source)) {
        fail(ErrorCode::InvalidValue, r.name, "who expansion via '" + w.source + "' but the source is not in what");
      }
      if (w.mode == WhoMode::Nested && !recipe.find_recipe(w.nested_recipe)) {
        fail(ErrorCode::UnknownRecipe, r.name, "nested recipe '" + w.nested_recipe + "' does not exist");
      }
    }
    if (r.how.style.fallback) check_style(r.name, "default", *r.how.style.fallback);
    for (const auto& [src, spec] : r.how.style.per_source) check_style(r.name, src, spec);
  };

  check_one(recipe);
  for (const auto& sub : recipe.recipes) check_one(sub);

  // Unbounded recursion: a reachable cycle through expansions with no depth bound.
  if (!options.default_depth_cap) {
    std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
    std::function<void(const Recipe&)> visit = [&](const Recipe& r) {
      state[r.name] = 1;
      for (const auto& w : r.who) {
        if (w.mode != WhoMode::Nested || w.max_depth) continue;
        const Recipe* next = recipe.find_recipe(w.nested_recipe);
        if (!next) continue;
        if (state[next->name] == 1) {
          fail(ErrorCode::UnboundedRecursion, r.name,
               "nested recipe '" + next->name + "' recurses without a max_depth bound");
        } else if (state[next->name] == 0) {
          visit(*next);
        }
      }
      state[r.name] = 2;
    };
    visit(recipe);
  }
  return errors;
}

}  // namespace bolt
