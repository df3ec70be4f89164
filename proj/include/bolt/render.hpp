#pragma once

// The "how" of a book: filtering, ordering, styling and final assembly
// under a token budget.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bolt/extract.hpp"
#include "bolt/recipe.hpp"
#include "bolt/registry_model.hpp"

namespace bolt {

/// Display names for person ids. Ids without an entry render as themselves.
class NameMap {
 public:
  NameMap() = default;
  explicit NameMap(std::unordered_map<std::string, std::string> names);
  static NameMap load(const std::string& path, char delimiter = ',');

  std::string_view display(std::string_view id) const noexcept;
  /// Inverse lookup; unknown names are taken to be ids.
  std::string_view id_for(std::string_view name) const noexcept;
  bool empty() const noexcept { return names_.empty(); }

 private:
  std::unordered_map<std::string, std::string> names_;
  std::unordered_map<std::string, std::string> ids_;
};

struct ValueMap {
  std::vector<std::pair<std::string, std::string>> codes;
  std::optional<std::string> fallback;

  const std::string* find(std::string_view code) const noexcept;
  const std::string* find_code(std::string_view display) const noexcept;
};

class ParsingDictionary;

/// Inputs a template needs to turn payload values into prose and back.
struct SlotContext {
  const SourceSchema* schema = nullptr;
  const ParsingDictionary* dictionary = nullptr;
  const NameMap* names = nullptr;
};

/// A sentence pattern with named slots. `{field}` is a slot, `{subject}`
/// names the paragraph's person, `[...]` is an optional segment rendered
/// only when every slot in it has a value, and `\` escapes the next
/// character. Slots render by field type: dates in long form, person ids as
/// display names, person lists as "A, B and C", coded values through the
/// dictionary's value maps. The pattern doubles as the inverse grammar.
class SentenceTemplate {
 public:
  static SentenceTemplate compile(std::string pattern, std::optional<std::string> ongoing_pattern = std::nullopt);

  const std::string& pattern() const noexcept { return pattern_; }
  const std::optional<std::string>& ongoing_pattern() const noexcept { return ongoing_; }
  /// Slot names of the main pattern, in order.
  std::vector<std::string> slots() const;
  bool has_slot(std::string_view name) const noexcept;

  std::string render(const Paragraph& paragraph, const SlotContext& context) const;

  /// Recovers raw payload values (file encoding) for every slot of the
  /// matching pattern. Slots of omitted optional segments come back empty;
  /// the ongoing variant reports an empty end. `subject` holds the person id.
  std::optional<Payload> invert(std::string_view sentence, const SlotContext& context) const;

  struct Segment {
    enum class Kind { Literal, Slot, Optional };
    Kind kind = Kind::Literal;
    std::string text;  // literal text or slot name
    std::vector<Segment> children;
  };

 private:
  std::string pattern_;
  std::optional<std::string> ongoing_;
  std::vector<Segment> main_;
  std::vector<Segment> ongoing_segments_;
};

class ParsingDictionary {
 public:
  std::string name;
  std::string source;
  std::string display_name;
  std::vector<std::pair<std::string, std::string>> field_names;
  std::vector<std::pair<std::string, ValueMap>> value_maps;
  std::optional<SentenceTemplate> sentence;

  /// Display name of a field, or the raw name when unmapped.
  std::string_view field_name(std::string_view field) const noexcept;
  const ValueMap* value_map(std::string_view field) const noexcept;
  /// Maps a coded value; values of unmapped fields pass through. Throws
  /// UnmappedCode when the field has a value map without the code or a fallback.
  std::string map_value(std::string_view field, std::string_view code) const;

  /// Throws TemplateError for empty display names or, when a template is
  /// present, value maps on template slots that are not one-to-one.
  void validate() const;
};

class DictionaryRegistry {
 public:
  DictionaryRegistry() = default;
  explicit DictionaryRegistry(std::vector<ParsingDictionary> dictionaries);
  static DictionaryRegistry from_json(std::string_view text);
  static DictionaryRegistry load(const std::string& path);

  const ParsingDictionary* find(std::string_view name) const noexcept;
  /// The dictionary named after the source, else the first one bound to it.
  const ParsingDictionary* for_source(std::string_view source) const noexcept;
  const std::vector<ParsingDictionary>& dictionaries() const noexcept { return dictionaries_; }

 private:
  std::vector<ParsingDictionary> dictionaries_;
};

// ---------------------------------------------------------------------------
// Filter and order

/// last_n keeps, per source, the n dated paragraphs with the greatest
/// (sort_date, line); undated ones are never cut. The window keeps
/// overlapping or undated paragraphs.
/// The window applies first. Relative order is preserved.
std::vector<Paragraph> apply_filter(std::vector<Paragraph> paragraphs, const FilterSpec& filter);

/// Applies each source's override when present, the global filter otherwise.
std::vector<Paragraph> apply_recipe_filters(std::vector<Paragraph> paragraphs, const Recipe& recipe);

/// Stable ordering. Undated paragraphs come first (attributes by source
/// position, then summary scores by label). Chronological orders dated
/// paragraphs by (sort_date, source position, line); by-source orders them
/// by (source position, sort_date, line).
std::vector<Paragraph> order_paragraphs(std::vector<Paragraph> paragraphs, Order order,
                                        std::span<const std::string> source_order);

// ---------------------------------------------------------------------------
// Style

struct StyleContext {
  const SchemaRegistry* schemas = nullptr;
  const DictionaryRegistry* dictionaries = nullptr;
  const NameMap* names = nullptr;
};

/// Raw: "field: value" pairs in payload order, person lists in brackets.
/// Dictionary: display names and mapped codes; empty optional fields are
/// left out and person lists are bare display names. Template: the
/// dictionary's sentence.
std::string style_paragraph(const Paragraph& paragraph, const StyleSpec& style, const StyleContext& context);

/// "A", "A and B", "A, B and C".
std::string join_names(const std::vector<std::string>& names);
std::vector<std::string> split_names(std::string_view text);

/// ceil(code points / 4): a tokenizer-free approximation of subword tokens.
int estimate_tokens(std::string_view text) noexcept;

using TokenEstimator = std::function<int(std::string_view)>;

// ---------------------------------------------------------------------------
// Assembly

struct StyledParagraph;

struct StyledNestedBook {
  std::string display_name;
  std::vector<StyledParagraph> paragraphs;
};

struct StyledParagraph {
  Paragraph paragraph;
  std::string text;
  std::vector<StyledNestedBook> nested;
};

struct ManifestEntry {
  std::string source;
  std::uint32_t line = 0;
  ParagraphKind kind = ParagraphKind::Attribute;
  int depth = 0;
  std::string section;
  std::string subject;

  bool operator==(const ManifestEntry&) const = default;
};

struct Book {
  PersonId focal;
  std::string recipe;
  int recipe_version = kRecipeVersion;
  std::string text;
  int token_estimate = 0;
  /// One entry per rendered paragraph line and "About" line, in text order.
  std::vector<ManifestEntry> manifest;
  /// Top-level paragraphs removed to meet the budget, oldest first.
  std::vector<ManifestEntry> dropped;
};

struct AssemblyOptions {
  bool section_headers = false;
  int budget = kDefaultBudget;
  /// Header text per source; sources without an entry use their name.
  std::vector<std::pair<std::string, std::string>> section_names;
  /// Replaces estimate_tokens; budget checks then re-render the full text.
  TokenEstimator estimator;
};

/// One line per paragraph. With section headers, sections are separated by
/// a blank line and start with the section name. Nested books follow their
/// parent line, "About <name>:" indented two spaces and their paragraphs
/// four. Over budget, dated top-level paragraphs are dropped oldest first;
/// throws BudgetUnsatisfiable when undated content alone does not fit.
Book assemble_book(const PersonId& focal, const std::string& recipe_name, std::vector<StyledParagraph> paragraphs,
                   const AssemblyOptions& options);

}  // namespace bolt
