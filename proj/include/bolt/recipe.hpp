#pragma once

// Recipe documents: the what / who / how of a book.
//
// A recipe is an indentation-structured text document (two-space indent,
// '#' comments). Scalars are `key: value`, blocks are `key:` followed by
// more-indented lines, and list items start with `- `. Example:
//
//   recipe_version: 1
//   name: book9
//   budget: 1000
//   what:
//     - source: demographics
//     - source: household
//       filter: last 5
//     - source: employment
//       preprocess: changes_only
//   who:
//     - via: household.hh_person_ids
//       mode: nested housemate
//       max_depth: 1
//   how:
//     order: chronological
//     style:
//       default: dictionary
//       household: template household
//   recipes:
//     housemate:
//       what:
//         - source: demographics
//           fields: gbageslacht, gbageboortejaar
//
// See README.md for the full key reference.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bolt/error.hpp"
#include "bolt/registry_model.hpp"
#include "bolt/thresholds.hpp"

namespace bolt {

class DictionaryRegistry;

struct FilterSpec {
  std::optional<int> last_n;
  std::optional<DateRange> window;

  bool empty() const noexcept { return !last_n && !window; }
  bool operator==(const FilterSpec&) const = default;
};

struct SourceSelection {
  std::string source;
  /// Non-empty for score items: `source` is then the score label and this
  /// is the scores table path, relative to the data directory.
  std::string score_file;
  std::optional<DateRange> window;
  bool changes_only = false;
  /// Replaces the global filter for this source when set (an empty
  /// FilterSpec means "all").
  std::optional<FilterSpec> filter;
  /// Field projection; empty keeps every field.
  std::vector<std::string> fields;
  ChangeThresholds thresholds;

  bool is_score() const noexcept { return !score_file.empty(); }
  bool operator==(const SourceSelection&) const = default;
};

enum class WhoMode { IdsOnly, Nested };

struct WhoExpansion {
  std::string source;
  std::string link_field;
  WhoMode mode = WhoMode::IdsOnly;
  std::string nested_recipe;
  std::optional<int> max_depth;

  bool operator==(const WhoExpansion&) const = default;
};

enum class StyleKind { Raw, Dictionary, Template };

struct StyleSpec {
  StyleKind kind = StyleKind::Raw;
  /// Dictionary name; for `dictionary` without a name the dictionary of the
  /// paragraph's source is used.
  std::string dictionary;

  bool operator==(const StyleSpec&) const = default;
};

/// Per-source styles. Only explicitly set entries are stored so nested
/// recipes can inherit the rest from their parent.
struct StyleMap {
  std::vector<std::pair<std::string, StyleSpec>> per_source;
  std::optional<StyleSpec> fallback;

  const StyleSpec* find(std::string_view source) const noexcept;
  StyleSpec resolve(std::string_view source) const noexcept;
  /// `overrides` wins; remaining entries come from `base`.
  static StyleMap merge(const StyleMap& base, const StyleMap& overrides);

  bool operator==(const StyleMap&) const = default;
};

enum class Order { Chronological, BySourceThenChronological };

struct HowSpec {
  FilterSpec filter;
  Order order = Order::Chronological;
  StyleMap style;
  bool section_headers = false;

  bool operator==(const HowSpec&) const = default;
};

inline constexpr int kDefaultBudget = 1000;
inline constexpr int kRecipeVersion = 1;

struct Recipe {
  int version = kRecipeVersion;
  std::string name;
  std::vector<SourceSelection> what;
  std::vector<WhoExpansion> who;
  HowSpec how;
  int budget = kDefaultBudget;
  /// Named sub-recipes usable by nested expansions (top level only).
  std::vector<Recipe> recipes;

  const SourceSelection* selection(std::string_view source) const noexcept;
  /// Position of a source in `what`, or what.size() if absent.
  std::size_t source_position(std::string_view source) const noexcept;
  /// This recipe or one of its sub-recipes.
  const Recipe* find_recipe(std::string_view name) const noexcept;

  bool operator==(const Recipe&) const = default;
};

Recipe parse_recipe(std::string_view text);
Recipe load_recipe(const std::string& path);
/// Canonical text form; parse_recipe(render_recipe(r)) == r.
std::string render_recipe(const Recipe& recipe);

struct ValidateOptions {
  /// Depth used when an expansion has no max_depth. nullopt disables the
  /// cap, making unbounded self-reference an error.
  std::optional<int> default_depth_cap = 1;
};

/// Empty result means the recipe is valid.
std::vector<Error> validate_recipe(const Recipe& recipe, const SchemaRegistry& schemas,
                                   const DictionaryRegistry& dictionaries, const ValidateOptions& options = {});

/// Effective depth bound of an expansion.
int effective_max_depth(const WhoExpansion& who, const ValidateOptions& options = {}) noexcept;

std::string format_range(const DateRange& range);
std::optional<DateRange> parse_range(std::string_view text) noexcept;

}  // namespace bolt
