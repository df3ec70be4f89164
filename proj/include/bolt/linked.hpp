#pragma once

// The "who": linked persons reached through link fields, either listed by id
// or expanded into nested books, with depth and cycle guards.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bolt/extract.hpp"
#include "bolt/ingest.hpp"
#include "bolt/recipe.hpp"

namespace bolt {

struct ExpandedParagraph;

struct LinkedPerson {
  PersonId id;
  std::string link_field;
  /// False for ids_only expansions and for downgraded ones.
  bool nested = false;
  /// Downgraded because the person was already on the expansion path.
  bool cycle_cut = false;
  /// Nested recipe that produced `book` (empty when not nested).
  std::string recipe;
  /// Nested paragraphs, each with nesting_depth = parent depth + 1.
  std::vector<ExpandedParagraph> book;
};

struct ExpandedParagraph {
  Paragraph paragraph;
  std::vector<LinkedPerson> linked;
};

using ExpansionResult = std::vector<ExpandedParagraph>;

/// Produces the filtered, ordered paragraphs of `person` under a nested
/// recipe, stamped with `depth`.
using NestedExtractor = std::function<std::vector<Paragraph>(const PersonId& person, const Recipe& recipe, int depth)>;

struct WhoContext {
  /// Top-level recipe; nested recipe names resolve against it.
  const Recipe* root = nullptr;
  NestedExtractor extract;
  ValidateOptions options;
};

/// Expands `paragraphs` (all at nesting depth `depth`) of `focal`. Linked
/// persons are read from each expansion's link field in payload order. A
/// nested expansion recurses only while the depth stays within every
/// max_depth on the way down; persons on `path`, or the focal person
/// itself, are listed ids_only instead.
ExpansionResult resolve_who(const WhoContext& context, const PersonId& focal, std::vector<Paragraph> paragraphs,
                            std::span<const WhoExpansion> who, const std::vector<PersonId>& path, int depth = 0,
                            int depth_limit = -1);

/// Greatest nesting_depth in the result (0 when nothing is nested).
int max_nesting_depth(const ExpansionResult& result) noexcept;

}  // namespace bolt
