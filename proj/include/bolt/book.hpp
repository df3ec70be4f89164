#pragma once

// One book end to end: extract, attach scores, filter, order, expand the
// who, style and assemble.

#include <map>
#include <string>
#include <vector>

#include "bolt/extract.hpp"
#include "bolt/ingest.hpp"
#include "bolt/linked.hpp"
#include "bolt/recipe.hpp"
#include "bolt/render.hpp"

namespace bolt {

struct BookInputs {
  const PersonIndex* index = nullptr;
  const SchemaRegistry* schemas = nullptr;
  const DictionaryRegistry* dictionaries = nullptr;
  const NameMap* names = nullptr;
  /// Score tables keyed by the score_file of recipe items.
  const std::map<std::string, ScoreTable>* scores = nullptr;
  ValidateOptions options;
};

/// Extracted, filtered and ordered paragraphs of `person`, stamped with
/// `depth`. Link fields stay in the payload.
std::vector<Paragraph> prepare_paragraphs(const BookInputs& inputs, const PersonId& person, const Recipe& recipe,
                                          int depth);

/// Full pipeline for one focal person. Throws UnknownPerson when the person
/// is not in the index.
Book compile_book(const BookInputs& inputs, const Recipe& recipe, const PersonId& focal);

/// Same, also returning the expansion tree the text was rendered from.
Book compile_book(const BookInputs& inputs, const Recipe& recipe, const PersonId& focal, ExpansionResult* tree);

/// Loads every score table referenced by the recipe or its sub-recipes,
/// resolving paths against `data_dir`.
std::map<std::string, ScoreTable> load_recipe_scores(const Recipe& recipe, const std::string& data_dir);

}  // namespace bolt
