#include "bolt/book.hpp"

#include <algorithm>
#include <filesystem>

namespace bolt {

namespace {

bool covered(const Recipe& recipe, std::string_view source, std::string_view field) {
  return std::any_of(recipe.who.begin(), recipe.who.end(),
                     [&](const WhoExpansion& e) { return e.source == source && e.link_field == field; });
}

void strip_uncovered_links(Paragraph& p, const Recipe& recipe, const SchemaRegistry& schemas) {
  const SourceSchema* schema = schemas.find(p.source);
  if (!schema || schema->link_fields.empty()) return;
  std::erase_if(p.payload, [&](const auto& kv) {
    return schema->is_link_field(kv.first) && !covered(recipe, p.source, kv.first);
  });
}

struct Styler {
  const BookInputs& inputs;
  const Recipe& root;
  StyleContext context;

  const ParsingDictionary* dictionary_for(const Paragraph& p, const StyleSpec& spec) const {
    if (!inputs.dictionaries || spec.kind == StyleKind::Raw) return nullptr;
    return spec.dictionary.empty() ? inputs.dictionaries->for_source(p.source) : inputs.dictionaries->find(spec.dictionary);
  }

  std::string annotate(const ExpandedParagraph& ep, const StyleSpec& spec, std::string text) const {
    // Link fields a template leaves out would otherwise lose the ids.
    if (spec.kind != StyleKind::Template) return text;
    const ParsingDictionary* dict = dictionary_for(ep.paragraph, spec);
    std::vector<std::pair<std::string, std::vector<std::string>>> groups;
    for (const auto& lp : ep.linked) {
      if (lp.nested) continue;
      if (dict && dict->sentence && dict->sentence->has_slot(lp.link_field)) continue;
      auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == lp.link_field; });
      if (it == groups.end()) it = groups.insert(groups.end(), {lp.link_field, {}});
      it->second.emplace_back(inputs.names ? inputs.names->display(lp.id.str()) : lp.id.str());
    }
    for (const auto& [field, names] : groups) {
      std::string label(dict ? dict->field_name(field) : std::string_view(field));
      text += " (" + label + ": ";
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) text += ", ";
        text += names[i];
      }
      text += ")";
    }
    return text;
  }

  std::vector<StyledParagraph> style(const ExpansionResult& tree, const Recipe& recipe, const StyleMap& styles) const {
    std::vector<StyledParagraph> out;
    out.reserve(tree.size());
    for (const auto& ep : tree) {
      StyledParagraph sp;
      sp.paragraph = ep.paragraph;
      strip_uncovered_links(sp.paragraph, recipe, *inputs.schemas);
      StyleSpec spec = styles.resolve(sp.paragraph.source);
      sp.text = annotate(ep, spec, style_paragraph(sp.paragraph, spec, context));
      for (const auto& lp : ep.linked) {
        if (!lp.nested) continue;
        const Recipe* nested = root.find_recipe(lp.recipe);
        if (!nested) throw Error(ErrorCode::UnknownRecipe, "unknown nested recipe '" + lp.recipe + "'");
        StyledNestedBook nb;
        nb.display_name = std::string(inputs.names ? inputs.names->display(lp.id.str()) : lp.id.str());
        nb.paragraphs = style(lp.book, *nested, StyleMap::merge(styles, nested->how.style));
        sp.nested.push_back(std::move(nb));
      }
      out.push_back(std::move(sp));
    }
    return out;
  }
};

}  // namespace

std::vector<Paragraph> prepare_paragraphs(const BookInputs& inputs, const PersonId& person, const Recipe& recipe,
                                          int depth) {
  std::vector<Paragraph> paragraphs = extract_paragraphs(*inputs.index, person, recipe.what);
  std::vector<std::string> source_order;
  source_order.reserve(recipe.what.size());
  for (const auto& sel : recipe.what) {
    source_order.push_back(sel.source);
    if (!sel.is_score()) continue;
    const ScoreTable* table = nullptr;
    if (inputs.scores) {
      auto it = inputs.scores->find(sel.score_file);
      if (it != inputs.scores->end()) table = &it->second;
    }
    if (!table) throw Error(ErrorCode::IoError, "score table '" + sel.score_file + "' is not loaded");
    if (auto p = attach_summary_score(person, *table, sel.source)) paragraphs.push_back(std::move(*p));
  }
  paragraphs = apply_recipe_filters(std::move(paragraphs), recipe);
  paragraphs = order_paragraphs(std::move(paragraphs), recipe.how.order, source_order);
  for (auto& p : paragraphs) p.nesting_depth = depth;
  return paragraphs;
}

Book compile_book(const BookInputs& inputs, const Recipe& recipe, const PersonId& focal) {
  return compile_book(inputs, recipe, focal, nullptr);
}

Book compile_book(const BookInputs& inputs, const Recipe& recipe, const PersonId& focal, ExpansionResult* tree_out) {
  if (!inputs.index->contains(focal.str())) {
    throw Error(ErrorCode::UnknownPerson, "person '" + focal.str() + "' is not in any source");
  }
  WhoContext who;
  who.root = &recipe;
  who.options = inputs.options;
  who.extract = [&](const PersonId& person, const Recipe& nested, int depth) {
    return prepare_paragraphs(inputs, person, nested, depth);
  };
  ExpansionResult tree =
      resolve_who(who, focal, prepare_paragraphs(inputs, focal, recipe, 0), recipe.who, {}, 0);

  Styler styler{inputs, recipe, StyleContext{inputs.schemas, inputs.dictionaries, inputs.names}};
  std::vector<StyledParagraph> styled = styler.style(tree, recipe, recipe.how.style);

  AssemblyOptions options;
  options.section_headers = recipe.how.section_headers;
  options.budget = recipe.budget;
  for (const auto& sel : recipe.what) {
    const ParsingDictionary* dict = inputs.dictionaries ? inputs.dictionaries->for_source(sel.source) : nullptr;
    options.section_names.emplace_back(sel.source, dict ? dict->display_name : sel.source);
  }
  Book book = assemble_book(focal, recipe.name, std::move(styled), options);
  book.recipe_version = recipe.version;
  if (tree_out) *tree_out = std::move(tree);
  return book;
}

std::map<std::string, ScoreTable> load_recipe_scores(const Recipe& recipe, const std::string& data_dir) {
  std::map<std::string, ScoreTable> out;
  auto visit = [&](const Recipe& r) {
    for (const auto& sel : r.what) {
      if (!sel.is_score() || out.contains(sel.score_file)) continue;
      std::filesystem::path path(sel.score_file);
      if (path.is_relative()) path = std::filesystem::path(data_dir) / path;
      out.emplace(sel.score_file, load_score_table(path.string()));
    }
  };
  visit(recipe);
  for (const auto& sub : recipe.recipes) visit(sub);
  return out;
}

}  // namespace bolt
