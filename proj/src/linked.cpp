#include "bolt/linked.hpp"

#include <algorithm>

namespace bolt {

ExpansionResult resolve_who(const WhoContext& context, const PersonId& focal, std::vector<Paragraph> paragraphs,
                            std::span<const WhoExpansion> who, const std::vector<PersonId>& path, int depth,
                            int depth_limit) {
  std::vector<PersonId> next_path = path;
  if (std::find(next_path.begin(), next_path.end(), focal) == next_path.end()) next_path.push_back(focal);

  ExpansionResult out;
  out.reserve(paragraphs.size());
  for (auto& p : paragraphs) {
    ExpandedParagraph ep;
    for (const auto& e : who) {
      if (e.source != p.source || !payload_has(p.payload, e.link_field)) continue;
      int limit = effective_max_depth(e, context.options);
      if (depth_limit >= 0) limit = std::min(limit, depth_limit);
      const Recipe* nested_recipe = nullptr;
      if (e.mode == WhoMode::Nested && context.root) {
        nested_recipe = context.root->find_recipe(e.nested_recipe);
        if (!nested_recipe) throw Error(ErrorCode::UnknownRecipe, "unknown nested recipe '" + e.nested_recipe + "'");
      }
      for (auto id : split_list(payload_value(p.payload, e.link_field))) {
        LinkedPerson lp;
        lp.id = PersonId(std::string(id));
        lp.link_field = e.link_field;
        lp.cycle_cut = std::find(next_path.begin(), next_path.end(), lp.id) != next_path.end();
        if (nested_recipe && !lp.cycle_cut && depth + 1 <= limit && context.extract) {
          lp.nested = true;
          lp.recipe = nested_recipe->name.empty() ? e.nested_recipe : nested_recipe->name;
          auto nested = context.extract(lp.id, *nested_recipe, depth + 1);
          lp.book = resolve_who(context, lp.id, std::move(nested), nested_recipe->who, next_path, depth + 1, limit);
        }
        ep.linked.push_back(std::move(lp));
      }
    }
    ep.paragraph = std::move(p);
    out.push_back(std::move(ep));
  }
  return out;
}

int max_nesting_depth(const ExpansionResult& result) noexcept {
  int best = 0;
  for (const auto& ep : result) {
    best = std::max(best, ep.paragraph.nesting_depth);
    for (const auto& lp : ep.linked) best = std::max(best, max_nesting_depth(lp.book));
  }
  return best;
}

}  // namespace bolt
