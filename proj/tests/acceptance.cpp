// Acceptance suite: one PASS/FAIL line per criterion. Thresholds and case
// counts are pinned below; the process exits non-zero if any criterion fails.

#include <chrono>
#include <climits>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "bolt/batch.hpp"
#include "bolt/book.hpp"
#include "bolt/synthgen.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bolt;
namespace fs = std::filesystem;

namespace {

constexpr int kCorpusPersons = 10'000;
constexpr int kBenchPersons = 100'000;
constexpr int kRoundTripCases = 10'000;
constexpr int kPropertyCases = 1'000;
constexpr double kCoverageSeconds = 5 * 60;
constexpr double kBenchSeconds = 30 * 60;
constexpr double kBook1MinRate = 100;
constexpr double kBook9MinRate = 10;
constexpr int kBenchRepetitions = 3;

const std::vector<std::string> kRecipes{"book1", "book2", "book3", "book4", "book5",
                                        "book6", "book7", "book8", "book9"};
const std::vector<std::string> kBook9Sources{"demographics", "household", "address", "employment"};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

LoadRequest load_request(const fs::path& data, const std::string& recipe) {
  LoadRequest r;
  r.recipe = test::recipe_path(recipe);
  r.schemas = data / "schemas.json";
  r.data = data;
  r.dictionaries = test::dictionaries_path();
  return r;
}

std::vector<std::string> all_persons(const Workspace& ws) {
  std::vector<std::string> out;
  for (const auto& p : ws.index->persons()) out.push_back(p.str());
  return out;
}

struct RecipeRun {
  RunManifest manifest;
  std::map<std::string, nlohmann::json> books;  // person -> jsonl record
};

// Shared by criteria 1 and 9.
struct CoverageRuns {
  fs::path data;
  std::map<std::string, RecipeRun> runs;
  double seconds = 0;
};

const CoverageRuns& coverage_runs(const fs::path& data) {
  static CoverageRuns runs = [&] {
    CoverageRuns c;
    c.data = data;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& name : kRecipes) {
      Workspace ws = load_workspace(load_request(data, name));
      const fs::path out = data.parent_path() / ("cov-" + name);
      RecipeRun run;
      run.manifest = generate_books(ws, all_persons(ws), GenerateOptions{out, OutputFormat::Lines, 1});
      std::ifstream in(out / "books.jsonl");
      for (std::string line; std::getline(in, line);) {
        auto j = nlohmann::json::parse(line);
        run.books.emplace(j["person_id"].get<std::string>(), std::move(j));
      }
      c.runs.emplace(name, std::move(run));
    }
    c.seconds = since(t0);
    return c;
  }();
  return runs;
}

// 1. Nine recipes produce non-empty, budget-respecting books; Book 9 carries
// all four sources and nested housemate demographics.
Outcome nine_recipe_coverage(const fs::path& data, double synth_seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& cov = coverage_runs(data);
  for (const auto& name : kRecipes) {
    const auto& run = cov.runs.at(name);
    const auto& m = run.manifest;
    if (!m.errors.empty()) return {false, name + ": " + m.errors[0].person + " " + m.errors[0].message};
    if (m.books_written != m.person_count || run.books.size() != m.person_count) return {false, name + ": missing books"};
    const Recipe recipe = load_recipe(test::recipe_path(name).string());
    for (const auto& [person, j] : run.books) {
      const std::string text = j["text"];
      if (text.empty()) return {false, name + ": empty book for " + person};
      if (estimate_tokens(text) > recipe.budget) return {false, name + ": over budget for " + person};
    }
  }

  Workspace ws = load_workspace(load_request(data, "book9"));
  const BookInputs inputs = ws.inputs_view();
  const auto& book9 = cov.runs.at("book9").books;
  std::size_t complete = 0, nested_total = 0;
  for (const auto& person : ws.index->persons()) {
    ExpansionResult tree;
    const Book book = compile_book(inputs, ws.recipe, person, &tree);
    if (book.text != book9.at(person.str())["text"].get<std::string>()) return {false, "batch text differs for " + person.str()};
    std::set<std::pair<std::string, std::uint32_t>> dropped;
    for (const auto& d : book.dropped) dropped.emplace(d.source, d.line);
    std::set<std::string> shown;
    for (const auto& e : book.manifest) {
      if (e.depth == 0) shown.insert(e.source);
    }
    for (const auto& source : kBook9Sources) {
      const auto ord = ws.index->source_ordinal(source);
      if (!ord || ws.index->records(person.str(), *ord).empty()) continue;
      const bool in_dropped = std::any_of(dropped.begin(), dropped.end(), [&](const auto& d) { return d.first == source; });
      if (!shown.contains(source) && !in_dropped) return {false, person.str() + " lacks " + source};
    }
    int nested_here = 0;
    for (const auto& ep : tree) {
      if (ep.paragraph.source != "household") continue;
      const bool kept = !dropped.contains({"household", ep.paragraph.line});
      for (const auto& lp : ep.linked) {
        if (!lp.nested || lp.book.empty()) return {false, person.str() + ": housemate " + lp.id.str() + " not nested"};
        for (const auto& child : lp.book) {
          if (child.paragraph.source != "demographics" || child.paragraph.nesting_depth != 1) {
            return {false, person.str() + ": nested book of " + lp.id.str() + " is not demographics at depth 1"};
          }
        }
        if (kept) {
          if (book.text.find("  About " + lp.id.str() + ":\n    Sex at birth: ") == std::string::npos) {
            return {false, person.str() + ": nested demographics of " + lp.id.str() + " missing from text"};
          }
          ++nested_here;
        }
      }
    }
    nested_total += static_cast<std::size_t>(nested_here);
    if (shown.size() == kBook9Sources.size() && nested_here > 0) ++complete;
  }
  if (complete == 0) return {false, "no Book 9 book shows all four sources with nested housemates"};

  const double seconds = synth_seconds + cov.seconds + since(t0);
  std::size_t books = 0;
  for (const auto& [_, r] : cov.runs) books += r.manifest.books_written;
  const bool fast = seconds < kCoverageSeconds;
  return {fast, std::to_string(books) + " books over 9 recipes; " + std::to_string(complete) +
                    " Book 9 books with all four sources and nested housemates (" + std::to_string(nested_total) +
                    " nested books); " + fmt("%.1f s", seconds) + (fast ? "" : " exceeds 300 s")};
}

// 2. Inverse-template extraction recovers every household spell field.
Outcome template_losslessness(const fs::path& data) {
  const auto dicts = DictionaryRegistry::load(test::dictionaries_path().string());
  const auto schemas = synth_schemas();
  const auto* dict = dicts.find("household");
  if (!dict || !dict->sentence) return {false, "no household template"};
  const SlotContext plain{&schemas.at("household"), dict, nullptr};

  std::mt19937_64 rng(20240101);
  std::size_t mismatches = 0;
  std::string first;
  for (int i = 0; i < kRoundTripCases; ++i) {
    auto err = test::check_household_roundtrip(test::random_household_paragraph(rng), *dict->sentence, plain);
    if (!err.empty() && mismatches++ == 0) first = err;
  }

  // The generated corpus too, with ids rendered as themselves.
  auto index = PersonIndex::build([&] {
    std::vector<RecordSet> sets;
    sets.emplace_back(schemas.at("household"), test::read_text(data / "household.csv"), "household.csv");
    return sets;
  }());
  std::size_t corpus = 0;
  const std::vector<SourceSelection> what{{.source = "household"}};
  for (const auto& person : index.persons()) {
    for (const auto& p : extract_paragraphs(index, person, what)) {
      ++corpus;
      auto err = test::check_household_roundtrip(p, *dict->sentence, plain);
      if (!err.empty() && mismatches++ == 0) first = err;
    }
  }
  return {mismatches == 0, std::to_string(kRoundTripCases) + " random + " + std::to_string(corpus) +
                               " corpus spells, " + std::to_string(mismatches) + " mismatches" +
                               (first.empty() ? "" : "; first: " + first)};
}

// 3. Raw and dictionary renderings of the demographics record.
Outcome style_fidelity() {
  const auto dicts = DictionaryRegistry::load(test::dictionaries_path().string());
  const auto schemas = synth_schemas();
  Paragraph p;
  p.subject = PersonId("P1");
  p.source = "demographics";
  p.kind = ParagraphKind::Attribute;
  p.payload = {{"gbageslacht", "1"}, {"gbageboortejaar", "1990"}};
  const StyleContext ctx{&schemas, &dicts, nullptr};
  const std::string raw = style_paragraph(p, StyleSpec{StyleKind::Raw, ""}, ctx);
  const std::string dict = style_paragraph(p, StyleSpec{StyleKind::Dictionary, "demographics"}, ctx);
  const bool ok = raw == "gbageslacht: 1, gbageboortejaar: 1990" && dict == "Sex at birth: Male, Birth year: 1990";
  return {ok, "raw \"" + raw + "\", dictionary \"" + dict + "\""};
}

// 4. Filter and order properties.
Outcome filter_order_properties() {
  std::mt19937_64 rng(4004);
  const std::pair<const char*, std::function<std::string(std::mt19937_64&)>> props[] = {
      {"last_n/sort", test::check_last_n_commutes},
      {"stability", test::check_order_stability},
      {"window", test::check_window_overlap}};
  std::string detail;
  for (const auto& [name, check] : props) {
    for (int i = 0; i < kPropertyCases; ++i) {
      auto err = check(rng);
      if (!err.empty()) return {false, std::string(name) + " case " + std::to_string(i) + ": " + err};
    }
    detail += std::string(detail.empty() ? "" : ", ") + name + " " + std::to_string(kPropertyCases) + "/" +
              std::to_string(kPropertyCases);
  }
  return {true, detail};
}

// 5. Change detection against the brute-force oracles.
Outcome change_detection_oracles() {
  std::mt19937_64 rng(5005);
  std::size_t changes = 0;
  for (int i = 0; i < kPropertyCases; ++i) {
    auto s = test::random_employment_series(rng);
    auto t = test::random_thresholds(rng);
    auto got = test::change_keys(detect_employment_changes(s, t), "employer_id");
    if (got != test::employment_oracle(s, t)) return {false, "employment case " + std::to_string(i)};
    changes += got.size();
  }
  for (int i = 0; i < kPropertyCases; ++i) {
    auto s = test::random_education_series(rng);
    std::vector<test::LevelKey> got;
    for (const auto& p : detect_education_changes(s)) {
      got.emplace_back(p.sort_date->year, std::string(payload_value(p.payload, "level")));
    }
    if (got != test::education_oracle(s)) return {false, "education case " + std::to_string(i)};
  }
  return {true, std::to_string(kPropertyCases) + " employment series (" + std::to_string(changes) +
                    " changes) and " + std::to_string(kPropertyCases) + " education series match"};
}

// 6. Nesting depth stays within max_depth on cyclic fixtures.
Outcome recursion_safety() {
  std::vector<std::pair<std::string, std::string>> fixtures;  // name, household csv
  auto clique = [](int n) {
    std::string hh = test::kHouseholdHeader;
    for (int p = 0; p < n; ++p) {
      std::string with;
      for (int q = 0; q < n; ++q) {
        if (q == p) continue;
        if (!with.empty()) with += ';';
        with += "K" + std::to_string(q);
      }
      hh += "H1,K" + std::to_string(p) + ",5,2,2010-01-01,," + with + "\n";
    }
    return hh;
  };
  fixtures.emplace_back("pair", clique(2));
  fixtures.emplace_back("clique6", clique(6));
  std::mt19937_64 rng(6006);
  for (int g = 0; g < 100; ++g) {
    // Symmetric random graphs, so every link is part of a cycle.
    const int n = std::uniform_int_distribution<int>(3, 9)(rng);
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n));
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) adj[a][b] = adj[b][a] = rng() % 2;
    }
    std::string hh = test::kHouseholdHeader;
    for (int a = 0; a < n; ++a) {
      std::string with;
      for (int b = 0; b < n; ++b) {
        if (!adj[a][b]) continue;
        if (!with.empty()) with += ';';
        with += "K" + std::to_string(b);
      }
      hh += "H" + std::to_string(a) + ",K" + std::to_string(a) + ",5,2,2010-01-01,," + with + "\n";
    }
    fixtures.emplace_back("random" + std::to_string(g), hh);
  }

  const auto schemas = synth_schemas();
  const auto dicts = DictionaryRegistry::load(test::dictionaries_path().string());
  std::size_t books = 0;
  int deepest = 0;
  for (int max_depth : {1, 2}) {
    const Recipe recipe = parse_recipe(test::self_nesting_recipe(max_depth));
    for (const auto& [name, hh] : fixtures) {
      auto index = test::build_index({{"household", hh}}, schemas);
      const BookInputs inputs{&index, &schemas, &dicts, nullptr, nullptr, {}};
      for (const auto& person : index.persons()) {
        ExpansionResult tree;
        const Book book = compile_book(inputs, recipe, person, &tree);
        ++books;
        const int depth = max_nesting_depth(tree);
        deepest = std::max(deepest, depth);
        if (depth > max_depth) return {false, name + ": depth " + std::to_string(depth)};
        for (const auto& e : book.manifest) {
          if (e.depth > max_depth) return {false, name + ": manifest depth " + std::to_string(e.depth)};
        }
        if (auto err = test::audit_who_tree(tree, {person.str()}, max_depth); !err.empty()) return {false, name + ": " + err};
      }
    }
  }
  return {true, std::to_string(books) + " books on " + std::to_string(fixtures.size()) +
                    " cyclic fixtures at max_depth 1 and 2; deepest nesting " + std::to_string(deepest)};
}

// 7. Parallelism 1 and 8 give byte-identical archives.
Outcome determinism(const fs::path& data) {
  auto archive_digest = [](const fs::path& out) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(out)) {
      if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) all += fs::relative(f, out).string() + '\n' + sha256_file(f) + '\n';
    return std::pair{files.size(), sha256_hex(all)};
  };
  std::string detail;
  for (auto [name, format] : {std::pair{"book9", OutputFormat::Files}, std::pair{"book1", OutputFormat::Lines}}) {
    RunRequest req;
    req.load = load_request(data, name);
    req.generate = GenerateOptions{data.parent_path() / "det-1", format, 1};
    const auto one = run_batch(req);
    req.generate = GenerateOptions{data.parent_path() / "det-8", format, 8};
    const auto eight = run_batch(req);
    const auto a = archive_digest(data.parent_path() / "det-1");
    const auto b = archive_digest(data.parent_path() / "det-8");
    if (a != b || one.output_digest != eight.output_digest || eight.parallelism != 8) {
      return {false, std::string(name) + ": digests differ"};
    }
    detail += std::string(detail.empty() ? "" : "; ") + name + " " + std::to_string(one.books_written) + " books, " +
              std::to_string(a.first) + " files, " + a.second.substr(0, 16);
  }
  return {true, detail};
}

// 8. Throughput on a 100k-person corpus.
Outcome throughput(const fs::path& root) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path data = root / "bench-data";
  SynthConfig cfg;
  cfg.person_count = kBenchPersons;
  cfg.seed = 8;
  generate_population(cfg, data);
  BenchRequest req;
  req.recipes = {test::recipe_path("book1"), test::recipe_path("book9")};
  req.load = load_request(data, "book1");
  req.out = root / "bench-out";
  req.repetitions = kBenchRepetitions;
  const auto rows = bench(req);
  fs::remove_all(data);
  fs::remove_all(req.out);
  const double seconds = since(t0);
  const bool ok = rows.size() == 2 && rows[0].median_books_per_second >= kBook1MinRate &&
                  rows[1].median_books_per_second >= kBook9MinRate && seconds <= kBenchSeconds &&
                  rows[0].books >= static_cast<std::size_t>(kBenchPersons);
  std::string detail = std::to_string(rows.empty() ? 0 : rows[0].books) + " persons, 1 worker: book1 " +
                       fmt("%.0f", rows.at(0).median_books_per_second) + " books/s (min 100), book9 " +
                       fmt("%.0f", rows.at(1).median_books_per_second) + " books/s (min 10); " + fmt("%.1f s", seconds);
  return {ok, detail};
}

// 9. Budgets hold and every truncation is in the manifest.
Outcome budget_enforcement(const fs::path& data) {
  const auto& cov = coverage_runs(data);
  std::size_t books = 0, truncated = 0;
  for (const auto& name : kRecipes) {
    const auto& run = cov.runs.at(name);
    Workspace ws = load_workspace(load_request(data, name));
    Recipe unbounded = ws.recipe;
    unbounded.budget = INT_MAX;
    const BookInputs inputs = ws.inputs_view();

    std::map<std::string, std::vector<ManifestEntry>> recorded;
    for (const auto& t : run.manifest.truncations) {
      if (t.dropped.empty()) return {false, name + ": empty truncation record for " + t.person};
      recorded.emplace(t.person, t.dropped);
    }
    for (const auto& [person, j] : run.books) {
      ++books;
      const std::string text = j["text"];
      if (j["token_estimate"].get<int>() > ws.recipe.budget || estimate_tokens(text) > ws.recipe.budget) {
        return {false, name + ": " + person + " over budget"};
      }
      const Book full = compile_book(inputs, unbounded, PersonId(person));
      const bool needs_cut = full.token_estimate > ws.recipe.budget;
      if (needs_cut != recorded.contains(person)) {
        return {false, name + ": " + person + (needs_cut ? " truncated without a record" : " recorded but fits")};
      }
      if (!needs_cut && full.text != text) return {false, name + ": " + person + " changed without truncation"};
      truncated += needs_cut;
    }
  }
  return {true, std::to_string(books) + " books within budget; " + std::to_string(truncated) +
                    " truncations, all recorded"};
}

}  // namespace

int main() {
  test::TempDir root;
  const fs::path data = root / "corpus";
  const auto t0 = std::chrono::steady_clock::now();
  SynthConfig cfg;
  cfg.person_count = kCorpusPersons;
  cfg.seed = 1;
  generate_population(cfg, data);
  const double synth_seconds = since(t0);

  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"nine-recipe coverage", [&] { return nine_recipe_coverage(data, synth_seconds); }},
      {"template losslessness", [&] { return template_losslessness(data); }},
      {"style fidelity", style_fidelity},
      {"filter/order properties", filter_order_properties},
      {"change detection oracles", change_detection_oracles},
      {"recursion safety", recursion_safety},
      {"determinism", [&] { return determinism(data); }},
      {"throughput", [&] { return throughput(root.path()); }},
      {"budget enforcement", [&] { return budget_enforcement(data); }},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << n << " " << name << ": " << o.detail << " ["
              << fmt("%.1f s", since(start)) << "]" << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << (n - failed) << "/" << n << std::endl;
  return failed ? 1 : 0;
}
