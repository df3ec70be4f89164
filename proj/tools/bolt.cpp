// bolt: synthesize registries, validate recipes, compile books, benchmark.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bolt/batch.hpp"
#include "bolt/recipe.hpp"
#include "bolt/render.hpp"
#include "bolt/synthgen.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPersonErrors = 2;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bolt::Error(bolt::ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SharedFlags {
  std::string recipe;
  std::string schemas;
  std::string data;
  std::string dictionaries;
  std::string names;
  double max_reject_fraction = 0.01;
};

void add_load_flags(CLI::App* cmd, SharedFlags& f, bool with_recipe) {
  if (with_recipe) cmd->add_option("--recipe", f.recipe, "Recipe file")->required();
  cmd->add_option("--schemas", f.schemas, "Schema registry (JSON)")->required();
  cmd->add_option("--data", f.data, "Directory holding the source files")->required();
  cmd->add_option("--dictionaries", f.dictionaries, "Parsing dictionaries (JSON)");
  cmd->add_option("--names", f.names, "Display names, person_id,name per line");
  cmd->add_option("--max-reject-fraction", f.max_reject_fraction, "Tolerated fraction of rejected rows")
      ->check(CLI::Range(0.0, 1.0));
}

bolt::LoadRequest load_request(const SharedFlags& f) {
  bolt::LoadRequest r;
  r.recipe = f.recipe;
  r.schemas = f.schemas;
  r.data = f.data;
  if (!f.dictionaries.empty()) r.dictionaries = fs::path(f.dictionaries);
  if (!f.names.empty()) r.names = fs::path(f.names);
  r.load.max_reject_fraction = f.max_reject_fraction;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile per-person books of life from registry log files"};
  app.require_subcommand(1);

  // synth
  bolt::SynthConfig synth;
  std::string synth_config, synth_out;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic registry");
  cmd_synth->add_option("--out", synth_out, "Output directory")->required();
  cmd_synth->add_option("--config", synth_config, "Synth config (JSON); flags override it");
  auto* opt_count = cmd_synth->add_option("--persons", synth.person_count, "Initial population size");
  auto* opt_seed = cmd_synth->add_option("--seed", synth.seed, "64-bit seed");
  auto* opt_start = cmd_synth->add_option("--start-year", synth.start_year, "First simulated year");
  auto* opt_end = cmd_synth->add_option("--end-year", synth.end_year, "Last simulated year");

  // validate
  SharedFlags vflags;
  auto* cmd_validate = app.add_subcommand("validate", "Check a recipe against schemas and dictionaries");
  cmd_validate->add_option("--recipe", vflags.recipe, "Recipe file")->required();
  cmd_validate->add_option("--schemas", vflags.schemas, "Schema registry (JSON)")->required();
  cmd_validate->add_option("--dictionaries", vflags.dictionaries, "Parsing dictionaries (JSON)");

  // run
  SharedFlags rflags;
  std::string persons, out, format = "files";
  int parallelism = 1;
  auto* cmd_run = app.add_subcommand("run", "Compile books for a set of persons");
  add_load_flags(cmd_run, rflags, true);
  cmd_run->add_option("--persons", persons, "File with one person id per line (default: everyone)");
  cmd_run->add_option("--out", out, "Output directory")->required();
  cmd_run->add_option("--format", format, "files or lines")->check(CLI::IsMember({"files", "lines"}));
  cmd_run->add_option("--parallelism", parallelism, "Worker threads")->check(CLI::PositiveNumber);

  // bench
  SharedFlags bflags;
  std::vector<std::string> bench_recipes;
  std::string bench_out;
  int repetitions = 3;
  int bench_parallelism = 1;
  std::size_t limit = 0;
  auto* cmd_bench = app.add_subcommand("bench", "Measure books per second for a set of recipes");
  add_load_flags(cmd_bench, bflags, false);
  cmd_bench->add_option("--recipe", bench_recipes, "Recipe files")->required();
  cmd_bench->add_option("--out", bench_out, "Scratch output directory")->required();
  cmd_bench->add_option("--repetitions", repetitions, "Runs per recipe")->check(CLI::PositiveNumber);
  cmd_bench->add_option("--parallelism", bench_parallelism, "Worker threads")->check(CLI::PositiveNumber);
  cmd_bench->add_option("--limit", limit, "Only the first N persons (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; every usage error is fatal.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*cmd_synth) {
      if (!synth_config.empty()) {
        bolt::SynthConfig base = bolt::SynthConfig::from_json(slurp(synth_config));
        if (!*opt_count) synth.person_count = base.person_count;
        if (!*opt_seed) synth.seed = base.seed;
        if (!*opt_start) synth.start_year = base.start_year;
        if (!*opt_end) synth.end_year = base.end_year;
        synth.rates = base.rates;
        synth.mean_household_size = base.mean_household_size;
        synth.max_household_size = base.max_household_size;
      }
      auto s = bolt::generate_population(synth, synth_out);
      std::printf("wrote %zu persons, %zu households: %zu household, %zu address, %zu employment, %zu education rows\n",
                  s.persons, s.households, s.household_rows, s.address_rows, s.employment_rows, s.education_rows);
      return kExitOk;
    }

    if (*cmd_validate) {
      auto recipe = bolt::parse_recipe(slurp(vflags.recipe));
      auto schemas = bolt::SchemaRegistry::from_json(slurp(vflags.schemas));
      bolt::DictionaryRegistry dicts;
      if (!vflags.dictionaries.empty()) dicts = bolt::DictionaryRegistry::from_json(slurp(vflags.dictionaries));
      auto problems = bolt::validate_recipe(recipe, schemas, dicts);
      for (const auto& e : problems) std::fprintf(stderr, "%s: %s\n", vflags.recipe.c_str(), e.what());
      if (!problems.empty()) return kExitFatal;
      std::printf("%s: ok\n", vflags.recipe.c_str());
      return kExitOk;
    }

    if (*cmd_run) {
      bolt::RunRequest req;
      req.load = load_request(rflags);
      if (!persons.empty()) req.persons = fs::path(persons);
      req.generate.out = out;
      req.generate.format = *bolt::parse_output_format(format);
      req.generate.parallelism = parallelism;
      auto m = bolt::run_batch(req);
      std::printf("%s: %zu books, %zu errors, %zu truncated, %.1f books/s (load %.2fs, generate %.2fs)\n",
                  m.recipe.c_str(), m.books_written, m.errors.size(), m.truncations.size(), m.books_per_second,
                  m.load_seconds, m.wall_seconds);
      for (const auto& e : m.errors) std::fprintf(stderr, "%s: %s\n", e.person.c_str(), e.message.c_str());
      return m.errors.empty() ? kExitOk : kExitPersonErrors;
    }

    if (*cmd_bench) {
      bolt::BenchRequest req;
      req.load = load_request(bflags);
      for (const auto& r : bench_recipes) req.recipes.emplace_back(r);
      req.out = bench_out;
      req.repetitions = repetitions;
      req.parallelism = bench_parallelism;
      if (limit > 0) req.limit = limit;
      auto rows = bolt::bench(req);
      std::fputs(bolt::format_bench_table(rows).c_str(), stdout);
      std::fputs(bolt::format_bench_lines(rows).c_str(), stdout);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bolt: %s\n", e.what());
    return kExitFatal;
  }
  return kExitOk;
}
