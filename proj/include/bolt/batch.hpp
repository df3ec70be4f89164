#pragma once

// Batch generation: load everything once, compile books for a person set
// on worker threads, write outputs, then the manifest as completion marker.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bolt/book.hpp"
#include "bolt/ingest.hpp"
#include "bolt/recipe.hpp"
#include "bolt/render.hpp"

namespace bolt {

enum class OutputFormat { Files, Lines };

std::optional<OutputFormat> parse_output_format(std::string_view text) noexcept;

struct InputDigest {
  std::string path;
  std::string sha256;
};

struct PersonError {
  std::string person;
  std::string code;
  std::string message;
};

struct Truncation {
  std::string person;
  std::vector<ManifestEntry> dropped;
};

struct RunManifest {
  std::string recipe;
  int recipe_version = kRecipeVersion;
  std::vector<InputDigest> inputs;
  std::size_t person_count = 0;
  std::size_t books_written = 0;
  std::vector<PersonError> errors;
  std::vector<Truncation> truncations;
  /// Generation time only; loading is reported separately.
  double wall_seconds = 0;
  double load_seconds = 0;
  double books_per_second = 0;
  int parallelism = 1;
  OutputFormat format = OutputFormat::Files;
  /// SHA-256 over (person id, book bytes) in person order; independent of
  /// parallelism.
  std::string output_digest;

  std::string to_json() const;
};

/// Everything a run needs, loaded and validated.
struct Workspace {
  Recipe recipe;
  SchemaRegistry schemas;
  DictionaryRegistry dictionaries;
  NameMap names;
  std::map<std::string, ScoreTable> scores;
  std::optional<PersonIndex> index;
  std::vector<InputDigest> inputs;
  double load_seconds = 0;

  BookInputs inputs_view() const;
};

struct LoadRequest {
  std::filesystem::path recipe;
  std::filesystem::path schemas;
  std::filesystem::path data;
  std::optional<std::filesystem::path> dictionaries;
  std::optional<std::filesystem::path> names;
  LoadOptions load;
};

/// Parses and validates the recipe, then loads only the sources it uses.
/// Throws on any fatal problem.
Workspace load_workspace(const LoadRequest& request);

struct GenerateOptions {
  std::filesystem::path out;
  OutputFormat format = OutputFormat::Files;
  int parallelism = 1;
};

/// Writes one book per person (or records an error for it). Removes
/// previous outputs first and writes manifest.json last.
RunManifest generate_books(const Workspace& workspace, const std::vector<std::string>& persons,
                           const GenerateOptions& options);

/// Reads one id per line; blank lines are skipped.
std::vector<std::string> read_person_list(const std::filesystem::path& path);

struct RunRequest {
  LoadRequest load;
  /// All indexed persons when absent.
  std::optional<std::filesystem::path> persons;
  GenerateOptions generate;
};

RunManifest run_batch(const RunRequest& request);

struct BenchRow {
  std::string recipe;
  std::size_t books = 0;
  double median_books_per_second = 0;
  int repetitions = 0;
  bool low_confidence = false;
};

struct BenchRequest {
  std::vector<std::filesystem::path> recipes;
  LoadRequest load;  // recipe path ignored
  std::filesystem::path out;
  int repetitions = 3;
  int parallelism = 1;
  /// Benchmark only the first n indexed persons.
  std::optional<std::size_t> limit;
};

std::vector<BenchRow> bench(const BenchRequest& request);
std::string format_bench_table(const std::vector<BenchRow>& rows);
std::string format_bench_lines(const std::vector<BenchRow>& rows);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace bolt
