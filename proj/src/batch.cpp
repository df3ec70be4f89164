#include "bolt/batch.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace bolt {

namespace fs = std::filesystem;

namespace {

using Digest = std::array<unsigned char, 32>;

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error(ErrorCode::IoError, "SHA-256 unavailable");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes) { EVP_DigestUpdate(ctx_, bytes.data(), bytes.size()); }
  Digest finish() {
    Digest out{};
    unsigned int n = 0;
    EVP_DigestFinal_ex(ctx_, out.data(), &n);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::string hex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (unsigned char c : d) {
    out += kHex[c >> 4];
    out += kHex[c & 15];
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void collect_sources(const Recipe& r, std::set<std::string>& out) {
  for (const auto& sel : r.what) {
    if (!sel.is_score()) out.insert(sel.source);
  }
  for (const auto& who : r.who) out.insert(who.source);
}

nlohmann::ordered_json entry_json(const ManifestEntry& e) {
  return {{"source", e.source}, {"line", e.line}, {"kind", std::string(to_string(e.kind))}, {"subject", e.subject}};
}

bool safe_file_name(std::string_view id) {
  return !id.empty() && id.front() != '.' && id.find('/') == std::string_view::npos &&
         id.find('\\') == std::string_view::npos;
}

struct ShardResult {
  std::vector<PersonError> errors;
  std::vector<Truncation> truncations;
  std::size_t written = 0;
};

void write_or_throw(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return hex(h.finish());
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
  return hex(h.finish());
}

std::optional<OutputFormat> parse_output_format(std::string_view text) noexcept {
  if (text == "files") return OutputFormat::Files;
  if (text == "lines") return OutputFormat::Lines;
  return std::nullopt;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["recipe"] = recipe;
  j["recipe_version"] = recipe_version;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& d : inputs) j["inputs"].push_back({{"path", d.path}, {"sha256", d.sha256}});
  j["person_count"] = person_count;
  j["books_written"] = books_written;
  j["books_errored"] = errors.size();
  j["errors"] = nlohmann::ordered_json::array();
  for (const auto& e : errors) j["errors"].push_back({{"person_id", e.person}, {"code", e.code}, {"message", e.message}});
  j["truncations"] = nlohmann::ordered_json::array();
  for (const auto& t : truncations) {
    nlohmann::ordered_json dropped = nlohmann::ordered_json::array();
    for (const auto& e : t.dropped) dropped.push_back(entry_json(e));
    j["truncations"].push_back({{"person_id", t.person}, {"dropped", dropped}});
  }
  j["load_seconds"] = load_seconds;
  j["wall_seconds"] = wall_seconds;
  j["books_per_second"] = books_per_second;
  j["parallelism"] = parallelism;
  j["format"] = format == OutputFormat::Files ? "files" : "lines";
  j["output_digest"] = output_digest;
  return j.dump(2);
}

BookInputs Workspace::inputs_view() const {
  BookInputs in;
  in.index = index ? &*index : nullptr;
  in.schemas = &schemas;
  in.dictionaries = &dictionaries;
  in.names = &names;
  in.scores = &scores;
  return in;
}

Workspace load_workspace(const LoadRequest& request) {
  const auto t0 = std::chrono::steady_clock::now();
  Workspace ws;
  auto digest = [&](const fs::path& p) { ws.inputs.push_back(InputDigest{p.string(), sha256_file(p)}); };

  ws.recipe = parse_recipe(read_file(request.recipe));
  digest(request.recipe);
  ws.schemas = SchemaRegistry::from_json(read_file(request.schemas));
  digest(request.schemas);
  if (request.dictionaries) {
    ws.dictionaries = DictionaryRegistry::from_json(read_file(*request.dictionaries));
    digest(*request.dictionaries);
  }
  if (request.names) {
    ws.names = NameMap::load(request.names->string());
    digest(*request.names);
  }
  auto problems = validate_recipe(ws.recipe, ws.schemas, ws.dictionaries);
  if (!problems.empty()) throw problems.front();

  std::set<std::string> needed;
  collect_sources(ws.recipe, needed);
  for (const auto& sub : ws.recipe.recipes) collect_sources(sub, needed);
  std::vector<RecordSet> sets;
  for (const auto& schema : ws.schemas.sources()) {
    if (!needed.contains(schema.name)) continue;
    fs::path path = request.data / schema.file;
    sets.push_back(load_source(schema, path.string(), request.load));
    digest(path);
  }
  ws.scores = load_recipe_scores(ws.recipe, request.data.string());
  for (const auto& [file, _] : ws.scores) {
    fs::path p(file);
    digest(p.is_relative() ? request.data / p : p);
  }
  ws.index = PersonIndex::build(std::move(sets));
  ws.load_seconds = seconds_since(t0);
  return ws;
}

std::vector<std::string> read_person_list(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

RunManifest generate_books(const Workspace& ws, const std::vector<std::string>& requested,
                           const GenerateOptions& options) {
  std::vector<std::string> persons = requested;
  std::sort(persons.begin(), persons.end());
  persons.erase(std::unique(persons.begin(), persons.end()), persons.end());

  const fs::path& out = options.out;
  fs::create_directories(out);
  // The manifest goes first so an interrupted rerun never looks complete.
  fs::remove(out / "manifest.json");
  fs::remove(out / "books.jsonl");
  fs::remove_all(out / "books");
  for (const auto& entry : fs::directory_iterator(out)) {
    if (entry.path().filename().string().starts_with(".spill-")) fs::remove(entry.path());
  }
  if (options.format == OutputFormat::Files) fs::create_directories(out / "books");

  const int workers = std::max(1, std::min<int>(options.parallelism, static_cast<int>(std::max<std::size_t>(persons.size(), 1))));
  std::vector<std::optional<Digest>> digests(persons.size());
  std::vector<ShardResult> results(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
  const BookInputs inputs = ws.inputs_view();

  auto shard_bounds = [&](int k) {
    std::size_t n = persons.size();
    return std::pair{n * static_cast<std::size_t>(k) / static_cast<std::size_t>(workers),
                     n * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(workers)};
  };
  auto spill_path = [&](int k) { return out / (".spill-" + std::to_string(k) + ".jsonl"); };

  auto work = [&](int k) {
    try {
      auto [begin, end] = shard_bounds(k);
      ShardResult& result = results[static_cast<std::size_t>(k)];
      std::ofstream spill;
      if (options.format == OutputFormat::Lines) {
        spill.open(spill_path(k), std::ios::binary);
        if (!spill) throw Error(ErrorCode::IoError, "cannot write " + spill_path(k).string());
      }
      for (std::size_t i = begin; i < end; ++i) {
        const std::string& id = persons[i];
        try {
          if (options.format == OutputFormat::Files && !safe_file_name(id)) {
            throw Error(ErrorCode::UnknownPerson, "person id '" + id + "' cannot be used as a file name");
          }
          Book book = compile_book(inputs, ws.recipe, PersonId(id));
          std::string bytes;
          if (options.format == OutputFormat::Lines) {
            nlohmann::ordered_json j;
            j["person_id"] = id;
            j["recipe"] = book.recipe;
            j["recipe_version"] = book.recipe_version;
            j["token_estimate"] = book.token_estimate;
            j["text"] = book.text;
            bytes = j.dump() + '\n';
            spill << bytes;
          } else {
            bytes = book.text + '\n';
            fs::path path = out / "books" / (id + ".txt");
            std::ofstream f(path, std::ios::binary);
            f << bytes;
            write_or_throw(f, path);
          }
          Sha256 h;
          h.update(bytes);
          digests[i] = h.finish();
          ++result.written;
          if (!book.dropped.empty()) result.truncations.push_back(Truncation{id, std::move(book.dropped)});
        } catch (const Error& e) {
          result.errors.push_back(PersonError{id, std::string(to_string(e.code())), e.what()});
        } catch (const std::exception& e) {
          result.errors.push_back(PersonError{id, "InternalError", e.what()});
        }
      }
      if (spill.is_open()) write_or_throw(spill, spill_path(k));
    } catch (...) {
      failures[static_cast<std::size_t>(k)] = std::current_exception();
    }
  };

  const auto t0 = std::chrono::steady_clock::now();
  {
    std::vector<std::jthread> threads;
    for (int k = 1; k < workers; ++k) threads.emplace_back(work, k);
    work(0);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  if (options.format == OutputFormat::Lines) {
    fs::path merged = out / "books.jsonl";
    std::ofstream dst(merged, std::ios::binary);
    for (int k = 0; k < workers; ++k) {
      {
        std::ifstream src(spill_path(k), std::ios::binary);
        dst << src.rdbuf();
      }
      fs::remove(spill_path(k));
    }
    write_or_throw(dst, merged);
  }

  RunManifest m;
  m.wall_seconds = seconds_since(t0);
  m.recipe = ws.recipe.name;
  m.recipe_version = ws.recipe.version;
  m.inputs = ws.inputs;
  m.person_count = persons.size();
  m.parallelism = workers;
  m.format = options.format;
  m.load_seconds = ws.load_seconds;
  for (auto& r : results) {
    m.books_written += r.written;
    for (auto& e : r.errors) m.errors.push_back(std::move(e));
    for (auto& t : r.truncations) m.truncations.push_back(std::move(t));
  }
  m.books_per_second = m.wall_seconds > 0 ? static_cast<double>(m.books_written) / m.wall_seconds : 0;
  Sha256 total;
  for (std::size_t i = 0; i < persons.size(); ++i) {
    if (!digests[i]) continue;
    total.update(persons[i]);
    total.update(std::string_view("\0", 1));
    total.update(std::string_view(reinterpret_cast<const char*>(digests[i]->data()), digests[i]->size()));
  }
  m.output_digest = hex(total.finish());

  fs::path tmp = out / "manifest.json.tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    f << m.to_json() << '\n';
    write_or_throw(f, tmp);
  }
  fs::rename(tmp, out / "manifest.json");
  return m;
}

RunManifest run_batch(const RunRequest& request) {
  Workspace ws = load_workspace(request.load);
  std::vector<std::string> persons;
  if (request.persons) {
    persons = read_person_list(*request.persons);
    ws.inputs.push_back(InputDigest{request.persons->string(), sha256_file(*request.persons)});
  } else {
    for (const auto& p : ws.index->persons()) persons.push_back(p.str());
  }
  return generate_books(ws, persons, request.generate);
}

std::vector<BenchRow> bench(const BenchRequest& request) {
  std::vector<BenchRow> rows;
  for (const auto& recipe : request.recipes) {
    LoadRequest load = request.load;
    load.recipe = recipe;
    Workspace ws = load_workspace(load);
    std::vector<std::string> persons;
    for (const auto& p : ws.index->persons()) {
      if (request.limit && persons.size() >= *request.limit) break;
      persons.push_back(p.str());
    }
    BenchRow row;
    row.recipe = ws.recipe.name.empty() ? recipe.stem().string() : ws.recipe.name;
    row.repetitions = std::max(1, request.repetitions);
    row.low_confidence = row.repetitions < 3;
    std::vector<double> rates;
    for (int r = 0; r < row.repetitions; ++r) {
      GenerateOptions g{request.out / row.recipe, OutputFormat::Lines, request.parallelism};
      RunManifest m = generate_books(ws, persons, g);
      row.books = m.books_written;
      rates.push_back(m.books_per_second);
    }
    std::sort(rates.begin(), rates.end());
    std::size_t n = rates.size();
    row.median_books_per_second = n % 2 ? rates[n / 2] : (rates[n / 2 - 1] + rates[n / 2]) / 2;
    rows.push_back(row);
  }
  return rows;
}

std::string format_bench_table(const std::vector<BenchRow>& rows) {
  std::string out = "recipe          books   books/s (median)  reps\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-14s %6zu %18.1f %5d%s\n", r.recipe.c_str(), r.books, r.median_books_per_second,
                  r.repetitions, r.low_confidence ? "  (low confidence)" : "");
    out += buf;
  }
  return out;
}

std::string format_bench_lines(const std::vector<BenchRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["recipe"] = r.recipe;
    j["books"] = r.books;
    j["books_per_second"] = r.median_books_per_second;
    j["repetitions"] = r.repetitions;
    j["low_confidence"] = r.low_confidence;
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace bolt
