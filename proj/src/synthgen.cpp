#include "bolt/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "bolt/error.hpp"

namespace bolt {

namespace {

// mt19937_64 output is fully specified; the standard distributions are not,
// so uniforms are derived by hand to keep files identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  /// Uniform integer in [lo, hi].
  int between(int lo, int hi) {
    auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }
  template <class T, std::size_t N>
  const T& pick(const std::array<T, N>& items) {
    return items[static_cast<std::size_t>(between(0, static_cast<int>(N) - 1))];
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::array<const char*, 20> kMunicipalities = {
    "Amsterdam", "Rotterdam", "Den Haag", "Utrecht",  "Eindhoven", "Groningen",  "Tilburg",
    "Almere",    "Breda",     "Nijmegen", "Leeuwarden", "Zwolle",  "Haarlem",    "Arnhem",
    "Enschede",  "Maastricht", "Delft",   "Leiden",   "Amersfoort", "Apeldoorn"};

struct Country {
  const char* code;
  double weight;
};
constexpr std::array<Country, 8> kCountries = {{{"6030", 0.78},
                                                 {"5022", 0.05},
                                                 {"6043", 0.05},
                                                 {"5007", 0.04},
                                                 {"6029", 0.03},
                                                 {"7028", 0.02},
                                                 {"6024", 0.02},
                                                 {"9999", 0.01}}};

std::string id_of(char prefix, std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%07zu", prefix, n);
  return buf;
}

const char* draw_country(Rng& rng) {
  double u = rng.uniform();
  for (const auto& c : kCountries) {
    if (u < c.weight) return c.code;
    u -= c.weight;
  }
  return kCountries.front().code;
}

struct HouseholdSpell {
  CivilDate start;
  std::string hh_id;
  int type = 1;
  int role = 4;
  std::string members;
};

struct AddressSpell {
  CivilDate start;
  std::string object_id;
  std::string municipality;
};

struct Person {
  std::string id;
  int sex = 1;
  CivilDate birth;
  std::string country, mother_country, father_country;
  int mother_year = 0, father_year = 0;
  int household = -1;
  int education = 0;  // 0 = none yet
  std::string employer;  // empty = not employed
  double salary = 0;
  std::optional<HouseholdSpell> spell;
  std::optional<AddressSpell> address;
};

struct Household {
  std::string id;
  std::vector<int> adults;
  std::vector<int> children;
  bool married = false;
  bool alive = true;
  std::string object_id;
  std::string municipality;
};

class Simulation {
 public:
  Simulation(const SynthConfig& config, const std::filesystem::path& dir)
      : config_(config), rng_(config.seed), dir_(dir) {}

  SynthSummary run();

 private:
  int age(const Person& p, int year) const { return year - p.birth.year; }

  int new_person(int sex, CivilDate birth) {
    Person p;
    p.id = id_of('P', persons_.size() + 1);
    p.sex = sex;
    p.birth = birth;
    persons_.push_back(std::move(p));
    return static_cast<int>(persons_.size()) - 1;
  }

  int new_household() {
    Household h;
    h.id = id_of('H', households_.size() + 1);
    h.object_id = id_of('O', ++objects_);
    h.municipality = rng_.pick(kMunicipalities);
    households_.push_back(std::move(h));
    touched_.push_back(false);
    return static_cast<int>(households_.size()) - 1;
  }

  static std::pair<int, int> type_and_role(const Household& h, bool adult) {
    const std::size_t a = h.adults.size();
    const std::size_t c = h.children.size();
    if (a == 1 && c == 0) return {1, 4};
    if (a == 2 && c == 0) return {h.married ? 4 : 2, 2};
    if (a == 2) return {h.married ? 5 : 3, adult ? 1 : 3};
    if (a == 1) return {6, adult ? 1 : 3};
    return {7, 5};
  }

  void write_household_row(const Person& p, const HouseholdSpell& s, std::optional<CivilDate> end) {
    std::string row = s.hh_id + ',' + p.id + ',' + std::to_string(s.type) + ',' + std::to_string(s.role) + ',' +
                      format_iso(s.start) + ',' + (end ? format_iso(*end) : std::string()) + ',' + s.members + '\n';
    household_rows_.push_back({p.id + format_iso(s.start), std::move(row)});
  }

  void write_address_row(const Person& p, const AddressSpell& s, std::optional<CivilDate> end) {
    std::string row = p.id + ',' + s.object_id + ',' + s.municipality + ',' + format_iso(s.start) + ',' +
                      (end ? format_iso(*end) : std::string()) + '\n';
    address_rows_.push_back({p.id + format_iso(s.start), std::move(row)});
  }

  /// Closes the member spells of `h` the day before `date` and opens new
  /// ones describing the current composition.
  void refresh(int hh, CivilDate date) {
    Household& h = households_[static_cast<std::size_t>(hh)];
    std::vector<int> members = h.adults;
    members.insert(members.end(), h.children.begin(), h.children.end());
    std::sort(members.begin(), members.end());
    for (int m : members) {
      Person& p = persons_[static_cast<std::size_t>(m)];
      bool adult = std::find(h.adults.begin(), h.adults.end(), m) != h.adults.end();
      auto [type, role] = type_and_role(h, adult);
      HouseholdSpell s{date, h.id, type, role, {}};
      for (int o : members) {
        if (o == m) continue;
        if (!s.members.empty()) s.members += kListSeparator;
        s.members += persons_[static_cast<std::size_t>(o)].id;
      }
      open_spell(p, std::move(s));
      set_address(p, date, h.object_id, h.municipality);
      p.household = hh;
    }
  }

  void open_spell(Person& p, HouseholdSpell s) {
    if (p.spell && p.spell->start < s.start) write_household_row(p, *p.spell, previous_day(s.start));
    p.spell = std::move(s);
  }

  void set_address(Person& p, CivilDate date, const std::string& object, const std::string& municipality) {
    if (p.address && p.address->object_id == object) return;
    if (p.address && p.address->start < date) write_address_row(p, *p.address, previous_day(date));
    p.address = AddressSpell{date, object, municipality};
  }

  /// An employer other than `current`; the pool is large, so returning to a
  /// previous employer is rare but possible.
  std::string draw_employer(const std::string& current) {
    std::string e;
    do {
      e = id_of('E', static_cast<std::size_t>(rng_.between(1, 5000)));
    } while (e == current);
    return e;
  }

  void remove_member(Household& h, int person) {
    std::erase(h.adults, person);
    std::erase(h.children, person);
  }

  void initialise();
  void household_events(int hh, int year, int month, const std::vector<int>& singles);
  void employment_month(int year, int month);
  void education_year(int year);
  void write_demographics();

  const SynthConfig& config_;
  Rng rng_;
  std::filesystem::path dir_;
  std::vector<Person> persons_;
  std::vector<Household> households_;
  std::vector<bool> touched_;
  std::size_t objects_ = 0;
  std::ofstream household_, address_, employment_, education_;
  // (person id + start, row); spells close out of order, files are sorted.
  std::vector<std::pair<std::string, std::string>> household_rows_, address_rows_;
  SynthSummary summary_;
};

void Simulation::initialise() {
  const CivilDate start{config_.start_year, 1, 1};
  int remaining = config_.person_count;
  const double p_stop = 1.0 / std::max(1.0, config_.mean_household_size);
  while (remaining > 0) {
    int size = 1;
    while (size < config_.max_household_size && !rng_.chance(p_stop)) ++size;
    size = std::min(size, remaining);
    remaining -= size;

    int hh = new_household();
    Household& h = households_.back();
    int adults = size == 1 ? 1 : (rng_.chance(0.85) ? 2 : 1);
    int first_sex = rng_.between(1, 2);
    int youngest_adult = 0;
    for (int a = 0; a < adults; ++a) {
      int sex = a == 0 ? first_sex : 3 - first_sex;
      int year = config_.start_year - rng_.between(size > adults ? 25 : 19, 62);
      int pid = new_person(sex, CivilDate{year, rng_.between(1, 12), rng_.between(1, 28)});
      youngest_adult = std::max(youngest_adult, year);
      h.adults.push_back(pid);
    }
    h.married = adults == 2 && rng_.chance(0.5);
    for (int c = adults; c < size; ++c) {
      int lo = std::max(youngest_adult + 18, config_.start_year - 17);
      int year = rng_.between(std::min(lo, config_.start_year - 1), config_.start_year - 1);
      int pid = new_person(rng_.between(1, 2), CivilDate{year, rng_.between(1, 12), rng_.between(1, 28)});
      h.children.push_back(pid);
    }
    for (int pid : h.adults) {
      Person& p = persons_[static_cast<std::size_t>(pid)];
      p.country = draw_country(rng_);
      p.mother_country = rng_.chance(0.85) ? p.country : draw_country(rng_);
      p.father_country = rng_.chance(0.85) ? p.country : draw_country(rng_);
      p.mother_year = p.birth.year - rng_.between(18, 40);
      p.father_year = p.birth.year - rng_.between(18, 45);
      p.education = rng_.between(2, 7);
    }
    for (int pid : h.children) {
      Person& p = persons_[static_cast<std::size_t>(pid)];
      p.country = rng_.chance(0.95) ? "6030" : draw_country(rng_);
      const Person* mother = nullptr;
      const Person* father = nullptr;
      for (int a : h.adults) {
        const Person& ad = persons_[static_cast<std::size_t>(a)];
        (ad.sex == 2 ? mother : father) = &ad;
      }
      p.mother_country = mother ? mother->country : draw_country(rng_);
      p.father_country = father ? father->country : draw_country(rng_);
      p.mother_year = mother ? mother->birth.year : p.birth.year - rng_.between(20, 40);
      p.father_year = father ? father->birth.year : p.birth.year - rng_.between(20, 45);
      int a = age(p, config_.start_year);
      p.education = a >= 12 ? std::clamp((a - 10) / 2, 1, 3) : 0;
    }
    refresh(hh, start);
  }
}

void Simulation::household_events(int hh, int year, int month, const std::vector<int>& singles) {
  if (touched_[static_cast<std::size_t>(hh)] || !households_[static_cast<std::size_t>(hh)].alive) return;
  const SynthRates& r = config_.rates;
  const CivilDate date{year, month, rng_.between(2, 28)};
  auto touch = [&](int h) {
    touched_[static_cast<std::size_t>(h)] = true;
  };
  auto& h = households_[static_cast<std::size_t>(hh)];

  if (rng_.chance(r.household_change / 12.0)) {
    if (h.adults.size() == 1) {
      // Partnering: a single from another household moves in.
      if (singles.size() > 1) {
        int other = singles[static_cast<std::size_t>(rng_.between(0, static_cast<int>(singles.size()) - 1))];
        auto& oh = households_[static_cast<std::size_t>(other)];
        if (other != hh && oh.alive && !touched_[static_cast<std::size_t>(other)] && oh.children.empty() &&
            oh.adults.size() == 1) {
          int mover = oh.adults.front();
          oh.adults.clear();
          oh.alive = false;
          touch(other);
          h.adults.push_back(mover);
          h.married = false;
          touch(hh);
          refresh(hh, date);
          return;
        }
      }
    } else if (h.adults.size() == 2) {
      if (!h.married && rng_.chance(0.4)) {
        h.married = true;
      } else {
        int leaver = h.adults[static_cast<std::size_t>(rng_.between(0, 1))];
        remove_member(h, leaver);
        h.married = false;
        int nh = new_household();
        households_[static_cast<std::size_t>(nh)].adults.push_back(leaver);
        touch(nh);
        refresh(nh, date);
      }
      touch(hh);
      refresh(hh, date);
      return;
    }
  }

  if (h.adults.size() == 2 && h.children.size() < 4) {
    int mother = -1;
    for (int a : h.adults) {
      const Person& p = persons_[static_cast<std::size_t>(a)];
      if (p.sex == 2 && age(p, year) >= 18 && age(p, year) <= 44) mother = a;
    }
    if (mother >= 0 && rng_.chance(r.birth / 12.0)) {
      int father = h.adults[0] == mother ? h.adults[1] : h.adults[0];
      int child = new_person(rng_.between(1, 2), date);
      Person& c = persons_[static_cast<std::size_t>(child)];
      const Person& m = persons_[static_cast<std::size_t>(mother)];
      const Person& f = persons_[static_cast<std::size_t>(father)];
      c.country = "6030";
      c.mother_country = m.country;
      c.father_country = f.country;
      c.mother_year = m.birth.year;
      c.father_year = f.birth.year;
      households_[static_cast<std::size_t>(hh)].children.push_back(child);
      touch(hh);
      refresh(hh, date);
      return;
    }
  }

  int leaver = -1;
  for (int c : households_[static_cast<std::size_t>(hh)].children) {
    if (age(persons_[static_cast<std::size_t>(c)], year) >= 18 && rng_.chance(r.leave_home / 12.0)) {
      leaver = c;
      break;
    }
  }
  if (leaver >= 0) {
    int c = leaver;
    remove_member(households_[static_cast<std::size_t>(hh)], c);
    int nh = new_household();
    households_[static_cast<std::size_t>(nh)].adults.push_back(c);
    touch(nh);
    touch(hh);
    refresh(nh, date);
    refresh(hh, date);
    return;
  }

  if (rng_.chance(r.move / 12.0)) {
    auto& mh = households_[static_cast<std::size_t>(hh)];
    mh.object_id = id_of('O', ++objects_);
    mh.municipality = rng_.pick(kMunicipalities);
    touch(hh);
    for (int m : mh.adults) set_address(persons_[static_cast<std::size_t>(m)], date, mh.object_id, mh.municipality);
    for (int m : mh.children) set_address(persons_[static_cast<std::size_t>(m)], date, mh.object_id, mh.municipality);
  }
}

void Simulation::employment_month(int year, int month) {
  const SynthRates& r = config_.rates;
  char period[16];
  std::snprintf(period, sizeof period, "%04d-%02d", year, month);
  for (auto& p : persons_) {
    int a = age(p, year);
    if (p.birth > CivilDate{year, month, 28}) continue;
    if (a < 18 || a > 66) {
      p.employer.clear();
      continue;
    }
    if (p.employer.empty()) {
      // The first simulated month starts most adults in work.
      bool first = year == config_.start_year && month == 1;
      if (!rng_.chance(first ? 0.7 : r.job_find / 12.0)) continue;
      p.employer = draw_employer(p.employer);
      p.salary = rng_.between(1500, 5000);
    } else if (rng_.chance(r.job_change / 12.0)) {
      if (rng_.chance(0.4)) {
        p.employer.clear();
        continue;
      }
      p.employer = draw_employer(p.employer);
      p.salary = std::round(p.salary * (0.9 + 0.3 * rng_.uniform()));
    } else if (rng_.chance(r.salary_jump / 12.0)) {
      p.salary = std::round(p.salary * (1.10 + 0.15 * rng_.uniform()) + 1);
    } else if (rng_.chance(0.1)) {
      p.salary = std::round(p.salary * (0.97 + 0.06 * rng_.uniform()));
    }
    int vacation = rng_.chance(0.08) ? rng_.between(5, 15) : rng_.between(0, 3);
    int sick = rng_.chance(0.03) ? rng_.between(5, 20) : (rng_.chance(0.8) ? 0 : rng_.between(1, 3));
    employment_ << p.id << ',' << period << ',' << p.employer << ',' << static_cast<long long>(p.salary)
                << ',' << vacation << ',' << sick << '\n';
    ++summary_.employment_rows;
  }
}

void Simulation::education_year(int year) {
  for (auto& p : persons_) {
    int a = age(p, year);
    if (a < 12) continue;
    if (p.education == 0) p.education = 1;
    if (a <= 30 && p.education < 7 && rng_.chance(config_.rates.education_transition)) ++p.education;
    education_ << p.id << ',' << year << ',' << p.education << '\n';
    ++summary_.education_rows;
  }
}

void Simulation::write_demographics() {
  std::ofstream out(dir_ / "demographics.csv", std::ios::binary);
  out << "person_id,gbageslacht,gbageboortejaar,gbageboortemaand,gbageboorteland,gbageboortelandmoeder,"
         "gbageboortelandvader,gbageboortejaarmoeder,gbageboortejaarvader\n";
  for (const auto& p : persons_) {
    out << p.id << ',' << p.sex << ',' << p.birth.year << ',' << p.birth.month << ',' << p.country << ','
        << p.mother_country << ',' << p.father_country << ',' << p.mother_year << ',' << p.father_year << '\n';
  }
  std::ofstream stork(dir_ / "stork.csv", std::ios::binary);
  stork << "person_id,score\n";
  char buf[32];
  for (const auto& p : persons_) {
    std::snprintf(buf, sizeof buf, "%.4f", rng_.uniform());
    stork << p.id << ',' << buf << '\n';
  }
}

SynthSummary Simulation::run() {
  std::filesystem::create_directories(dir_);
  household_.open(dir_ / "household.csv", std::ios::binary);
  address_.open(dir_ / "address.csv", std::ios::binary);
  employment_.open(dir_ / "employment.csv", std::ios::binary);
  education_.open(dir_ / "education.csv", std::ios::binary);
  if (!household_ || !address_ || !employment_ || !education_) {
    throw Error(ErrorCode::IoError, "cannot write synthetic files into " + dir_.string());
  }
  household_ << "hh_id,person_id,household_type,person_role,start,end,hh_person_ids\n";
  address_ << "person_id,object_id,municipality,start,end\n";
  employment_ << "person_id,month,employer_id,salary,vacation_days,sick_days\n";
  education_ << "person_id,year,level\n";

  initialise();
  for (int year = config_.start_year; year <= config_.end_year; ++year) {
    for (int month = 1; month <= 12; ++month) {
      std::vector<int> singles;
      for (std::size_t i = 0; i < households_.size(); ++i) {
        touched_[i] = false;
        const auto& h = households_[i];
        if (h.alive && h.adults.size() == 1 && h.children.empty()) singles.push_back(static_cast<int>(i));
      }
      const std::size_t count = households_.size();
      for (std::size_t i = 0; i < count; ++i) household_events(static_cast<int>(i), year, month, singles);
      employment_month(year, month);
    }
    education_year(year);
  }
  for (const auto& p : persons_) {
    if (p.spell) write_household_row(p, *p.spell, std::nullopt);
    if (p.address) write_address_row(p, *p.address, std::nullopt);
  }
  for (auto [rows, file] : {std::pair{&household_rows_, &household_}, std::pair{&address_rows_, &address_}}) {
    std::sort(rows->begin(), rows->end());
    for (const auto& [key, row] : *rows) *file << row;
  }
  summary_.household_rows = household_rows_.size();
  summary_.address_rows = address_rows_.size();
  write_demographics();
  {
    std::ofstream schemas(dir_ / "schemas.json", std::ios::binary);
    schemas << synth_schemas().to_json() << '\n';
  }
  summary_.persons = persons_.size();
  summary_.households = households_.size();
  for (auto* f : {&household_, &address_, &employment_, &education_}) {
    f->close();
    if (!*f) throw Error(ErrorCode::IoError, "failed writing synthetic files into " + dir_.string());
  }
  return summary_;
}

FieldSpec field(std::string name, FieldType type, bool non_negative = false, bool optional = false) {
  return FieldSpec{std::move(name), type, non_negative, optional};
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidValue, "synth config: " + msg); };
  if (person_count < 1) fail("person_count must be at least 1");
  if (end_year < start_year) fail("year range is empty");
  if (start_year < 1900 || end_year > 9999) fail("years must lie in 1900..9999");
  if (mean_household_size < 1 || max_household_size < 1) fail("household size parameters must be at least 1");
  for (double v : {rates.household_change, rates.birth, rates.leave_home, rates.move, rates.job_change,
                   rates.job_find, rates.salary_jump, rates.education_transition}) {
    if (!(v >= 0)) fail("rates must be non-negative");
  }
}

SynthConfig SynthConfig::from_json(std::string_view text) {
  using nlohmann::json;
  SynthConfig c;
  try {
    json doc = json::parse(text);
    auto known = [](const json& obj, std::initializer_list<std::string_view> keys, const std::string& where) {
      if (!obj.is_object()) throw Error(ErrorCode::InvalidValue, "synth config: expected an object at '" + where + "'");
      for (const auto& [k, _] : obj.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
          throw Error(ErrorCode::UnknownKey, "synth config: unknown key '" + where + k + "'");
        }
      }
    };
    known(doc, {"person_count", "start_year", "end_year", "seed", "mean_household_size", "max_household_size", "rates"},
          "");
    c.person_count = doc.value("person_count", c.person_count);
    c.start_year = doc.value("start_year", c.start_year);
    c.end_year = doc.value("end_year", c.end_year);
    c.seed = doc.value("seed", c.seed);
    c.mean_household_size = doc.value("mean_household_size", c.mean_household_size);
    c.max_household_size = doc.value("max_household_size", c.max_household_size);
    if (doc.contains("rates")) {
      const auto& r = doc.at("rates");
      known(r, {"household_change", "birth", "leave_home", "move", "job_change", "job_find", "salary_jump",
                "education_transition"},
            "rates.");
      c.rates.household_change = r.value("household_change", c.rates.household_change);
      c.rates.birth = r.value("birth", c.rates.birth);
      c.rates.leave_home = r.value("leave_home", c.rates.leave_home);
      c.rates.move = r.value("move", c.rates.move);
      c.rates.job_change = r.value("job_change", c.rates.job_change);
      c.rates.job_find = r.value("job_find", c.rates.job_find);
      c.rates.salary_jump = r.value("salary_jump", c.rates.salary_jump);
      c.rates.education_transition = r.value("education_transition", c.rates.education_transition);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidValue, std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string SynthConfig::to_json() const {
  nlohmann::ordered_json j;
  j["person_count"] = person_count;
  j["start_year"] = start_year;
  j["end_year"] = end_year;
  j["seed"] = seed;
  j["mean_household_size"] = mean_household_size;
  j["max_household_size"] = max_household_size;
  j["rates"] = {{"household_change", rates.household_change}, {"birth", rates.birth},
                {"leave_home", rates.leave_home},             {"move", rates.move},
                {"job_change", rates.job_change},             {"job_find", rates.job_find},
                {"salary_jump", rates.salary_jump},           {"education_transition", rates.education_transition}};
  return j.dump(2);
}

SchemaRegistry synth_schemas() {
  std::vector<SourceSchema> s;

  SourceSchema demo;
  demo.name = "demographics";
  demo.file = "demographics.csv";
  demo.role = SourceRole::Static;
  demo.focal_key = "person_id";
  demo.fields = {field("person_id", FieldType::Person),          field("gbageslacht", FieldType::Code),
                 field("gbageboortejaar", FieldType::Integer),   field("gbageboortemaand", FieldType::Integer),
                 field("gbageboorteland", FieldType::Code),      field("gbageboortelandmoeder", FieldType::Code),
                 field("gbageboortelandvader", FieldType::Code), field("gbageboortejaarmoeder", FieldType::Integer),
                 field("gbageboortejaarvader", FieldType::Integer)};
  s.push_back(std::move(demo));

  SourceSchema hh;
  hh.name = "household";
  hh.file = "household.csv";
  hh.role = SourceRole::Spells;
  hh.focal_key = "person_id";
  hh.fields = {field("hh_id", FieldType::String),      field("person_id", FieldType::Person),
               field("household_type", FieldType::Code), field("person_role", FieldType::Code),
               field("start", FieldType::Date),         field("end", FieldType::Date, false, true),
               field("hh_person_ids", FieldType::PersonList, false, true)};
  hh.dates.start = "start";
  hh.dates.end = "end";
  hh.link_fields = {"hh_person_ids"};
  s.push_back(std::move(hh));

  SourceSchema addr;
  addr.name = "address";
  addr.file = "address.csv";
  addr.role = SourceRole::Spells;
  addr.focal_key = "person_id";
  addr.fields = {field("person_id", FieldType::Person), field("object_id", FieldType::String),
                 field("municipality", FieldType::String), field("start", FieldType::Date),
                 field("end", FieldType::Date, false, true)};
  addr.dates.start = "start";
  addr.dates.end = "end";
  s.push_back(std::move(addr));

  SourceSchema emp;
  emp.name = "employment";
  emp.file = "employment.csv";
  emp.role = SourceRole::MonthlyEvents;
  emp.focal_key = "person_id";
  emp.fields = {field("person_id", FieldType::Person),         field("month", FieldType::YearMonth),
                field("employer_id", FieldType::String),
                field("salary", FieldType::Number, true),      field("vacation_days", FieldType::Number, true),
                field("sick_days", FieldType::Number, true)};
  emp.dates.period = "month";
  emp.changes.contract = "employer_id";
  emp.changes.salary = "salary";
  emp.changes.vacation_days = "vacation_days";
  emp.changes.sick_days = "sick_days";
  s.push_back(std::move(emp));

  SourceSchema edu;
  edu.name = "education";
  edu.file = "education.csv";
  edu.role = SourceRole::YearlyAttributes;
  edu.focal_key = "person_id";
  edu.fields = {field("person_id", FieldType::Person), field("year", FieldType::Year), field("level", FieldType::Code)};
  edu.dates.as_of = "year";
  edu.changes.level = "level";
  edu.changes.level_ordering = {"1", "2", "3", "4", "5", "6", "7"};
  s.push_back(std::move(edu));

  return SchemaRegistry(std::move(s));
}

SynthSummary generate_population(const SynthConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  return Simulation(config, out_dir).run();
}

}  // namespace bolt
