#include <gtest/gtest.h>

#include <random>

#include "bolt/extract.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bolt;

namespace {

EmploymentSeries series(const std::vector<double>& salary, const std::vector<double>& vacation = {},
                        const std::vector<double>& sick = {}) {
  EmploymentSeries s;
  s.subject = PersonId("P1");
  s.source = "employment";
  s.fields.contract = "employer_id";
  CivilDate month{2019, 1, 1};
  for (std::size_t i = 0; i < salary.size(); ++i) {
    EmploymentMonth m;
    m.period = month;
    m.contract = "E1";
    m.salary = salary[i];
    m.vacation_days = i < vacation.size() ? vacation[i] : 0;
    m.sick_days = i < sick.size() ? sick[i] : 0;
    m.line = static_cast<std::uint32_t>(i + 2);
    s.months.push_back(m);
    month = next_day(period_end(month, Resolution::Month));
  }
  return s;
}

std::vector<std::string> labels(const std::vector<Paragraph>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.emplace_back(payload_value(p.payload, "change"));
  return out;
}

EducationSeries education(std::vector<std::string> levels) {
  EducationSeries s;
  s.subject = PersonId("P1");
  s.source = "education";
  int year = 2015;
  for (auto& l : levels) s.years.push_back(EducationYear{year++, l, static_cast<std::uint32_t>(s.years.size() + 2)});
  return s;
}

}  // namespace

TEST(EmploymentChanges, SalaryJump) {
  auto out = detect_employment_changes(series({2000, 2000, 2600}), ChangeThresholds{});
  EXPECT_EQ(labels(out), (std::vector<std::string>{"job_start", "salary_increase"}));
  EXPECT_EQ(*out[1].sort_date, (CivilDate{2019, 3, 1}));
  EXPECT_EQ(payload_value(out[1].payload, "previous_salary"), "2000");
  EXPECT_EQ(payload_value(out[1].payload, "salary"), "2600");
  EXPECT_EQ(out[1].resolution, Resolution::Month);
  EXPECT_EQ(out[1].kind, ParagraphKind::Change);
  // Below the threshold.
  EXPECT_EQ(labels(detect_employment_changes(series({2000, 2100}), ChangeThresholds{})),
            std::vector<std::string>{"job_start"});
}

TEST(EmploymentChanges, ConstantSeries) {
  auto s = series({2000, 2000, 2000, 2000});
  EXPECT_EQ(labels(detect_employment_changes(s, {})), std::vector<std::string>{"job_start"});
  s.observation_end = CivilDate{2019, 12, 1};
  EXPECT_EQ(labels(detect_employment_changes(s, {})), (std::vector<std::string>{"job_start", "job_end"}));
  s.observation_end = CivilDate{2019, 4, 1};  // still employed at the end of observation
  EXPECT_EQ(labels(detect_employment_changes(s, {})), std::vector<std::string>{"job_start"});
}

TEST(EmploymentChanges, VacationAndSickness) {
  auto out = detect_employment_changes(series({2000, 2000, 2000, 2000}, {0, 0, 10, 0}), {});
  ASSERT_EQ(labels(out), (std::vector<std::string>{"job_start", "vacation"}));
  EXPECT_EQ(*out[1].sort_date, (CivilDate{2019, 3, 1}));
  out = detect_employment_changes(series({2000, 2000}, {}, {0, 5}), {});
  EXPECT_EQ(labels(out), (std::vector<std::string>{"job_start", "sickness"}));
}

TEST(EmploymentChanges, UnsortedInput) {
  auto s = series({2000, 2000, 2000});
  std::swap(s.months[0], s.months[2]);
  EXPECT_EQ(test::error_code_of([&] { detect_employment_changes(s, {}); }), ErrorCode::UnsortedInput);
  auto dup = series({2000, 2000});
  dup.months[1].period = dup.months[0].period;
  EXPECT_EQ(test::error_code_of([&] { detect_employment_changes(dup, {}); }), ErrorCode::UnsortedInput);
  // Two contracts in the same month are fine.
  dup.months[1].contract = "E2";
  EXPECT_EQ(detect_employment_changes(dup, {}).size(), 2u);
}

TEST(EmploymentChanges, MatchesAdjacentScanOracle) {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 1000; ++i) {
    auto s = test::random_employment_series(rng);
    auto t = test::random_thresholds(rng);
    auto out = detect_employment_changes(s, t);
    ASSERT_EQ(test::change_keys(out, "employer_id"), test::employment_oracle(s, t)) << "case " << i;
  }
}

// Changes come from input months. Re-running on just the months that
// changed reproduces every month-local label; salary steps and job_end can
// appear, since dropping months merges small raises and moves the last one.
TEST(EmploymentChanges, SubsetAndRerun) {
  std::mt19937_64 rng(77);
  auto local = [](const std::vector<test::ChangeKey>& keys) {
    std::vector<test::ChangeKey> out;
    for (const auto& k : keys)
      if (std::get<1>(k) == "job_start" || std::get<1>(k) == "vacation" || std::get<1>(k) == "sickness") out.push_back(k);
    return out;
  };
  for (int i = 0; i < 1000; ++i) {
    auto s = test::random_employment_series(rng);
    auto t = test::random_thresholds(rng);
    auto out = detect_employment_changes(s, t);
    EmploymentSeries again = s;
    again.months.clear();
    for (const auto& m : s.months) {
      bool hit = false;
      for (const auto& p : out) hit = hit || (*p.sort_date == m.period && payload_value(p.payload, "employer_id") == m.contract);
      if (hit) again.months.push_back(m);
    }
    for (const auto& p : out) {
      bool found = false;
      for (const auto& m : s.months) found = found || (m.period == *p.sort_date && m.line == p.line);
      ASSERT_TRUE(found);
    }
    ASSERT_EQ(local(test::change_keys(detect_employment_changes(again, t), "employer_id")),
              local(test::change_keys(out, "employer_id")));
  }
}

TEST(EmploymentChanges, RerunCanMergeRaises) {
  // 2000 -> 2150 -> 2300 are two 7.5% steps; the vacation months alone show one 15% step.
  auto s = series({2000, 2150, 2300}, {6, 0, 6});
  auto first = detect_employment_changes(s, {});
  EXPECT_EQ(labels(first), (std::vector<std::string>{"job_start", "vacation", "vacation"}));
  s.months.erase(s.months.begin() + 1);
  EXPECT_EQ(labels(detect_employment_changes(s, {})),
            (std::vector<std::string>{"job_start", "vacation", "salary_increase", "vacation"}));
}

TEST(EducationChanges, Examples) {
  auto out = detect_education_changes(education({"HS", "HS", "BA", "BA"}));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(payload_value(out[0].payload, "change"), "initial");
  EXPECT_EQ(payload_value(out[0].payload, "level"), "HS");
  EXPECT_EQ(payload_value(out[1].payload, "change"), "change");
  EXPECT_EQ(payload_value(out[1].payload, "level"), "BA");
  EXPECT_EQ(payload_value(out[1].payload, "previous_level"), "HS");
  EXPECT_EQ(*out[1].sort_date, (CivilDate{2017, 1, 1}));

  EXPECT_EQ(detect_education_changes(education({"BA"})).size(), 1u);
  EXPECT_EQ(detect_education_changes(education({"HS", "HS", "HS"})).size(), 1u);
  EXPECT_TRUE(detect_education_changes(education({})).empty());

  auto bad = education({"HS", "BA"});
  bad.years[1].year = bad.years[0].year;
  EXPECT_EQ(test::error_code_of([&] { detect_education_changes(bad); }), ErrorCode::UnsortedInput);
}

TEST(EducationChanges, MatchesAdjacentDiffOracle) {
  std::mt19937_64 rng(4321);
  for (int i = 0; i < 1000; ++i) {
    auto s = test::random_education_series(rng);
    auto out = detect_education_changes(s);
    std::vector<test::LevelKey> got;
    for (const auto& p : out) got.emplace_back(p.sort_date->year, std::string(payload_value(p.payload, "level")));
    const auto expect = test::education_oracle(s);
    ASSERT_EQ(got, expect);
    std::size_t unequal = 0;
    for (std::size_t k = 1; k < s.years.size(); ++k) unequal += s.years[k].level != s.years[k - 1].level;
    ASSERT_EQ(out.size(), s.years.empty() ? 0 : unequal + 1);
  }
}

TEST(SummaryScore, Examples) {
  ScoreTable scores{{"p1", 0.12}};
  auto p = attach_summary_score(PersonId("p1"), scores, "STORK");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->kind, ParagraphKind::SummaryScore);
  EXPECT_FALSE(p->dated());
  EXPECT_EQ(p->payload, (Payload{{"STORK", "0.12"}}));
  EXPECT_FALSE(attach_summary_score(PersonId("p2"), scores, "STORK"));
  EXPECT_EQ(format_score(0.125), "0.12");  // binary 0.125 is exact; printf rounds half to even
  EXPECT_EQ(format_score(3), "3.00");

  // Two labels: ordered by label regardless of attach order.
  std::vector<Paragraph> ps{*attach_summary_score(PersonId("p1"), scores, "STORK"),
                            *attach_summary_score(PersonId("p1"), scores, "ALPHA")};
  auto ordered = order_paragraphs(ps, Order::Chronological, {});
  EXPECT_EQ(ordered[0].source, "ALPHA");
  EXPECT_EQ(ordered[1].source, "STORK");
}

TEST(SummaryScore, LoadsTable) {
  test::TempDir dir;
  test::write_text(dir / "stork.csv", "person_id,score\np1,0.12\np2,0.5\n");
  auto t = load_score_table((dir / "stork.csv").string());
  EXPECT_EQ(t.size(), 2u);
  EXPECT_DOUBLE_EQ(t.at("p2"), 0.5);
  test::write_text(dir / "bad.csv", "person_id,score\np1,high\n");
  EXPECT_EQ(test::error_code_of([&] { load_score_table((dir / "bad.csv").string()); }), ErrorCode::TypeMismatch);
}

TEST(ExtractParagraphs, JohanHousehold) {
  std::vector<RecordSet> sets;
  sets.emplace_back(test::household_schema(), test::johan_household_csv(), "household.csv");
  auto index = PersonIndex::build(std::move(sets));
  std::vector<SourceSelection> what{SourceSelection{.source = "household"}};
  auto ps = extract_paragraphs(index, PersonId("Johan"), what);
  ASSERT_EQ(ps.size(), 3u);
  for (const auto& p : ps) {
    EXPECT_EQ(p.kind, ParagraphKind::Spell);
    EXPECT_EQ(p.nesting_depth, 0);
    EXPECT_TRUE(p.dated());
    EXPECT_FALSE(payload_has(p.payload, "person_id"));  // the focal key is implied
  }
  EXPECT_EQ(*ps[0].sort_date, (CivilDate{2019, 1, 5}));
  EXPECT_FALSE(ps[2].end_date);
  EXPECT_TRUE(extract_paragraphs(index, PersonId("Anne"), what).empty());

  std::vector<SourceSelection> projected{SourceSelection{.source = "household", .fields = {"household_type"}}};
  auto slim = extract_paragraphs(index, PersonId("Johan"), projected);
  EXPECT_EQ(slim[0].payload, (Payload{{"household_type", "3"}, {"hh_person_ids", "Mary;Anne"}}));

  std::vector<SourceSelection> unknown{SourceSelection{.source = "residence"}};
  EXPECT_EQ(test::error_code_of([&] { extract_paragraphs(index, PersonId("Johan"), unknown); }),
            ErrorCode::UnknownSource);
}

TEST(ExtractParagraphs, CountsAreAdditiveAndMonotone) {
  auto index = test::build_index(test::layout_corpus());
  const PersonId one("1");
  std::vector<SourceSelection> demo{SourceSelection{.source = "demographics"}};
  std::vector<SourceSelection> hh{SourceSelection{.source = "household"}};
  std::vector<SourceSelection> both{SourceSelection{.source = "demographics"}, SourceSelection{.source = "household"}};
  const auto nd = extract_paragraphs(index, one, demo).size();
  const auto nh = extract_paragraphs(index, one, hh).size();
  EXPECT_EQ(nd, 1u);
  EXPECT_EQ(nh, 4u);
  auto combined = extract_paragraphs(index, one, both);
  EXPECT_EQ(combined.size(), nd + nh);
  EXPECT_EQ(combined[0].kind, ParagraphKind::Attribute);
  EXPECT_FALSE(combined[0].dated());

  // Adding sources never removes paragraphs.
  std::vector<SourceSelection> what;
  std::vector<Paragraph> previous;
  for (const char* src : {"demographics", "household", "address", "employment"}) {
    what.push_back(SourceSelection{.source = src});
    auto now = extract_paragraphs(index, one, what);
    for (const auto& p : previous) EXPECT_NE(std::find(now.begin(), now.end(), p), now.end());
    previous = now;
  }

  std::vector<SourceSelection> changes{SourceSelection{.source = "employment", .changes_only = true}};
  auto emp = extract_paragraphs(index, one, changes);
  ASSERT_EQ(emp.size(), 1u);
  EXPECT_EQ(payload_value(emp[0].payload, "change"), "job_start");
}

TEST(ExtractParagraphs, WindowAndEducationChanges) {
  std::string edu = test::kEducationHeader;
  edu += "1,2015,3\n1,2016,3\n1,2017,5\n1,2018,5\n";
  auto index = test::build_index({{"education", edu}});
  std::vector<SourceSelection> raw{SourceSelection{.source = "education"}};
  EXPECT_EQ(extract_paragraphs(index, PersonId("1"), raw).size(), 4u);
  std::vector<SourceSelection> changes{SourceSelection{.source = "education", .changes_only = true}};
  auto out = extract_paragraphs(index, PersonId("1"), changes);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(payload_value(out[1].payload, "level"), "5");
  std::vector<SourceSelection> windowed{SourceSelection{
      .source = "education", .window = DateRange{CivilDate{2016, 6, 1}, CivilDate{2017, 6, 1}}}};
  EXPECT_EQ(extract_paragraphs(index, PersonId("1"), windowed).size(), 2u);
}
