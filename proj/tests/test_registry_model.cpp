#include <gtest/gtest.h>

#include <random>

#include "bolt/registry_model.hpp"
#include "support.hpp"

using namespace bolt;
using bolt::test::days_from_civil;

namespace {

CivilDate d(int y, int m, int day) { return CivilDate::make(y, m, day); }

}  // namespace

TEST(CivilDate, CompareExamples) {
  EXPECT_EQ(compare_dates(d(2019, 6, 12), d(2019, 6, 13)), std::strong_ordering::less);
  EXPECT_EQ(compare_dates(d(2000, 1, 1), d(2000, 1, 1)), std::strong_ordering::equal);
  EXPECT_EQ(compare_dates(d(2019, 12, 2), d(2019, 6, 13)), std::strong_ordering::greater);
}

TEST(CivilDate, MakeRejectsImpossibleDates) {
  EXPECT_EQ(test::error_code_of([] { CivilDate::make(2019, 13, 1); }), ErrorCode::InvalidDate);
  EXPECT_EQ(test::error_code_of([] { CivilDate::make(2019, 2, 29); }), ErrorCode::InvalidDate);
  EXPECT_EQ(test::error_code_of([] { CivilDate::make(2019, 4, 0); }), ErrorCode::InvalidDate);
  EXPECT_NO_THROW(CivilDate::make(2020, 2, 29));
  EXPECT_FALSE((CivilDate{1900, 2, 29}.valid()));
  EXPECT_TRUE((CivilDate{2000, 2, 29}.valid()));
}

TEST(CivilDate, LeapYearsAndMonthLengths) {
  EXPECT_TRUE(is_leap_year(2000));
  EXPECT_FALSE(is_leap_year(1900));
  EXPECT_TRUE(is_leap_year(2024));
  EXPECT_FALSE(is_leap_year(2023));
  for (int y = 1890; y <= 2110; ++y)
    for (int m = 1; m <= 12; ++m) {
      const int len = m == 12 ? static_cast<int>(days_from_civil(y + 1, 1, 1) - days_from_civil(y, 12, 1))
                              : static_cast<int>(days_from_civil(y, m + 1, 1) - days_from_civil(y, m, 1));
      ASSERT_EQ(days_in_month(y, m), len) << y << "-" << m;
    }
}

// Total order over random dates, checked against day numbers.
TEST(CivilDate, TotalOrderProperty) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const CivilDate a = test::random_date(rng), b = test::random_date(rng), c = test::random_date(rng);
    const auto da = days_from_civil(a.year, a.month, a.day), db = days_from_civil(b.year, b.month, b.day),
               dc = days_from_civil(c.year, c.month, c.day);
    ASSERT_EQ(compare_dates(a, b), da <=> db);
    ASSERT_EQ(compare_dates(a, b), 0 <=> compare_dates(b, a));  // antisymmetry
    if (compare_dates(a, b) <= 0 && compare_dates(b, c) <= 0) ASSERT_TRUE(compare_dates(a, c) <= 0);
    const int outcomes = (compare_dates(a, b) < 0) + (compare_dates(a, b) == 0) + (compare_dates(a, b) > 0);
    ASSERT_EQ(outcomes, 1);
  }
}

TEST(CivilDate, NextAndPreviousDay) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const CivilDate a = test::random_date(rng);
    const auto n = days_from_civil(a.year, a.month, a.day);
    ASSERT_EQ(next_day(a), test::civil_from_days(n + 1));
    ASSERT_EQ(previous_day(a), test::civil_from_days(n - 1));
  }
  EXPECT_EQ(period_end(d(2020, 2, 1), Resolution::Month), d(2020, 2, 29));
  EXPECT_EQ(period_end(d(2019, 1, 1), Resolution::Year), d(2019, 12, 31));
  EXPECT_EQ(period_end(d(2019, 3, 4), Resolution::Day), d(2019, 3, 4));
}

TEST(CivilDate, ParseAndFormat) {
  EXPECT_EQ(parse_iso_date("2019-01-05"), d(2019, 1, 5));
  EXPECT_FALSE(parse_iso_date("2019-13-40"));
  EXPECT_FALSE(parse_iso_date("2019-1-5"));
  EXPECT_FALSE(parse_iso_date("2019-02-29"));
  EXPECT_FALSE(parse_iso_date(""));
  EXPECT_EQ(parse_year_month("2020-05"), d(2020, 5, 1));
  EXPECT_EQ(parse_year("1990"), d(1990, 1, 1));
  EXPECT_EQ(format_iso(d(2019, 1, 5)), "2019-01-05");
  EXPECT_EQ(format_date(d(2020, 5, 1), Resolution::Month), "2020-05");
  EXPECT_EQ(format_date(d(2020, 1, 1), Resolution::Year), "2020");
}

TEST(CivilDate, LongForm) {
  EXPECT_EQ(format_long_date(d(2019, 1, 5)), "January 5th 2019");
  EXPECT_EQ(format_long_date(d(2020, 5, 2)), "May 2nd 2020");
  EXPECT_EQ(format_long_date(d(2019, 12, 1)), "December 1st 2019");
  EXPECT_EQ(format_long_date(d(2019, 6, 13)), "June 13th 2019");
  EXPECT_EQ(format_long_date(d(2019, 6, 11)), "June 11th 2019");
  EXPECT_EQ(format_long_date(d(2019, 6, 12)), "June 12th 2019");
  EXPECT_EQ(format_long_date(d(2019, 6, 23)), "June 23rd 2019");
  EXPECT_EQ(format_long_date(d(2019, 6, 1), Resolution::Month), "June 2019");
  EXPECT_EQ(format_long_date(d(2019, 1, 1), Resolution::Year), "2019");

  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const CivilDate a = test::random_date(rng);
    ASSERT_EQ(parse_long_date(format_long_date(a)), a);
    ASSERT_EQ(parse_iso_date(format_iso(a)), a);
  }
  EXPECT_FALSE(parse_long_date("January 5st 2019"));
}

TEST(DateRange, Overlap) {
  const DateRange june{d(2019, 6, 1), d(2019, 7, 1)};
  EXPECT_TRUE(june.overlaps(d(2019, 6, 13), d(2019, 12, 1)));
  EXPECT_TRUE(june.overlaps(d(2000, 1, 1), d(2019, 6, 12)));
  EXPECT_FALSE(june.overlaps(d(2019, 12, 2), std::nullopt));
  EXPECT_TRUE(june.overlaps(d(2019, 7, 1), std::nullopt));
  EXPECT_TRUE((DateRange{std::nullopt, std::nullopt}.overlaps(d(1900, 1, 1), std::nullopt)));
}

TEST(PersonId, RejectsEmpty) {
  EXPECT_THROW(PersonId(""), Error);
  EXPECT_EQ(PersonId("P1").str(), "P1");
}

TEST(Enums, ParseRoundTrip) {
  for (auto r : {SourceRole::Static, SourceRole::Spells, SourceRole::MonthlyEvents, SourceRole::YearlyAttributes})
    EXPECT_EQ(parse_source_role(to_string(r)), r);
  for (auto t : {FieldType::String, FieldType::Integer, FieldType::Number, FieldType::Code, FieldType::Date,
                 FieldType::YearMonth, FieldType::Year, FieldType::Person, FieldType::PersonList})
    EXPECT_EQ(parse_field_type(to_string(t)), t);
  EXPECT_FALSE(parse_field_type("float"));
  EXPECT_EQ(split_list("Mary;Anne").size(), 2u);
  EXPECT_TRUE(split_list("").empty());
}

TEST(ValidateSpell, Examples) {
  SpellRecord johan{PersonId("Johan"), "household", d(2019, 1, 5), d(2020, 5, 2), {}, {}};
  EXPECT_EQ(&validate_spell(johan), &johan);

  SpellRecord inverted{PersonId("Johan"), "household", d(2020, 5, 2), d(2019, 1, 5), {}, {}};
  EXPECT_EQ(test::error_code_of([&] { validate_spell(inverted); }), ErrorCode::StartAfterEnd);

  SpellRecord ongoing{PersonId("James"), "residence", d(2019, 12, 2), std::nullopt, {}, {}};
  EXPECT_NO_THROW(validate_spell(ongoing));

  SpellRecord self{PersonId("Mary"), "household", d(2019, 1, 5), std::nullopt, {}, {PersonId("Anne"), PersonId("Mary")}};
  EXPECT_EQ(test::error_code_of([&] { validate_spell(self); }), ErrorCode::SelfCoMember);
}

// Accepts exactly start <= end or open end; validation returns the input.
TEST(ValidateSpell, AcceptanceProperty) {
  std::mt19937_64 rng(17);
  std::bernoulli_distribution open(0.2);
  for (int i = 0; i < 1000; ++i) {
    SpellRecord r{PersonId("P1"), "s", test::random_date(rng, 2000, 2002), std::nullopt, {{"k", "v"}}, {}};
    if (!open(rng)) r.end = test::random_date(rng, 2000, 2002);
    const bool ok = !r.end || r.start <= *r.end;
    if (ok) {
      const SpellRecord& out = validate_spell(r);
      ASSERT_EQ(out.start, r.start);
      ASSERT_EQ(out.end, r.end);
      ASSERT_EQ(out.payload, r.payload);
    } else {
      ASSERT_THROW(validate_spell(r), Error);
    }
  }
}

TEST(Schema, ValidateCatchesBadBindings) {
  auto s = test::household_schema();
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.resolution(), Resolution::Day);
  EXPECT_TRUE(s.is_link_field("hh_person_ids"));

  auto no_key = s;
  no_key.focal_key = "nobody";
  EXPECT_EQ(test::error_code_of([&] { no_key.validate(); }), ErrorCode::SchemaError);

  auto no_start = s;
  no_start.dates.start.clear();
  EXPECT_EQ(test::error_code_of([&] { no_start.validate(); }), ErrorCode::SchemaError);

  auto bad_link = s;
  bad_link.link_fields = {"household_type"};
  EXPECT_EQ(test::error_code_of([&] { bad_link.validate(); }), ErrorCode::SchemaError);

  auto static_with_dates = test::demographics_schema();
  static_with_dates.dates.as_of = "gbageboortejaar";
  EXPECT_EQ(test::error_code_of([&] { static_with_dates.validate(); }), ErrorCode::SchemaError);
}

TEST(Schema, JsonRoundTrip) {
  SchemaRegistry reg({test::household_schema(), test::demographics_schema(), test::residence_schema()});
  auto again = SchemaRegistry::from_json(reg.to_json());
  ASSERT_EQ(again.sources().size(), 3u);
  EXPECT_EQ(again.to_json(), reg.to_json());
  EXPECT_EQ(again.at("household").link_fields, std::vector<std::string>{"hh_person_ids"});
  EXPECT_EQ(again.find("nothing"), nullptr);
  EXPECT_EQ(test::error_code_of([&] { again.at("nothing"); }), ErrorCode::UnknownSource);
  EXPECT_EQ(test::error_code_of([&] {
              SchemaRegistry({test::household_schema(), test::household_schema()});
            }),
            ErrorCode::DuplicateSourceName);
}
