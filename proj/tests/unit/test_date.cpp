#include <doctest.h>

#include "support.hpp"
#include "volcast/date.hpp"

using volcast::Date;

TEST_CASE("parse accepts strict ISO dates only") {
  auto d = Date::parse("2018-02-28");
  REQUIRE(d);
  CHECK(d->year() == 2018);
  CHECK(d->month() == 2u);
  CHECK(d->day() == 28u);
  CHECK(d->iso() == "2018-02-28");
  CHECK_FALSE(Date::parse("2018-02-30"));
  CHECK_FALSE(Date::parse("2018-2-3"));
  CHECK_FALSE(Date::parse("2018/02/03"));
  CHECK_FALSE(Date::parse(" 2018-02-03"));
  CHECK_FALSE(Date::parse("2019-02-29"));
  CHECK(Date::parse("2020-02-29"));
}

TEST_CASE("weekday agrees with an independent formula over a decade") {
  for (auto d = test::ymd(2013, 1, 1); d <= test::ymd(2023, 12, 31); d = d + 1)
    REQUIRE(int(d.weekday()) == test::sakamoto_weekday(d.year(), int(d.month()), int(d.day())));
}

TEST_CASE("arithmetic and ordering") {
  const auto a = test::ymd(2020, 12, 31);
  CHECK((a + 1).iso() == "2021-01-01");
  CHECK((a - 366).iso() == "2019-12-31");
  CHECK((test::ymd(2021, 3, 1) - test::ymd(2021, 2, 1)) == 28);
  CHECK(a < a + 1);
  volcast::DateRange r{test::ymd(2018, 1, 1), test::ymd(2018, 12, 31)};
  CHECK(r.contains(test::ymd(2018, 6, 1)));
  CHECK_FALSE(r.contains(test::ymd(2019, 1, 1)));
}
