#include <doctest.h>

#include <sstream>

#include "aqlock/calendar.hpp"
#include "aqlock/csv.hpp"
#include "helpers.hpp"

using namespace aqlock;

TEST_CASE("leap years and period counts") {
    CHECK(is_leap_year(2020));
    CHECK_FALSE(is_leap_year(2021));
    CHECK_FALSE(is_leap_year(1900));
    CHECK(is_leap_year(2000));
    CHECK(periods_in_year(2020) == 183);
    CHECK(periods_in_year(2021) == 183);
}

TEST_CASE("period_of maps days onto 2-day periods") {
    CHECK(period_of(Date(2020, 1, 1), 2020) == 0);
    CHECK(period_of(Date(2020, 1, 2), 2020) == 0);
    CHECK(period_of(Date(2020, 1, 3), 2020) == 1);
    CHECK(period_of(Date(2020, 12, 30), 2020) == 182);
    CHECK(period_of(Date(2020, 12, 31), 2020) == 182);
    // The last period of a common year is a single day.
    CHECK(period_of(Date(2021, 12, 31), 2021) == 182);
    CHECK(period_of(Date(2021, 12, 30), 2021) == 181);
    CHECK_THROWS_KIND(period_of(Date(2021, 1, 1), 2020), ErrorKind::Domain);
    CHECK_THROWS_KIND(period_of(Date(2019, 12, 31), 2020), ErrorKind::Domain);
}

TEST_CASE("period_start inverts period_of") {
    for (int year : {2020, 2021}) {
        for (int p = 0; p < periods_in_year(year); ++p) {
            CHECK(period_of(period_start(p, year), year) == p);
        }
    }
    CHECK(period_start(182, 2020) == Date(2020, 12, 30));
    CHECK_THROWS_KIND(period_start(183, 2020), ErrorKind::Domain);
    CHECK_THROWS_KIND(period_start(-1, 2020), ErrorKind::Domain);
}

TEST_CASE("date parsing") {
    CHECK(Date::parse("2020-02-29") == Date(2020, 2, 29));
    CHECK(Date::parse("2020-02-29").iso() == "2020-02-29");
    CHECK(Date(2020, 3, 1).day_of_year(2020) == 60);
    for (const char* bad : {"2021-02-29", "2020-2-01", "20200201", "2020-13-01", "", "2020-01-01x"}) {
        CHECK_THROWS_KIND(Date::parse(bad), ErrorKind::Parse);
    }
}

TEST_CASE("csv field splitting and escaping") {
    CHECK(csv::split_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(csv::split_line("\"x,y\",\"he said \"\"hi\"\"\"") == std::vector<std::string>{"x,y", "he said \"hi\""});
    CHECK(csv::escape("plain") == "plain");
    CHECK(csv::escape("a,b") == "\"a,b\"");
    std::istringstream in("h1,h2\r\n1,2\r\n\r\n3,\"4\"\n");
    const auto t = csv::parse(in);
    CHECK(t.header == std::vector<std::string>{"h1", "h2"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][1] == "4");
    CHECK(t.line_numbers[1] == 4);
    CHECK(t.column("h2") == 1u);
    CHECK_FALSE(t.column("nope").has_value());
    std::istringstream empty("");
    CHECK_THROWS_KIND(csv::parse(empty), ErrorKind::EmptyInput);
}

TEST_CASE("doubles round-trip through their text form") {
    SplitMix64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.below(40)) - 20.0);
        const auto back = csv::parse_double(csv::format_double(v));
        REQUIRE(back.has_value());
        CHECK(*back == v);
    }
    CHECK_FALSE(csv::parse_double("1.5x").has_value());
    CHECK_FALSE(csv::parse_double("").has_value());
}
