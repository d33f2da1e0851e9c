#include "aqlock/calendar.hpp"

#include <charconv>
#include <cstdio>

#include "aqlock/error.hpp"

namespace aqlock {

using namespace std::chrono;

Date::Date(int y, unsigned m, unsigned d) {
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) {
        throw Error(ErrorKind::Parse, "invalid calendar date " + std::to_string(y) + "-" +
                                          std::to_string(m) + "-" + std::to_string(d));
    }
    days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view iso) {
    auto fail = [&] { return Error(ErrorKind::Parse, "expected YYYY-MM-DD date, got '" + std::string(iso) + "'"); };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw fail();
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [&](std::size_t pos, std::size_t len, auto& v) {
        const auto res = std::from_chars(iso.data() + pos, iso.data() + pos + len, v);
        if (res.ec != std::errc{} || res.ptr != iso.data() + pos + len) throw fail();
    };
    num(0, 4, y);
    num(5, 2, m);
    num(8, 2, d);
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw fail();
    return Date(std::chrono::sys_days{ymd});
}

std::string Date::iso() const {
    const year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

int Date::year() const { return static_cast<int>(year_month_day{days_}.year()); }

int Date::day_of_year(int y) const {
    const std::chrono::sys_days jan1{std::chrono::year{y} / January / 1};
    return static_cast<int>((days_ - jan1).count());
}

bool is_leap_year(int y) { return std::chrono::year{y}.is_leap(); }

int days_in_year(int y) { return is_leap_year(y) ? 366 : 365; }

int periods_in_year(int y) { return (days_in_year(y) + 1) / 2; }

int period_of(const Date& date, int y) {
    const int doy = date.day_of_year(y);
    if (doy < 0 || doy >= days_in_year(y)) {
        throw Error(ErrorKind::Domain, "date " + date.iso() + " is outside year " + std::to_string(y));
    }
    return doy / 2;
}

Date period_start(int period_index, int y) {
    if (period_index < 0 || period_index >= periods_in_year(y)) {
        throw Error(ErrorKind::Domain, "period index " + std::to_string(period_index) + " out of range");
    }
    return Date(y, 1, 1).plus_days(2 * period_index);
}

}  // namespace aqlock
