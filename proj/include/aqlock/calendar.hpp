#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace aqlock {

/// Calendar date without time zone; treated as an opaque day label.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    /// Parses YYYY-MM-DD; throws Error{Parse} on anything else.
    static Date parse(std::string_view iso);

    std::string iso() const;
    int year() const;
    std::chrono::sys_days sys_days() const { return days_; }

    /// 0-based day index counted from Jan 1 of `year`.
    int day_of_year(int year) const;

    Date plus_days(int n) const { return Date(days_ + std::chrono::days{n}); }

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

bool is_leap_year(int year);
int days_in_year(int year);

/// Number of 2-day periods in a year: 183 for both leap (366 days) and
/// common (365 days, last period one day long) years.
int periods_in_year(int year);

/// Period p covers days [2p, 2p+1] counted from Jan 1.
int period_of(const Date& date, int year);
Date period_start(int period_index, int year);

}  // namespace aqlock
