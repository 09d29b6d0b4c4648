#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace distress {

using Date = std::chrono::year_month_day;

// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws InvalidArgument.
Date parse_date(std::string_view text);

std::string format_date(const Date& date);

// Signed calendar-day difference to - from.
long days_between(const Date& from, const Date& to);

Date add_days(const Date& date, long days);

}  // namespace distress
