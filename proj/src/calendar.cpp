#include "distress/calendar.hpp"

#include "distress/errors.hpp"

#include <charconv>

#include <fmt/format.h>

namespace distress {

namespace {

int parse_int(std::string_view text, std::string_view whole)
{
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(Errc::InvalidArgument, fmt::format("not an ISO date: '{}'", whole));
    }
    return value;
}

}  // namespace

Date parse_date(std::string_view text)
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error(Errc::InvalidArgument, fmt::format("not an ISO date: '{}'", text));
    }
    const int y = parse_int(text.substr(0, 4), text);
    const int m = parse_int(text.substr(5, 2), text);
    const int d = parse_int(text.substr(8, 2), text);
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        throw Error(Errc::InvalidArgument, fmt::format("invalid calendar date: '{}'", text));
    }
    return date;
}

std::string format_date(const Date& date)
{
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()),
                       static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
}

long days_between(const Date& from, const Date& to)
{
    return (std::chrono::sys_days{to} - std::chrono::sys_days{from}).count();
}

Date add_days(const Date& date, long days)
{
    return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

}  // namespace distress
