#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace defirisk {

/// A whole UTC calendar day. Rebalancing happens at its midnight.
using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DD`. Throws Error(ParseError) on anything else.
Date parse_date(std::string_view text);

std::string format_date(Date d);

/// Last calendar day of the month containing `d`.
Date month_end(Date d);

inline Date make_date(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

}  // namespace defirisk
