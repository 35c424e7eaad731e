#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace sirdfit {

/// Calendar day, stored as days since the civil epoch.
using Date = std::chrono::sys_days;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws ParseError on
/// malformed input or an invalid calendar day.
Date parse_date(std::string_view text);

std::string format_date(Date day);

inline int days_between(Date from, Date to) {
    return static_cast<int>((to - from).count());
}

} // namespace sirdfit
