#include "sirdfit/dates.hpp"

#include "sirdfit/errors.hpp"

#include <charconv>
#include <cstdio>

namespace sirdfit {

namespace {

int parse_int(std::string_view text, std::size_t pos, std::size_t len) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
    if (ec != std::errc{} || ptr != text.data() + pos + len) {
        throw ParseError("bad date '" + std::string(text) + "': expected YYYY-MM-DD");
    }
    return value;
}

} // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw ParseError("bad date '" + std::string(text) + "': expected YYYY-MM-DD");
    }
    const int y = parse_int(text, 0, 4);
    const int m = parse_int(text, 5, 2);
    const int d = parse_int(text, 8, 2);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        throw ParseError("invalid calendar day '" + std::string(text) + "'");
    }
    return Date{ymd};
}

std::string format_date(Date day) {
    const std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

} // namespace sirdfit
