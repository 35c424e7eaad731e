#include "sirdfit/csv.hpp"

#include "sirdfit/dates.hpp"
#include "sirdfit/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace sirdfit {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_number(std::string_view field, std::size_t line_no, const char* column) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + column + " value '" + std::string(field) +
                         "'");
    }
    return value;
}

std::optional<double> parse_optional(std::string_view field, std::size_t line_no, const char* column) {
    if (field.empty()) {
        return std::nullopt;
    }
    return parse_number(field, line_no, column);
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) {
        return false;
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return true;
}

void expect_header(std::string_view got, std::string_view want) {
    auto fields = split_fields(got);
    auto expected = split_fields(want);
    bool ok = fields.size() == expected.size();
    for (std::size_t k = 0; ok && k < fields.size(); ++k) {
        ok = strip(fields[k]) == expected[k];
    }
    if (!ok) {
        throw ParseError("line 1: expected header '" + std::string(want) + "'");
    }
}

} // namespace

std::string format_double(double value) {
    if (std::isnan(value)) {
        return {};
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    std::array<char, 32> buf;
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

RawSeries read_raw_csv(std::istream& in) {
    std::string line;
    if (!read_line(in, line)) {
        throw ParseError("line 1: empty input");
    }
    expect_header(line, "date,confirmed,recovered,deaths");

    RawSeries series;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (strip(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 4) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        }
        RawRecord rec;
        try {
            rec.date = parse_date(strip(fields[0]));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        rec.confirmed_cum = parse_optional(strip(fields[1]), line_no, "confirmed");
        rec.recovered_cum = parse_optional(strip(fields[2]), line_no, "recovered");
        rec.deaths_cum = parse_optional(strip(fields[3]), line_no, "deaths");
        series.records.push_back(rec);
    }
    series.validate();
    return series;
}

RawSeries read_raw_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    try {
        return read_raw_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_epi_csv(std::ostream& out, const EpiSeries& series) {
    out << "date,infectious,recovered_cum,deaths_cum,new_cases\n";
    for (std::size_t t = 0; t < series.size(); ++t) {
        out << format_date(series.date_at(t)) << ',' << format_double(series.infectious[t]) << ','
            << format_double(series.recovered_cum[t]) << ',' << format_double(series.deaths_cum[t]) << ','
            << format_double(series.new_cases[t]) << '\n';
    }
}

void write_epi_csv_file(const std::string& path, const EpiSeries& series) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    write_epi_csv(out, series);
}

EpiSeries read_epi_csv(std::istream& in) {
    std::string line;
    if (!read_line(in, line)) {
        throw ParseError("line 1: empty input");
    }
    expect_header(line, "date,infectious,recovered_cum,deaths_cum,new_cases");

    EpiSeries series;
    std::size_t line_no = 1;
    std::optional<Date> prev;
    while (read_line(in, line)) {
        ++line_no;
        if (strip(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 5) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                             std::to_string(fields.size()));
        }
        Date date;
        try {
            date = parse_date(strip(fields[0]));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (prev && days_between(*prev, date) != 1) {
            throw ParseError("line " + std::to_string(line_no) + ": dates must advance by one day");
        }
        if (!prev) {
            series.start_date = date;
        }
        prev = date;
        series.infectious.push_back(parse_number(strip(fields[1]), line_no, "infectious"));
        series.recovered_cum.push_back(parse_number(strip(fields[2]), line_no, "recovered_cum"));
        series.deaths_cum.push_back(parse_number(strip(fields[3]), line_no, "deaths_cum"));
        series.new_cases.push_back(parse_number(strip(fields[4]), line_no, "new_cases"));
    }
    if (series.size() == 0) {
        throw EmptySeriesError{};
    }
    return series;
}

EpiSeries read_epi_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    try {
        return read_epi_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_table(std::ostream& out, const std::string& header, const std::vector<std::vector<std::string>>& rows) {
    out << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k > 0) {
                out << ',';
            }
            out << row[k];
        }
        out << '\n';
    }
}

void write_table_file(const std::string& path, const std::string& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    write_table(out, header, rows);
}

} // namespace sirdfit
