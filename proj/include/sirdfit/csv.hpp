#pragma once

#include "sirdfit/timeseries.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sirdfit {

/// Shortest decimal string that round-trips the value. NaN prints as an
/// empty field, infinities as "inf"/"-inf".
std::string format_double(double value);

/// Parses `date,confirmed,recovered,deaths` with an ISO date column and
/// empty cells meaning "not reported". Errors carry 1-based line numbers.
RawSeries read_raw_csv(std::istream& in);
RawSeries read_raw_csv_file(const std::string& path);

/// Writes `date,infectious,recovered_cum,deaths_cum,new_cases`.
void write_epi_csv(std::ostream& out, const EpiSeries& series);
void write_epi_csv_file(const std::string& path, const EpiSeries& series);

/// Reads a preprocessed series back (the write_epi_csv format).
EpiSeries read_epi_csv(std::istream& in);
EpiSeries read_epi_csv_file(const std::string& path);

/// Row-oriented writer for the remaining output tables.
void write_table(std::ostream& out, const std::string& header, const std::vector<std::vector<std::string>>& rows);
void write_table_file(const std::string& path, const std::string& header,
                      const std::vector<std::vector<std::string>>& rows);

} // namespace sirdfit
