#pragma once

#include "sirdfit/dates.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sirdfit {

/// One reported day. A missing cell means the source did not publish a
/// value for that column on that date.
struct RawRecord {
    Date date{};
    std::optional<double> confirmed_cum;
    std::optional<double> recovered_cum;
    std::optional<double> deaths_cum;
};

/// Reported cumulative series as ingested: dates strictly increasing,
/// gaps allowed, every present count finite and >= 0.
struct RawSeries {
    std::vector<RawRecord> records;

    /// Throws EmptySeriesError / ParseError when the invariants above fail.
    void validate() const;
};

/// Cleaned per-day series on a dense daily grid. The infectious count
/// follows I(t) = I(t-1) + new_cases(t) - dR_cum(t) - dD_cum(t), where the
/// daily differences of the stored cumulative series equal the corrected
/// daily flows by construction.
struct EpiSeries {
    Date start_date{};
    std::vector<double> infectious;
    std::vector<double> recovered_cum;
    std::vector<double> deaths_cum;
    std::vector<double> new_cases;

    std::size_t size() const { return infectious.size(); }
    Date date_at(std::size_t day) const { return start_date + std::chrono::days(static_cast<int>(day)); }
};

/// Width of the smoothing window applied by smooth7.
inline constexpr int kSmoothingWindow = 7;

/// Counts of cells touched by the cleaning pipeline, reported by the
/// preprocess command.
struct CleaningStats {
    std::size_t interpolated_cells = 0;   // missing values filled by interpolation
    std::size_t negative_corrections = 0; // negative daily values replaced
    std::size_t outflow_corrections = 0;  // daily outflows capped to keep I >= 0
};

/// Expands the series to the full daily grid between its first and last
/// date and fills every missing interior value of each cumulative column
/// with the linear interpolant of its nearest present neighbours.
/// Present values are never changed, so the operation is idempotent.
RawSeries interpolate_missing(const RawSeries& raw, CleaningStats* stats = nullptr);

/// First differences of a cumulative series; the first output equals the
/// first input. Negative differences (reporting corrections) are replaced
/// by the nearest non-negative daily value to their left, or 0 when none
/// exists, so the result is element-wise >= 0.
std::vector<double> daily_from_cumulative(std::span<const double> cumulative, CleaningStats* stats = nullptr);

/// Trailing moving average: each output is the mean of the window of up to
/// `kSmoothingWindow` values ending at that day. Prefix days average over
/// the values that exist.
std::vector<double> moving_average7(std::span<const double> values);

/// Full cleaning pipeline: grid fill + interpolation, differencing with
/// negative correction, then the infectious-count recursion seeded with
/// I(0) = max(0, new(0) - recovered(0) - deaths(0)). When a day's reported
/// outflows would drive I below zero they are capped (recovered first,
/// then deaths) and the cumulative series rebuilt, so every value of the
/// result is >= 0 and the recursion holds exactly.
EpiSeries build_epi_series(const RawSeries& raw, CleaningStats* stats = nullptr);

/// Applies moving_average7 to all four series.
EpiSeries smooth7(const EpiSeries& series);

} // namespace sirdfit
