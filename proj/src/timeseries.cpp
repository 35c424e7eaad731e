#include "sirdfit/timeseries.hpp"

#include "sirdfit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sirdfit {

namespace {

const char* column_name(int col) {
    switch (col) {
    case 0: return "confirmed";
    case 1: return "recovered";
    default: return "deaths";
    }
}

std::optional<double> RawRecord::* column_member(int col) {
    switch (col) {
    case 0: return &RawRecord::confirmed_cum;
    case 1: return &RawRecord::recovered_cum;
    default: return &RawRecord::deaths_cum;
    }
}

} // namespace

void RawSeries::validate() const {
    if (records.empty()) {
        throw EmptySeriesError{};
    }
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& rec = records[k];
        if (k > 0 && rec.date <= records[k - 1].date) {
            throw ParseError("dates must be strictly increasing (violated at " + format_date(rec.date) + ")");
        }
        for (int col = 0; col < 3; ++col) {
            const auto& cell = rec.*column_member(col);
            if (cell && (!std::isfinite(*cell) || *cell < 0.0)) {
                throw ParseError(std::string(column_name(col)) + " at " + format_date(rec.date) +
                                 " is negative or not finite");
            }
        }
    }
}

RawSeries interpolate_missing(const RawSeries& raw, CleaningStats* stats) {
    raw.validate();
    const Date first = raw.records.front().date;
    const Date last = raw.records.back().date;
    const std::size_t n = static_cast<std::size_t>(days_between(first, last)) + 1;

    RawSeries grid;
    grid.records.resize(n);
    for (std::size_t day = 0; day < n; ++day) {
        grid.records[day].date = first + std::chrono::days(static_cast<int>(day));
    }
    for (const auto& rec : raw.records) {
        grid.records[static_cast<std::size_t>(days_between(first, rec.date))] = rec;
    }

    for (int col = 0; col < 3; ++col) {
        auto member = column_member(col);
        if (!(grid.records.front().*member) || !(grid.records.back().*member)) {
            throw MissingEndpointError(std::string("column '") + column_name(col) +
                                       "' has no value at the first or last date");
        }
        std::size_t prev = 0;
        for (std::size_t day = 1; day < n; ++day) {
            if (!(grid.records[day].*member)) {
                continue;
            }
            if (day > prev + 1) {
                const double lo = *(grid.records[prev].*member);
                const double hi = *(grid.records[day].*member);
                const double slope = (hi - lo) / static_cast<double>(day - prev);
                for (std::size_t k = prev + 1; k < day; ++k) {
                    grid.records[k].*member = lo + slope * static_cast<double>(k - prev);
                    if (stats) {
                        ++stats->interpolated_cells;
                    }
                }
            }
            prev = day;
        }
    }
    return grid;
}

std::vector<double> daily_from_cumulative(std::span<const double> cumulative, CleaningStats* stats) {
    std::vector<double> daily(cumulative.size());
    if (cumulative.empty()) {
        return daily;
    }
    daily[0] = cumulative[0];
    for (std::size_t k = 1; k < cumulative.size(); ++k) {
        daily[k] = cumulative[k] - cumulative[k - 1];
    }
    for (std::size_t k = 0; k < daily.size(); ++k) {
        if (daily[k] < 0.0) {
            daily[k] = k > 0 ? daily[k - 1] : 0.0; // corrected values are already >= 0
            if (stats) {
                ++stats->negative_corrections;
            }
        }
    }
    return daily;
}

std::vector<double> moving_average7(std::span<const double> values) {
    std::vector<double> out(values.size());
    double window_sum = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        window_sum += values[k];
        if (k >= static_cast<std::size_t>(kSmoothingWindow)) {
            window_sum -= values[k - kSmoothingWindow];
        }
        const auto width = std::min<std::size_t>(k + 1, kSmoothingWindow);
        out[k] = window_sum / static_cast<double>(width);
    }
    return out;
}

EpiSeries build_epi_series(const RawSeries& raw, CleaningStats* stats) {
    const RawSeries grid = interpolate_missing(raw, stats);
    const std::size_t n = grid.records.size();

    std::vector<double> confirmed(n), recovered(n), deaths(n);
    for (std::size_t day = 0; day < n; ++day) {
        confirmed[day] = *grid.records[day].confirmed_cum;
        recovered[day] = *grid.records[day].recovered_cum;
        deaths[day] = *grid.records[day].deaths_cum;
    }

    EpiSeries out;
    out.start_date = grid.records.front().date;
    out.new_cases = daily_from_cumulative(confirmed, stats);
    std::vector<double> recovered_daily = daily_from_cumulative(recovered, stats);
    std::vector<double> deaths_daily = daily_from_cumulative(deaths, stats);

    out.infectious.resize(n);
    out.infectious[0] = std::max(0.0, out.new_cases[0] - recovered_daily[0] - deaths_daily[0]);
    for (std::size_t t = 1; t < n; ++t) {
        double next = out.infectious[t - 1] + out.new_cases[t] - recovered_daily[t] - deaths_daily[t];
        if (next < 0.0) {
            // More people left the infectious pool than were in it: cap the
            // day's outflows, recovered first, and keep I at zero.
            double deficit = -next;
            const double from_recovered = std::min(recovered_daily[t], deficit);
            recovered_daily[t] -= from_recovered;
            deficit -= from_recovered;
            deaths_daily[t] -= std::min(deaths_daily[t], deficit);
            next = 0.0;
            if (stats) {
                ++stats->outflow_corrections;
            }
        }
        out.infectious[t] = next;
    }

    out.recovered_cum.resize(n);
    out.deaths_cum.resize(n);
    std::partial_sum(recovered_daily.begin(), recovered_daily.end(), out.recovered_cum.begin());
    std::partial_sum(deaths_daily.begin(), deaths_daily.end(), out.deaths_cum.begin());
    return out;
}

EpiSeries smooth7(const EpiSeries& series) {
    EpiSeries out;
    out.start_date = series.start_date;
    out.infectious = moving_average7(series.infectious);
    out.recovered_cum = moving_average7(series.recovered_cum);
    out.deaths_cum = moving_average7(series.deaths_cum);
    out.new_cases = moving_average7(series.new_cases);
    return out;
}

} // namespace sirdfit
