#include "sirdfit/objectives.hpp"

#include "sirdfit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sirdfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double metric_on_scaled_residuals(Metric metric, std::span<const double> observed, std::span<const double> predicted,
                                  double scale) {
    const std::size_t n = observed.size();
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = (observed[k] - predicted[k]) * scale;
        switch (metric) {
        case Metric::MXSE:
            acc = std::max(acc, e * e);
            break;
        case Metric::MSE:
            acc += e * e;
            break;
        case Metric::MAE:
            acc += std::fabs(e);
            break;
        case Metric::MAPE:
            break;
        }
    }
    if (metric == Metric::MSE || metric == Metric::MAE) {
        acc /= static_cast<double>(n);
    }
    return acc;
}

double mape(std::span<const double> observed, std::span<const double> predicted) {
    double acc = 0.0;
    std::size_t kept = 0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        if (observed[k] == 0.0) {
            continue; // no reference magnitude for this day
        }
        acc += std::fabs((observed[k] - predicted[k]) / observed[k]);
        ++kept;
    }
    if (kept == 0) {
        return kInf;
    }
    return 100.0 * acc / static_cast<double>(kept);
}

/// Contribution of one compartment to the joint objective. For the
/// normalizing metrics the residuals are rescaled exactly as the min-max
/// map rescales the series; a flat reported window falls back to
/// 1/max(1, |value|).
double compartment_cost(Metric metric, std::span<const double> observed, std::span<const double> predicted) {
    if (metric == Metric::MAPE) {
        return mape(observed, predicted);
    }
    const auto [lo, hi] = std::minmax_element(observed.begin(), observed.end());
    const double range = *hi - *lo;
    const double scale = range > 0.0 ? 1.0 / range : 1.0 / std::max(1.0, std::fabs(*lo));
    return metric_on_scaled_residuals(metric, observed, predicted, scale);
}

} // namespace

double metric_value(Metric metric, std::span<const double> observed, std::span<const double> predicted) {
    if (observed.empty() || observed.size() != predicted.size()) {
        throw Error("metric_value: series must be non-empty and of equal length");
    }
    if (metric == Metric::MAPE) {
        return mape(observed, predicted);
    }
    return metric_on_scaled_residuals(metric, observed, predicted, 1.0);
}

std::vector<double> minmax_normalize(std::span<const double> values, double ref_min, double ref_max) {
    if (!(ref_max > ref_min)) {
        throw DegenerateRangeError{};
    }
    std::vector<double> out(values.size());
    const double scale = 1.0 / (ref_max - ref_min);
    for (std::size_t k = 0; k < values.size(); ++k) {
        out[k] = (values[k] - ref_min) * scale;
    }
    return out;
}

double objective_value(const ObjectiveSpec& spec, const WindowSlice& observed, const Trajectory& predicted) {
    const std::size_t n = observed.deaths_cum.size();
    if (n == 0 || observed.infectious.size() != n || observed.recovered_cum.size() != n ||
        predicted.days() != n) {
        throw Error("objective_value: observed and predicted must cover the same days");
    }
    if (!predicted.finite) {
        return kInf;
    }

    std::vector<double> series(n);
    const auto compartment = [&](double SirdState::*member) -> std::span<const double> {
        for (std::size_t k = 0; k < n; ++k) {
            series[k] = predicted.states[k].*member;
        }
        return series;
    };

    if (spec.family == Family::DOnly) {
        return metric_value(spec.metric, observed.deaths_cum, compartment(&SirdState::D));
    }
    double worst = compartment_cost(spec.metric, observed.infectious, compartment(&SirdState::I));
    worst = std::max(worst, compartment_cost(spec.metric, observed.recovered_cum, compartment(&SirdState::R)));
    worst = std::max(worst, compartment_cost(spec.metric, observed.deaths_cum, compartment(&SirdState::D)));
    return worst;
}

double r_squared_d(std::span<const double> observed_d, std::span<const double> predicted_d) {
    if (observed_d.empty() || observed_d.size() != predicted_d.size()) {
        throw Error("r_squared_d: series must be non-empty and of equal length");
    }
    double mean = 0.0;
    for (const double y : observed_d) {
        mean += y;
    }
    mean /= static_cast<double>(observed_d.size());

    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t k = 0; k < observed_d.size(); ++k) {
        const double e = observed_d[k] - predicted_d[k];
        ss_res += e * e;
        const double c = observed_d[k] - mean;
        ss_tot += c * c;
    }
    if (ss_tot == 0.0) {
        throw ConstantObservedError{};
    }
    return 1.0 - ss_res / ss_tot;
}

ObjectiveSpec parse_objective(std::string_view name) {
    ObjectiveSpec spec;
    std::string_view metric = name;
    if (name.starts_with("d-")) {
        spec.family = Family::DOnly;
        metric = name.substr(2);
    } else if (name.starts_with("ird-")) {
        spec.family = Family::IRDJoint;
        metric = name.substr(4);
    } else {
        throw ParseError("unknown objective '" + std::string(name) + "'");
    }
    if (metric == "mxse") {
        spec.metric = Metric::MXSE;
    } else if (metric == "mse") {
        spec.metric = Metric::MSE;
    } else if (metric == "mae") {
        spec.metric = Metric::MAE;
    } else if (metric == "mape") {
        spec.metric = Metric::MAPE;
    } else {
        throw ParseError("unknown objective '" + std::string(name) + "'");
    }
    return spec;
}

std::string metric_name(Metric metric) {
    switch (metric) {
    case Metric::MXSE: return "mxse";
    case Metric::MSE: return "mse";
    case Metric::MAE: return "mae";
    default: return "mape";
    }
}

std::string objective_name(const ObjectiveSpec& spec) {
    return (spec.family == Family::DOnly ? "d-" : "ird-") + metric_name(spec.metric);
}

} // namespace sirdfit
