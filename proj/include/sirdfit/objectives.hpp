#pragma once

#include "sirdfit/model.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sirdfit {

enum class Metric { MXSE, MSE, MAE, MAPE };
enum class Family { DOnly, IRDJoint };

struct ObjectiveSpec {
    Family family = Family::IRDJoint;
    Metric metric = Metric::MXSE;
};

/// Low-level cost of predicted against observed:
///   MXSE  max squared error          MSE  mean squared error
///   MAE   mean absolute error        MAPE mean absolute percentage error
/// MAPE skips days whose observed value is zero and divides by the number
/// of days kept; it is +infinity when no day survives.
double metric_value(Metric metric, std::span<const double> observed, std::span<const double> predicted);

/// Affine map sending ref_min to 0 and ref_max to 1. Values outside the
/// reference range land outside [0,1] and are not clipped. Throws
/// DegenerateRangeError when ref_max == ref_min.
std::vector<double> minmax_normalize(std::span<const double> values, double ref_min, double ref_max);

/// Observed window slice the objective compares a trajectory against.
struct WindowSlice {
    std::span<const double> infectious;
    std::span<const double> recovered_cum;
    std::span<const double> deaths_cum;
};

/// Objective families over a fitted window:
///  - DOnly scores the deaths compartment with the chosen metric;
///  - IRDJoint takes the max over I, R, D, each min-max normalized by the
///    reported window range (MAPE is scale free and skips normalization).
/// A compartment whose reported range is zero contributes its metric on
/// residuals rescaled by 1/max(1, |reported value|). Non-finite
/// trajectories cost +infinity.
double objective_value(const ObjectiveSpec& spec, const WindowSlice& observed, const Trajectory& predicted);

/// Coefficient of determination on deaths; may be negative. Throws
/// ConstantObservedError when the observed series has zero variance.
double r_squared_d(std::span<const double> observed_d, std::span<const double> predicted_d);

/// Names used by the CLI: d-mxse ... ird-mape.
ObjectiveSpec parse_objective(std::string_view name);
std::string objective_name(const ObjectiveSpec& spec);
std::string metric_name(Metric metric);

} // namespace sirdfit
