#pragma once

#include "sirdfit/model.hpp"
#include "sirdfit/objectives.hpp"
#include "sirdfit/pso.hpp"
#include "sirdfit/timeseries.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sirdfit {

/// Overlapping fitting windows: window i starts at day i*delta and spans
/// tau+1 daily observations.
struct WindowScheme {
    std::size_t tau = 35;
    std::size_t delta = 3;
};

struct Window {
    std::size_t index = 0;
    std::size_t start = 0;
    std::size_t length = 0; // tau + 1 days

    std::size_t last_day() const { return start + length - 1; }
};

/// Count = floor(1 + (T - tau)/delta) with T the last day index of the
/// series. Throws SchemeError when the series is shorter than one window.
std::vector<Window> make_windows(std::size_t n_days, const WindowScheme& scheme);

/// Box bounds for the 6-dim search [beta1, beta2, t1, t2, gamma, mu].
/// t1/t2 are window-local and capped at tau - t_margin.
struct ParamBounds {
    double beta_lo = 0.0, beta_hi = 10.0;
    double gamma_lo = 0.0, gamma_hi = 10.0;
    double mu_lo = 0.0, mu_hi = 10.0;
    std::size_t t_margin = 0;

    static ParamBounds stage1();
    static ParamBounds stage2();

    SearchBounds to_search_bounds(std::size_t tau) const;
    bool contains(const SirdParams& params, std::size_t tau) const;
};

SirdParams params_from_position(std::span<const double> position);

/// PSO repair hook: swaps the switch times when t1 > t2.
void repair_time_order(std::span<double> position);

struct FitSettings {
    ObjectiveSpec spec;
    ParamBounds bounds = ParamBounds::stage2();
    PsoConfig pso;
    double population = 0.0;
    int substeps = kDefaultSubsteps;
    int n_threads = 1;
};

struct FitResult {
    Window window;
    SirdParams params;
    ObjectiveSpec spec;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double r2_d = std::numeric_limits<double>::quiet_NaN();
    Trajectory trajectory; // window.length days
    bool ok = false;
    std::string failure;   // set when !ok
};

WindowSlice slice_window(const EpiSeries& data, const Window& window);

/// I, R, D from the reported first day; S = N - I - R - D. Throws
/// InsufficientPopulationError when S would be negative.
SirdState window_initial_state(const EpiSeries& data, std::size_t day, double population);

/// Batch cost evaluator for one window; owns copies of the observed slices
/// so it can outlive the series. Parallelizes over particles.
BatchObjective make_window_objective(const ObjectiveSpec& spec, const WindowSlice& observed, const SirdState& init,
                                     double population, int substeps, int n_threads);

/// Single-window calibration. Throws AllInfeasibleError when the swarm
/// never found a finite cost and InsufficientPopulationError on a bad N.
FitResult fit_window(const EpiSeries& data, const Window& window, const FitSettings& settings, std::uint64_t seed);

struct FitAllResult {
    std::vector<FitResult> fits; // one per window, failures included
    double mean_r2_d = 0.0;      // over successful windows with defined R^2
    std::size_t failed_count = 0;
};

/// Fits every window with seed mix_seed(base_seed, window index).
/// Per-window failures are recorded on the FitResult, not propagated.
FitAllResult fit_all_windows(const EpiSeries& data, const WindowScheme& scheme, const FitSettings& settings,
                             std::uint64_t base_seed);

/// Rank-based per-day band over the values contributed by every window
/// covering that day. band1 drops one extreme from each side (defined for
/// >= 3 samples, collapsed to outer below that), band2 drops two (NaN below
/// 5 samples).
struct Envelope {
    std::vector<std::size_t> count;
    std::vector<double> outer_lo, outer_hi;
    std::vector<double> band1_lo, band1_hi;
    std::vector<double> band2_lo, band2_hi;
    std::vector<double> median;

    std::size_t days() const { return count.size(); }
};

Envelope build_envelope(const std::vector<std::vector<double>>& values_per_day);

struct ParameterEnvelopes {
    Envelope beta;  // beta(t), time-varying within each window
    Envelope gamma; // constant per window
    Envelope mu;
    Envelope r0;    // beta(t)/(gamma+mu); non-finite values dropped
};

ParameterEnvelopes parameter_envelopes(std::span<const FitResult> fits, std::size_t n_days);

struct CompartmentEnvelopes {
    Envelope infectious;
    Envelope recovered;
    Envelope deaths;
};

CompartmentEnvelopes compartment_envelopes(std::span<const FitResult> fits, std::size_t n_days);

struct Forecast {
    std::size_t junction_day = 0; // absolute day index of forecast day 0
    std::size_t horizon = 0;
    Trajectory trajectory;        // horizon + 1 samples, day 0 = junction
};

/// Continues a fitted window for `horizon` days holding beta = beta2 and
/// the fitted gamma, mu. Throws NonFiniteError if the extension blows up.
Forecast forecast_extension(const FitResult& fit, std::size_t horizon, int substeps = kDefaultSubsteps);

/// Central 50/90/95% bands plus median per day, linear-interpolated
/// quantiles. Non-finite samples are dropped per day.
struct QuantileBands {
    std::vector<std::size_t> count;
    std::vector<double> median;
    std::vector<double> p50_lo, p50_hi;
    std::vector<double> p90_lo, p90_hi;
    std::vector<double> p95_lo, p95_hi;

    std::size_t days() const { return count.size(); }
};

struct ScalarBands {
    std::size_t count = 0;
    double median = 0.0;
    double p50_lo = 0.0, p50_hi = 0.0;
    double p90_lo = 0.0, p90_hi = 0.0;
    double p95_lo = 0.0, p95_hi = 0.0;
};

/// Linear-interpolated quantile of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

QuantileBands build_quantile_bands(const std::vector<std::vector<double>>& values_per_day);
ScalarBands build_scalar_bands(std::vector<double> values);

/// Repeated single-window calibration under different seeds. Compartment
/// bands cover the fitted days plus the forecast extension.
struct StabilityResult {
    Window window;
    std::size_t horizon = 0;
    std::size_t repetitions = 0;
    std::size_t failed = 0;
    QuantileBands beta; // window days
    QuantileBands r0;
    QuantileBands infectious; // window days + horizon
    QuantileBands recovered;
    QuantileBands deaths;
    ScalarBands gamma;
    ScalarBands mu;
    std::vector<FitResult> fits; // one per repetition
};

StabilityResult stability_study(const EpiSeries& data, const Window& window, const FitSettings& settings,
                                std::size_t repetitions, std::size_t horizon, std::uint64_t base_seed);

} // namespace sirdfit
