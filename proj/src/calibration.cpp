#include "sirdfit/calibration.hpp"

#include "sirdfit/errors.hpp"
#include "sirdfit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

namespace sirdfit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void append_finite_sorted(std::vector<double>& out, const std::vector<double>& values) {
    out.clear();
    for (const double v : values) {
        if (std::isfinite(v)) {
            out.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
}

double median_sorted(std::span<const double> sorted) {
    const std::size_t k = sorted.size();
    if (k % 2 == 1) {
        return sorted[k / 2];
    }
    return 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
}

} // namespace

std::vector<Window> make_windows(std::size_t n_days, const WindowScheme& scheme) {
    if (scheme.tau < 1 || scheme.delta < 1) {
        throw SchemeError("window scheme needs tau >= 1 and delta >= 1");
    }
    if (n_days < scheme.tau + 1) {
        throw SchemeError("series has " + std::to_string(n_days) + " days; a window needs " +
                          std::to_string(scheme.tau + 1));
    }
    const std::size_t last_day = n_days - 1;
    const std::size_t count = 1 + (last_day - scheme.tau) / scheme.delta;
    std::vector<Window> windows(count);
    for (std::size_t i = 0; i < count; ++i) {
        windows[i] = Window{.index = i, .start = i * scheme.delta, .length = scheme.tau + 1};
    }
    return windows;
}

ParamBounds ParamBounds::stage1() {
    return ParamBounds{};
}

ParamBounds ParamBounds::stage2() {
    ParamBounds b;
    b.beta_hi = 2.0;
    b.gamma_hi = 1.0;
    b.mu_hi = 0.1;
    b.t_margin = 7;
    return b;
}

SearchBounds ParamBounds::to_search_bounds(std::size_t tau) const {
    if (t_margin > tau) {
        throw SchemeError("t_margin exceeds the window length");
    }
    const double t_hi = static_cast<double>(tau - t_margin);
    return SearchBounds{
        .lower = {beta_lo, beta_lo, 0.0, 0.0, gamma_lo, mu_lo},
        .upper = {beta_hi, beta_hi, t_hi, t_hi, gamma_hi, mu_hi},
    };
}

bool ParamBounds::contains(const SirdParams& p, std::size_t tau) const {
    const double t_hi = static_cast<double>(tau) - static_cast<double>(t_margin);
    return p.beta1 >= beta_lo && p.beta1 <= beta_hi && p.beta2 >= beta_lo && p.beta2 <= beta_hi && p.t1 >= 0.0 &&
           p.t2 >= p.t1 && p.t2 <= t_hi && p.gamma >= gamma_lo && p.gamma <= gamma_hi && p.mu >= mu_lo &&
           p.mu <= mu_hi;
}

SirdParams params_from_position(std::span<const double> x) {
    return SirdParams{.beta1 = x[0], .beta2 = x[1], .t1 = x[2], .t2 = x[3], .gamma = x[4], .mu = x[5]};
}

void repair_time_order(std::span<double> position) {
    if (position[2] > position[3]) {
        std::swap(position[2], position[3]);
    }
}

WindowSlice slice_window(const EpiSeries& data, const Window& window) {
    if (window.length == 0 || window.start + window.length > data.size()) {
        throw SchemeError("window " + std::to_string(window.index) + " falls outside the series");
    }
    return WindowSlice{
        .infectious = std::span(data.infectious).subspan(window.start, window.length),
        .recovered_cum = std::span(data.recovered_cum).subspan(window.start, window.length),
        .deaths_cum = std::span(data.deaths_cum).subspan(window.start, window.length),
    };
}

SirdState window_initial_state(const EpiSeries& data, std::size_t day, double population) {
    if (day >= data.size()) {
        throw SchemeError("initial day outside the series");
    }
    const double I = data.infectious[day];
    const double R = data.recovered_cum[day];
    const double D = data.deaths_cum[day];
    const double S = population - I - R - D;
    if (S < 0.0) {
        throw InsufficientPopulationError("population smaller than I+R+D at day " + std::to_string(day));
    }
    return SirdState{.S = S, .I = I, .R = R, .D = D};
}

BatchObjective make_window_objective(const ObjectiveSpec& spec, const WindowSlice& observed, const SirdState& init,
                                     double population, int substeps, int n_threads) {
    struct Job {
        ObjectiveSpec spec;
        std::vector<double> infectious, recovered, deaths;
        SirdState init;
        double population;
        int substeps;
        int n_threads;
    };
    auto job = std::make_shared<Job>(Job{
        .spec = spec,
        .infectious = {observed.infectious.begin(), observed.infectious.end()},
        .recovered = {observed.recovered_cum.begin(), observed.recovered_cum.end()},
        .deaths = {observed.deaths_cum.begin(), observed.deaths_cum.end()},
        .init = init,
        .population = population,
        .substeps = substeps,
        .n_threads = n_threads,
    });
    return [job](std::span<const double> positions, std::size_t dim, std::span<double> costs) {
        if (dim != 6 || positions.size() != costs.size() * dim) {
            throw Error("window objective expects 6-dim positions");
        }
        const WindowSlice slice{job->infectious, job->recovered, job->deaths};
        const int n_days = static_cast<int>(job->infectious.size());
        parallel_for(costs.size(), job->n_threads, [&](std::size_t begin, std::size_t end) {
            Trajectory scratch;
            for (std::size_t k = begin; k < end; ++k) {
                const SirdParams params = params_from_position(positions.subspan(k * 6, 6));
                integrate_euler_into(params, job->init, job->population, n_days, job->substeps, scratch);
                costs[k] = objective_value(job->spec, slice, scratch);
            }
        });
    };
}

FitResult fit_window(const EpiSeries& data, const Window& window, const FitSettings& settings, std::uint64_t seed) {
    const WindowSlice observed = slice_window(data, window);
    const SirdState init = window_initial_state(data, window.start, settings.population);
    const std::size_t tau = window.length - 1;

    PsoConfig pso = settings.pso;
    pso.seed = seed;
    const SearchBounds bounds = settings.bounds.to_search_bounds(tau);
    const BatchObjective objective =
        make_window_objective(settings.spec, observed, init, settings.population, settings.substeps,
                              settings.n_threads);
    const PsoResult best = optimize(pso, bounds, objective, repair_time_order);

    FitResult fit;
    fit.window = window;
    fit.spec = settings.spec;
    fit.params = params_from_position(best.best_position);
    fit.objective = best.best_cost;
    fit.trajectory = integrate_euler(fit.params, init, settings.population, static_cast<int>(window.length),
                                     settings.substeps);
    std::vector<double> predicted_d(window.length);
    for (std::size_t k = 0; k < window.length; ++k) {
        predicted_d[k] = fit.trajectory.states[k].D;
    }
    try {
        fit.r2_d = r_squared_d(observed.deaths_cum, predicted_d);
    } catch (const ConstantObservedError&) {
        fit.r2_d = kNaN; // flat reported deaths leave R^2 undefined
    }
    fit.ok = true;
    return fit;
}

FitAllResult fit_all_windows(const EpiSeries& data, const WindowScheme& scheme, const FitSettings& settings,
                             std::uint64_t base_seed) {
    FitAllResult result;
    const std::vector<Window> windows = make_windows(data.size(), scheme);
    result.fits.reserve(windows.size());
    double r2_sum = 0.0;
    std::size_t r2_count = 0;
    for (const Window& window : windows) {
        try {
            result.fits.push_back(fit_window(data, window, settings, mix_seed(base_seed, window.index)));
            const double r2 = result.fits.back().r2_d;
            if (std::isfinite(r2)) {
                r2_sum += r2;
                ++r2_count;
            }
        } catch (const Error& e) {
            FitResult failed;
            failed.window = window;
            failed.spec = settings.spec;
            failed.failure = e.what();
            result.fits.push_back(std::move(failed));
            ++result.failed_count;
        }
    }
    result.mean_r2_d = r2_count > 0 ? r2_sum / static_cast<double>(r2_count) : kNaN;
    return result;
}

Envelope build_envelope(const std::vector<std::vector<double>>& values_per_day) {
    const std::size_t n_days = values_per_day.size();
    Envelope env;
    env.count.assign(n_days, 0);
    for (auto* v : {&env.outer_lo, &env.outer_hi, &env.band1_lo, &env.band1_hi, &env.band2_lo, &env.band2_hi,
                    &env.median}) {
        v->assign(n_days, kNaN);
    }
    std::vector<double> sorted;
    for (std::size_t day = 0; day < n_days; ++day) {
        append_finite_sorted(sorted, values_per_day[day]);
        const std::size_t k = sorted.size();
        env.count[day] = k;
        if (k == 0) {
            continue;
        }
        env.outer_lo[day] = sorted.front();
        env.outer_hi[day] = sorted.back();
        env.band1_lo[day] = k >= 3 ? sorted[1] : sorted.front();
        env.band1_hi[day] = k >= 3 ? sorted[k - 2] : sorted.back();
        if (k >= 5) {
            env.band2_lo[day] = sorted[2];
            env.band2_hi[day] = sorted[k - 3];
        }
        env.median[day] = median_sorted(sorted);
    }
    return env;
}

ParameterEnvelopes parameter_envelopes(std::span<const FitResult> fits, std::size_t n_days) {
    std::vector<std::vector<double>> beta(n_days), gamma(n_days), mu(n_days), r0(n_days);
    for (const FitResult& fit : fits) {
        if (!fit.ok) {
            continue;
        }
        const double rate = fit.params.gamma + fit.params.mu;
        for (std::size_t local = 0; local < fit.window.length; ++local) {
            const std::size_t day = fit.window.start + local;
            if (day >= n_days) {
                break;
            }
            const double b = beta_at(fit.params, static_cast<double>(local));
            beta[day].push_back(b);
            gamma[day].push_back(fit.params.gamma);
            mu[day].push_back(fit.params.mu);
            r0[day].push_back(rate > 0.0 ? b / rate : kNaN);
        }
    }
    return ParameterEnvelopes{
        .beta = build_envelope(beta),
        .gamma = build_envelope(gamma),
        .mu = build_envelope(mu),
        .r0 = build_envelope(r0),
    };
}

CompartmentEnvelopes compartment_envelopes(std::span<const FitResult> fits, std::size_t n_days) {
    std::vector<std::vector<double>> I(n_days), R(n_days), D(n_days);
    for (const FitResult& fit : fits) {
        if (!fit.ok) {
            continue;
        }
        for (std::size_t local = 0; local < fit.window.length && local < fit.trajectory.days(); ++local) {
            const std::size_t day = fit.window.start + local;
            if (day >= n_days) {
                break;
            }
            const SirdState& s = fit.trajectory.states[local];
            I[day].push_back(s.I);
            R[day].push_back(s.R);
            D[day].push_back(s.D);
        }
    }
    return CompartmentEnvelopes{
        .infectious = build_envelope(I),
        .recovered = build_envelope(R),
        .deaths = build_envelope(D),
    };
}

Forecast forecast_extension(const FitResult& fit, std::size_t horizon, int substeps) {
    if (!fit.ok || fit.trajectory.days() == 0) {
        throw Error("cannot extend a failed fit");
    }
    if (!fit.trajectory.finite) {
        throw NonFiniteError{};
    }
    const SirdParams held{
        .beta1 = fit.params.beta2,
        .beta2 = fit.params.beta2,
        .t1 = 0.0,
        .t2 = 0.0,
        .gamma = fit.params.gamma,
        .mu = fit.params.mu,
    };
    Forecast forecast;
    forecast.junction_day = fit.window.last_day();
    forecast.horizon = horizon;
    forecast.trajectory = integrate_euler(held, fit.trajectory.states.back(), fit.trajectory.population,
                                          static_cast<int>(horizon) + 1, substeps);
    if (!forecast.trajectory.finite) {
        throw NonFiniteError{};
    }
    return forecast;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        return kNaN;
    }
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

QuantileBands build_quantile_bands(const std::vector<std::vector<double>>& values_per_day) {
    const std::size_t n_days = values_per_day.size();
    QuantileBands bands;
    bands.count.assign(n_days, 0);
    for (auto* v : {&bands.median, &bands.p50_lo, &bands.p50_hi, &bands.p90_lo, &bands.p90_hi, &bands.p95_lo,
                    &bands.p95_hi}) {
        v->assign(n_days, kNaN);
    }
    std::vector<double> sorted;
    for (std::size_t day = 0; day < n_days; ++day) {
        append_finite_sorted(sorted, values_per_day[day]);
        bands.count[day] = sorted.size();
        if (sorted.empty()) {
            continue;
        }
        bands.median[day] = quantile_sorted(sorted, 0.5);
        bands.p50_lo[day] = quantile_sorted(sorted, 0.25);
        bands.p50_hi[day] = quantile_sorted(sorted, 0.75);
        bands.p90_lo[day] = quantile_sorted(sorted, 0.05);
        bands.p90_hi[day] = quantile_sorted(sorted, 0.95);
        bands.p95_lo[day] = quantile_sorted(sorted, 0.025);
        bands.p95_hi[day] = quantile_sorted(sorted, 0.975);
    }
    return bands;
}

ScalarBands build_scalar_bands(std::vector<double> values) {
    std::vector<double> sorted;
    append_finite_sorted(sorted, values);
    ScalarBands bands;
    bands.count = sorted.size();
    bands.median = quantile_sorted(sorted, 0.5);
    bands.p50_lo = quantile_sorted(sorted, 0.25);
    bands.p50_hi = quantile_sorted(sorted, 0.75);
    bands.p90_lo = quantile_sorted(sorted, 0.05);
    bands.p90_hi = quantile_sorted(sorted, 0.95);
    bands.p95_lo = quantile_sorted(sorted, 0.025);
    bands.p95_hi = quantile_sorted(sorted, 0.975);
    return bands;
}

StabilityResult stability_study(const EpiSeries& data, const Window& window, const FitSettings& settings,
                                std::size_t repetitions, std::size_t horizon, std::uint64_t base_seed) {
    if (repetitions < 1) {
        throw Error("stability study needs at least one repetition");
    }
    StabilityResult out;
    out.window = window;
    out.horizon = horizon;
    out.repetitions = repetitions;

    const std::size_t window_days = window.length;
    const std::size_t total_days = window_days + horizon;
    std::vector<std::vector<double>> beta(window_days), r0(window_days);
    std::vector<std::vector<double>> I(total_days), R(total_days), D(total_days);
    std::vector<double> gammas, mus;
    out.fits.reserve(repetitions);

    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        try {
            FitResult fit = fit_window(data, window, settings, mix_seed(base_seed, rep));
            const Forecast forecast = forecast_extension(fit, horizon, settings.substeps);
            const double rate = fit.params.gamma + fit.params.mu;
            for (std::size_t local = 0; local < window_days; ++local) {
                const double b = beta_at(fit.params, static_cast<double>(local));
                beta[local].push_back(b);
                r0[local].push_back(rate > 0.0 ? b / rate : kNaN);
                const SirdState& s = fit.trajectory.states[local];
                I[local].push_back(s.I);
                R[local].push_back(s.R);
                D[local].push_back(s.D);
            }
            for (std::size_t k = 1; k <= horizon; ++k) {
                const SirdState& s = forecast.trajectory.states[k];
                I[window_days - 1 + k].push_back(s.I);
                R[window_days - 1 + k].push_back(s.R);
                D[window_days - 1 + k].push_back(s.D);
            }
            gammas.push_back(fit.params.gamma);
            mus.push_back(fit.params.mu);
            out.fits.push_back(std::move(fit));
        } catch (const Error& e) {
            FitResult failed;
            failed.window = window;
            failed.spec = settings.spec;
            failed.failure = e.what();
            out.fits.push_back(std::move(failed));
            ++out.failed;
        }
    }

    out.beta = build_quantile_bands(beta);
    out.r0 = build_quantile_bands(r0);
    out.infectious = build_quantile_bands(I);
    out.recovered = build_quantile_bands(R);
    out.deaths = build_quantile_bands(D);
    out.gamma = build_scalar_bands(std::move(gammas));
    out.mu = build_scalar_bands(std::move(mus));
    return out;
}

} // namespace sirdfit
