#include "doctest.h"

#include "sirdfit/calibration.hpp"
#include "sirdfit/errors.hpp"
#include "synthetic.hpp"

#include <cmath>
#include <random>

using namespace sirdfit;
using sirdfit::testing::Generator;
using sirdfit::testing::synthetic_series;

namespace {

FitResult made_fit(std::size_t index, std::size_t start, std::size_t length, double beta, double gamma, double mu) {
    FitResult fit;
    fit.window = Window{.index = index, .start = start, .length = length};
    fit.params = SirdParams{.beta1 = beta, .beta2 = beta, .t1 = 0.0, .t2 = 0.0, .gamma = gamma, .mu = mu};
    fit.ok = true;
    return fit;
}

FitSettings small_swarm_settings(double population, std::size_t particles, std::size_t iters) {
    FitSettings s;
    s.population = population;
    s.pso.n_particles = particles;
    s.pso.max_iters = iters;
    return s;
}

} // namespace

TEST_SUITE("calibration") {

TEST_CASE("window formula matches the examples") {
    const auto many = make_windows(450, WindowScheme{.tau = 35, .delta = 3});
    CHECK(many.size() == 139);
    CHECK(many.front().start == 0);
    CHECK(many.back().start == 414);
    CHECK(many.front().length == 36);

    const auto single = make_windows(36, WindowScheme{.tau = 35, .delta = 3});
    CHECK(single.size() == 1);

    const auto two = make_windows(41, WindowScheme{.tau = 35, .delta = 3});
    REQUIRE(two.size() == 2);
    CHECK(two[0].start == 0);
    CHECK(two[1].start == 3);

    CHECK_THROWS_AS(make_windows(35, WindowScheme{.tau = 35, .delta = 3}), SchemeError);
    CHECK_THROWS_AS(make_windows(100, WindowScheme{.tau = 0, .delta = 3}), SchemeError);
    CHECK_THROWS_AS(make_windows(100, WindowScheme{.tau = 5, .delta = 0}), SchemeError);
}

TEST_CASE("window formula agrees with brute-force enumeration") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t tau = 1 + rng() % 50;
        const std::size_t delta = 1 + rng() % 10;
        const std::size_t n_days = tau + 1 + rng() % 150;
        const auto windows = make_windows(n_days, WindowScheme{.tau = tau, .delta = delta});

        std::vector<std::size_t> starts;
        for (std::size_t s = 0; s + tau <= n_days - 1; s += delta) {
            starts.push_back(s);
        }
        REQUIRE(windows.size() == starts.size());
        for (std::size_t i = 0; i < starts.size(); ++i) {
            CHECK(windows[i].start == starts[i]);
            CHECK(windows[i].index == i);
            CHECK(windows[i].length == tau + 1);
        }
    }
}

TEST_CASE("bound presets") {
    const ParamBounds s1 = ParamBounds::stage1();
    CHECK(s1.beta_hi == 10.0);
    CHECK(s1.gamma_hi == 10.0);
    CHECK(s1.mu_hi == 10.0);
    CHECK(s1.t_margin == 0);

    const ParamBounds s2 = ParamBounds::stage2();
    CHECK(s2.beta_hi == 2.0);
    CHECK(s2.gamma_hi == 1.0);
    CHECK(s2.mu_hi == 0.1);
    CHECK(s2.t_margin == 7);

    const SearchBounds box = s2.to_search_bounds(35);
    CHECK(box.upper == std::vector<double>{2.0, 2.0, 28.0, 28.0, 1.0, 0.1});
    CHECK(box.lower == std::vector<double>{0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
    CHECK_THROWS_AS(s2.to_search_bounds(5), SchemeError);

    CHECK(s2.contains(SirdParams{.beta1 = 1.0, .beta2 = 1.0, .t1 = 3.0, .t2 = 20.0, .gamma = 0.5, .mu = 0.05}, 35));
    CHECK_FALSE(s2.contains(SirdParams{.beta1 = 3.0, .beta2 = 1.0, .t1 = 3.0, .t2 = 20.0, .gamma = 0.5, .mu = 0.05},
                            35));
    CHECK_FALSE(s2.contains(SirdParams{.beta1 = 1.0, .beta2 = 1.0, .t1 = 21.0, .t2 = 20.0, .gamma = 0.5, .mu = 0.05},
                            35));
}

TEST_CASE("positions map to parameters with ordered switch times") {
    const std::vector<double> x{0.1, 0.2, 9.0, 4.0, 0.3, 0.01};
    const SirdParams p = params_from_position(x);
    CHECK(p.beta1 == 0.1);
    CHECK(p.t1 == 9.0);
    CHECK(p.mu == 0.01);

    std::vector<double> pos = x;
    repair_time_order(pos);
    CHECK(pos[2] == 4.0);
    CHECK(pos[3] == 9.0);
    repair_time_order(pos); // already ordered, nothing to do
    CHECK(pos[2] == 4.0);
}

TEST_CASE("window slicing and the initial state") {
    Generator g;
    g.params = SirdParams{.beta1 = 0.5, .beta2 = 0.5, .t1 = 0.0, .t2 = 0.0, .gamma = 0.1, .mu = 0.01};
    const EpiSeries epi = synthetic_series(g, 20);

    const Window w{.index = 0, .start = 5, .length = 10};
    const WindowSlice slice = slice_window(epi, w);
    CHECK(slice.deaths_cum.size() == 10);
    CHECK(slice.deaths_cum[0] == epi.deaths_cum[5]);
    CHECK(slice.infectious[9] == epi.infectious[14]);

    CHECK_THROWS_AS(slice_window(epi, Window{.index = 0, .start = 15, .length = 10}), SchemeError);

    const SirdState init = window_initial_state(epi, 5, g.population);
    CHECK(init.I == epi.infectious[5]);
    CHECK(init.R == epi.recovered_cum[5]);
    CHECK(init.D == epi.deaths_cum[5]);
    CHECK(init.total() == doctest::Approx(g.population));

    CHECK_THROWS_AS(window_initial_state(epi, 5, 10.0), InsufficientPopulationError);
}

TEST_CASE("the batch objective fills each cost slot like a serial loop") {
    Generator g;
    g.params = SirdParams{.beta1 = 0.6, .beta2 = 0.6, .t1 = 0.0, .t2 = 0.0, .gamma = 0.09, .mu = 0.01};
    const EpiSeries epi = synthetic_series(g, 25);
    const Window w{.index = 0, .start = 0, .length = 21};
    const WindowSlice slice = slice_window(epi, w);
    const SirdState init = window_initial_state(epi, 0, g.population);
    const ObjectiveSpec spec{Family::IRDJoint, Metric::MXSE};

    const std::vector<double> positions{
        0.6, 0.6, 1.0, 2.0, 0.09, 0.01, // the generator itself
        0.9, 0.2, 3.0, 9.0, 0.30, 0.05,
        1.5, 1.5, 8.0, 2.0, 0.01, 0.09, // unordered switch times are evaluated as given
    };
    for (int threads : {1, 4}) {
        const BatchObjective objective = make_window_objective(spec, slice, init, g.population, 24, threads);
        std::vector<double> costs(3);
        objective(positions, 6, costs);
        CHECK(costs[0] == doctest::Approx(0.0).epsilon(1e-12));
        for (std::size_t k = 0; k < 3; ++k) {
            const SirdParams p = params_from_position(std::span(positions).subspan(k * 6, 6));
            const Trajectory tr = integrate_euler(p, init, g.population, 21, 24);
            CHECK(costs[k] == objective_value(spec, slice, tr));
        }
    }
}

TEST_CASE("fitting recovers a model-generated window") {
    // The window spans growth, peak and decline, so the deaths curve alone
    // determines every rate; a growth-only window would leave a flat
    // (beta, gamma, mu) valley the swarm cannot resolve.
    Generator g;
    g.params = SirdParams{.beta1 = 0.9, .beta2 = 0.9, .t1 = 2.0, .t2 = 9.0, .gamma = 0.15, .mu = 0.005};
    g.population = 1000.0;
    g.i0 = 5.0;
    const Trajectory truth = generate_trajectory(g, 41);
    const EpiSeries epi = sirdfit::testing::series_from_trajectory(truth);
    const Window w{.index = 0, .start = 0, .length = 21};

    FitSettings settings = small_swarm_settings(g.population, 2000, 300);
    settings.spec = ObjectiveSpec{Family::DOnly, Metric::MSE};
    settings.pso.inertia = 0.7298; // constriction weights converge deeper
    settings.pso.cognitive = 1.4962;
    settings.pso.social = 1.4962;
    const FitResult fit = fit_window(epi, w, settings, 6);

    REQUIRE(fit.ok);
    CHECK(fit.objective < 1e-6);
    CHECK(fit.r2_d > 0.999999);
    CHECK(settings.bounds.contains(fit.params, 20));

    // the junction state is shared bit for bit
    const Forecast fc = forecast_extension(fit, 20, settings.substeps);
    CHECK(fc.junction_day == 20);
    CHECK(fc.trajectory.states[0].S == fit.trajectory.states[20].S);
    CHECK(fc.trajectory.states[0].D == fit.trajectory.states[20].D);

    // Scoring all three compartments pins the parameters, and holding
    // beta2 then reproduces the generator's continuation.
    FitSettings joint_settings = small_swarm_settings(g.population, 2000, 120);
    joint_settings.spec = ObjectiveSpec{Family::IRDJoint, Metric::MSE};
    const FitResult joint = fit_window(epi, w, joint_settings, 1);
    REQUIRE(joint.ok);
    const Forecast forward = forecast_extension(joint, 20, joint_settings.substeps);
    for (std::size_t k = 1; k <= 20; ++k) {
        const double rel_d = std::fabs(forward.trajectory.states[k].D - truth.states[20 + k].D) /
                             truth.states[20 + k].D;
        CHECK(rel_d < 1e-6);
    }
}

TEST_CASE("all-zero data is fitted exactly") {
    EpiSeries epi;
    epi.start_date = parse_date("2020-03-01");
    epi.infectious.assign(15, 0.0);
    epi.recovered_cum.assign(15, 0.0);
    epi.deaths_cum.assign(15, 0.0);
    epi.new_cases.assign(15, 0.0);

    FitSettings settings = small_swarm_settings(1000.0, 50, 5);
    settings.spec = ObjectiveSpec{Family::DOnly, Metric::MSE};
    const FitResult fit = fit_window(epi, Window{.index = 0, .start = 0, .length = 15}, settings, 3);
    CHECK(fit.ok);
    CHECK(fit.objective == 0.0);
    CHECK(std::isnan(fit.r2_d)); // constant observed deaths leave R^2 undefined
}

TEST_CASE("fit_all_windows is seeded per window and reproducible") {
    Generator g;
    g.params = SirdParams{.beta1 = 0.5, .beta2 = 0.3, .t1 = 5.0, .t2 = 12.0, .gamma = 0.1, .mu = 0.02};
    const EpiSeries epi = synthetic_series(g, 31);
    const WindowScheme scheme{.tau = 14, .delta = 8};

    FitSettings settings = small_swarm_settings(g.population, 150, 40);
    const FitAllResult a = fit_all_windows(epi, scheme, settings, 11);
    const FitAllResult b = fit_all_windows(epi, scheme, settings, 11);
    REQUIRE(a.fits.size() == 3);
    REQUIRE(b.fits.size() == 3);
    for (std::size_t k = 0; k < a.fits.size(); ++k) {
        CHECK(a.fits[k].ok);
        CHECK(a.fits[k].params.beta1 == b.fits[k].params.beta1);
        CHECK(a.fits[k].params.gamma == b.fits[k].params.gamma);
        CHECK(a.fits[k].objective == b.fits[k].objective);
    }

    double mean = 0.0;
    for (const FitResult& f : a.fits) {
        mean += f.r2_d;
    }
    mean /= static_cast<double>(a.fits.size());
    CHECK(a.mean_r2_d == doctest::Approx(mean));

    const FitAllResult c = fit_all_windows(epi, scheme, settings, 12);
    CHECK(c.fits[0].params.beta1 != a.fits[0].params.beta1);
}

TEST_CASE("a window that exceeds the population is recorded, not fatal") {
    Generator g;
    g.params = SirdParams{.beta1 = 0.5, .beta2 = 0.5, .t1 = 0.0, .t2 = 0.0, .gamma = 0.1, .mu = 0.02};
    g.population = 1e6;
    g.i0 = 500.0;
    EpiSeries epi = synthetic_series(g, 31);
    // a reporting artifact floods the infectious count from day 14 on,
    // which is exactly where the third window starts
    for (std::size_t t = 14; t < epi.size(); ++t) {
        epi.infectious[t] = 2e6;
    }

    FitSettings settings = small_swarm_settings(g.population, 60, 10);
    const FitAllResult result = fit_all_windows(epi, WindowScheme{.tau = 10, .delta = 7}, settings, 5);
    REQUIRE(result.fits.size() == 3); // starts 0, 7, 14
    CHECK(result.fits[0].ok);
    CHECK(result.fits[1].ok);
    CHECK_FALSE(result.fits[2].ok); // starts at day 14, window covers the flood
    CHECK(result.failed_count == 1);
    CHECK(!result.fits[2].failure.empty());
}

TEST_CASE("envelope construction follows the rank rules") {
    const Envelope env = build_envelope({{3, 1, 7, 5, 2, 6, 4}});
    CHECK(env.count[0] == 7);
    CHECK(env.outer_lo[0] == 1.0);
    CHECK(env.outer_hi[0] == 7.0);
    CHECK(env.band1_lo[0] == 2.0);
    CHECK(env.band1_hi[0] == 6.0);
    CHECK(env.band2_lo[0] == 3.0);
    CHECK(env.band2_hi[0] == 5.0);
    CHECK(env.median[0] == 4.0);

    const Envelope one = build_envelope({{42.0}});
    CHECK(one.outer_lo[0] == 42.0);
    CHECK(one.band1_lo[0] == 42.0);
    CHECK(one.band1_hi[0] == 42.0);
    CHECK(std::isnan(one.band2_lo[0])); // fewer than five samples
    CHECK(one.median[0] == 42.0);

    const Envelope four = build_envelope({{4, 2, 3, 1}});
    CHECK(four.band1_lo[0] == 2.0);
    CHECK(four.band1_hi[0] == 3.0);
    CHECK(std::isnan(four.band2_hi[0]));
    CHECK(four.median[0] == doctest::Approx(2.5));

    const Envelope empty = build_envelope({{}});
    CHECK(empty.count[0] == 0);
    CHECK(std::isnan(empty.median[0]));
}

TEST_CASE("envelope nesting holds on random data") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    std::vector<std::vector<double>> days(50);
    for (auto& day : days) {
        day.resize(rng() % 12);
        for (double& v : day) {
            v = u(rng);
        }
    }
    const Envelope env = build_envelope(days);
    for (std::size_t d = 0; d < days.size(); ++d) {
        if (env.count[d] == 0) {
            continue;
        }
        CHECK(env.outer_lo[d] <= env.band1_lo[d]);
        CHECK(env.band1_hi[d] <= env.outer_hi[d]);
        CHECK(env.band1_lo[d] <= env.median[d]);
        CHECK(env.median[d] <= env.band1_hi[d]);
        if (env.count[d] >= 5) {
            CHECK(env.band1_lo[d] <= env.band2_lo[d]);
            CHECK(env.band2_hi[d] <= env.band1_hi[d]);
            CHECK(env.band2_lo[d] <= env.median[d]);
            CHECK(env.median[d] <= env.band2_hi[d]);
        }
    }
}

TEST_CASE("parameter envelopes collect the windows covering each day") {
    const std::vector<FitResult> fits{
        made_fit(0, 0, 3, 0.2, 0.1, 0.01),
        made_fit(1, 1, 3, 0.4, 0.2, 0.02),
        made_fit(2, 2, 3, 0.6, 0.3, 0.03),
    };
    const ParameterEnvelopes env = parameter_envelopes(fits, 5);
    CHECK(env.beta.count == std::vector<std::size_t>{1, 2, 3, 2, 1});
    CHECK(env.beta.outer_lo[2] == 0.2);
    CHECK(env.beta.outer_hi[2] == 0.6);
    CHECK(env.beta.median[2] == doctest::Approx(0.4));
    CHECK(env.beta.median[1] == doctest::Approx(0.3));
    CHECK(env.gamma.median[2] == doctest::Approx(0.2));
    CHECK(env.mu.outer_hi[3] == 0.03);
    // every window here has beta/(gamma+mu) = 20/11
    CHECK(env.r0.median[2] == doctest::Approx(20.0 / 11.0));
    CHECK(env.r0.outer_lo[2] == doctest::Approx(20.0 / 11.0));
}

TEST_CASE("degenerate rates drop out of the reproduction number envelope") {
    std::vector<FitResult> fits{made_fit(0, 0, 3, 0.5, 0.0, 0.0), made_fit(1, 0, 3, 0.5, 0.1, 0.0)};
    const ParameterEnvelopes env = parameter_envelopes(fits, 3);
    CHECK(env.beta.count[0] == 2);
    CHECK(env.r0.count[0] == 1); // the zero-rate window contributes no value
    CHECK(env.r0.median[0] == doctest::Approx(5.0));
}

TEST_CASE("failed fits contribute nothing to envelopes") {
    std::vector<FitResult> fits{made_fit(0, 0, 3, 0.5, 0.1, 0.01)};
    FitResult failed;
    failed.window = Window{.index = 1, .start = 0, .length = 3};
    failed.failure = "no particle produced a finite cost";
    fits.push_back(failed);
    const ParameterEnvelopes env = parameter_envelopes(fits, 3);
    CHECK(env.beta.count[0] == 1);
}

TEST_CASE("compartment envelopes with disjoint windows keep days separate") {
    FitResult a = made_fit(0, 0, 2, 0.5, 0.1, 0.01);
    a.trajectory.population = 1000.0;
    a.trajectory.states = {SirdState{.S = 900, .I = 80, .R = 15, .D = 5}, SirdState{.S = 880, .I = 90, .R = 22, .D = 8}};
    FitResult b = made_fit(1, 3, 2, 0.5, 0.1, 0.01);
    b.trajectory.population = 1000.0;
    b.trajectory.states = {SirdState{.S = 800, .I = 150, .R = 40, .D = 10}, SirdState{.S = 780, .I = 160, .R = 45, .D = 15}};

    const CompartmentEnvelopes env = compartment_envelopes(std::vector<FitResult>{a, b}, 5);
    CHECK(env.infectious.count == std::vector<std::size_t>{1, 1, 0, 1, 1});
    CHECK(env.infectious.median[0] == 80.0);
    CHECK(env.infectious.median[4] == 160.0);
    CHECK(std::isnan(env.deaths.median[2])); // the gap day is covered by nothing
    CHECK(env.deaths.outer_hi[3] == 10.0);
}

TEST_CASE("forecast with zero rates is constant") {
    FitResult fit = made_fit(0, 4, 1, 0.0, 0.0, 0.0);
    fit.trajectory.population = 1000.0;
    fit.trajectory.states = {SirdState{.S = 900, .I = 50, .R = 30, .D = 20}};
    const Forecast fc = forecast_extension(fit, 5);
    CHECK(fc.junction_day == 4);
    REQUIRE(fc.trajectory.days() == 6);
    for (const SirdState& s : fc.trajectory.states) {
        CHECK(s.I == 50.0);
        CHECK(s.D == 20.0);
    }

    const Forecast point = forecast_extension(fit, 0);
    CHECK(point.trajectory.days() == 1);
}

TEST_CASE("forecasting a failed or non-finite fit throws") {
    FitResult failed;
    failed.window = Window{.index = 0, .start = 0, .length = 2};
    CHECK_THROWS_AS(forecast_extension(failed, 5), Error);

    FitResult blown = made_fit(0, 0, 2, 0.5, 0.1, 0.01);
    blown.trajectory.population = 1000.0;
    blown.trajectory.states = {SirdState{.S = 900, .I = 100, .R = 0, .D = 0}, SirdState{}};
    blown.trajectory.finite = false;
    CHECK_THROWS_AS(forecast_extension(blown, 5), NonFiniteError);
}

TEST_CASE("interpolated quantiles") {
    const std::vector<double> two{1.0, 3.0};
    CHECK(quantile_sorted(two, 0.5) == doctest::Approx(2.0));
    CHECK(quantile_sorted(two, 0.0) == 1.0);
    CHECK(quantile_sorted(two, 1.0) == 3.0);

    std::vector<double> eleven(11);
    for (std::size_t k = 0; k < 11; ++k) {
        eleven[k] = static_cast<double>(k);
    }
    CHECK(quantile_sorted(eleven, 0.25) == doctest::Approx(2.5));
    CHECK(quantile_sorted(eleven, 0.975) == doctest::Approx(9.75));

    const std::vector<double> one{5.0};
    CHECK(quantile_sorted(one, 0.025) == 5.0);
    CHECK(std::isnan(quantile_sorted({}, 0.5)));
}

TEST_CASE("quantile bands nest and filter non-finite samples") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<std::vector<double>> days(30);
    for (auto& day : days) {
        day.resize(40);
        for (double& v : day) {
            v = u(rng);
        }
        day[0] = std::numeric_limits<double>::quiet_NaN();
    }
    const QuantileBands bands = build_quantile_bands(days);
    for (std::size_t d = 0; d < days.size(); ++d) {
        CHECK(bands.count[d] == 39);
        CHECK(bands.p95_lo[d] <= bands.p90_lo[d]);
        CHECK(bands.p90_lo[d] <= bands.p50_lo[d]);
        CHECK(bands.p50_lo[d] <= bands.median[d]);
        CHECK(bands.median[d] <= bands.p50_hi[d]);
        CHECK(bands.p50_hi[d] <= bands.p90_hi[d]);
        CHECK(bands.p90_hi[d] <= bands.p95_hi[d]);
    }
}

TEST_CASE("stability with one repetition collapses to the point run") {
    Generator g;
    g.params = SirdParams{.beta1 = 0.5, .beta2 = 0.4, .t1 = 2.0, .t2 = 6.0, .gamma = 0.1, .mu = 0.02};
    const EpiSeries epi = synthetic_series(g, 31);
    const Window w{.index = 0, .start = 5, .length = 11};

    FitSettings settings = small_swarm_settings(g.population, 120, 30);
    const StabilityResult st = stability_study(epi, w, settings, 1, 4, 99);
    CHECK(st.failed == 0);
    REQUIRE(st.fits.size() == 1);
    REQUIRE(st.deaths.days() == 11 + 4);
    for (std::size_t d = 0; d < st.deaths.days(); ++d) {
        CHECK(st.deaths.count[d] == 1);
        CHECK(st.deaths.p95_lo[d] == st.deaths.median[d]);
        CHECK(st.deaths.p95_hi[d] == st.deaths.median[d]);
    }
    CHECK(st.gamma.median == st.fits[0].params.gamma);
    CHECK(st.beta.median[0] == doctest::Approx(beta_at(st.fits[0].params, 0.0)));

    // same base seed, same bands
    const StabilityResult again = stability_study(epi, w, settings, 1, 4, 99);
    CHECK(again.deaths.median == st.deaths.median);
}

TEST_CASE("stability counts repetitions that cannot run") {
    Generator g;
    g.params = SirdParams{.beta1 = 0.5, .beta2 = 0.5, .t1 = 0.0, .t2 = 0.0, .gamma = 0.1, .mu = 0.02};
    const EpiSeries epi = synthetic_series(g, 20);
    const Window w{.index = 0, .start = 0, .length = 11};

    FitSettings settings = small_swarm_settings(1.0, 30, 5); // population far too small
    const StabilityResult st = stability_study(epi, w, settings, 3, 2, 1);
    CHECK(st.failed == 3);
    CHECK(st.fits.size() == 3);
    CHECK(st.deaths.count[0] == 0);
    CHECK(st.gamma.count == 0);
}

} // TEST_SUITE
