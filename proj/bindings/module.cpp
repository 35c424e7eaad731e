#include "sirdfit/calibration.hpp"
#include "sirdfit/csv.hpp"
#include "sirdfit/dates.hpp"
#include "sirdfit/errors.hpp"
#include "sirdfit/model.hpp"
#include "sirdfit/objectives.hpp"
#include "sirdfit/timeseries.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>

namespace py = pybind11;

namespace {

sirdfit::ParamBounds bounds_preset(const std::string& name) {
    if (name == "stage1") {
        return sirdfit::ParamBounds::stage1();
    }
    if (name == "stage2") {
        return sirdfit::ParamBounds::stage2();
    }
    throw sirdfit::Error("unknown bounds preset: " + name);
}

sirdfit::FitSettings make_settings(double population, const std::string& objective, const std::string& bounds,
                                   std::size_t particles, std::size_t iters, double inertia, double cognitive,
                                   double social, int substeps, int threads) {
    sirdfit::FitSettings settings;
    settings.spec = sirdfit::parse_objective(objective);
    settings.bounds = bounds_preset(bounds);
    settings.population = population;
    settings.substeps = substeps;
    settings.n_threads = threads;
    settings.pso.n_particles = particles;
    settings.pso.max_iters = iters;
    settings.pso.inertia = inertia;
    settings.pso.cognitive = cognitive;
    settings.pso.social = social;
    return settings;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "SIRD window calibration core";
#ifdef SIRDFIT_VERSION
    m.attr("__version__") = SIRDFIT_VERSION;
#endif

    py::class_<sirdfit::SirdParams>(m, "SirdParams")
        .def(py::init([](double beta1, double beta2, double t1, double t2, double gamma, double mu) {
                 return sirdfit::SirdParams{.beta1 = beta1, .beta2 = beta2, .t1 = t1, .t2 = t2,
                                            .gamma = gamma, .mu = mu};
             }),
             py::arg("beta1") = 0.0, py::arg("beta2") = 0.0, py::arg("t1") = 0.0, py::arg("t2") = 0.0,
             py::arg("gamma") = 0.0, py::arg("mu") = 0.0)
        .def_readwrite("beta1", &sirdfit::SirdParams::beta1)
        .def_readwrite("beta2", &sirdfit::SirdParams::beta2)
        .def_readwrite("t1", &sirdfit::SirdParams::t1)
        .def_readwrite("t2", &sirdfit::SirdParams::t2)
        .def_readwrite("gamma", &sirdfit::SirdParams::gamma)
        .def_readwrite("mu", &sirdfit::SirdParams::mu)
        .def("__repr__", [](const sirdfit::SirdParams& p) {
            return "SirdParams(beta1=" + sirdfit::format_double(p.beta1) + ", beta2=" +
                   sirdfit::format_double(p.beta2) + ", t1=" + sirdfit::format_double(p.t1) + ", t2=" +
                   sirdfit::format_double(p.t2) + ", gamma=" + sirdfit::format_double(p.gamma) + ", mu=" +
                   sirdfit::format_double(p.mu) + ")";
        });

    py::class_<sirdfit::SirdState>(m, "SirdState")
        .def(py::init([](double S, double I, double R, double D) {
                 return sirdfit::SirdState{.S = S, .I = I, .R = R, .D = D};
             }),
             py::arg("S") = 0.0, py::arg("I") = 0.0, py::arg("R") = 0.0, py::arg("D") = 0.0)
        .def_readwrite("S", &sirdfit::SirdState::S)
        .def_readwrite("I", &sirdfit::SirdState::I)
        .def_readwrite("R", &sirdfit::SirdState::R)
        .def_readwrite("D", &sirdfit::SirdState::D)
        .def("total", &sirdfit::SirdState::total)
        .def("__repr__", [](const sirdfit::SirdState& s) {
            return "SirdState(S=" + sirdfit::format_double(s.S) + ", I=" + sirdfit::format_double(s.I) +
                   ", R=" + sirdfit::format_double(s.R) + ", D=" + sirdfit::format_double(s.D) + ")";
        });

    py::class_<sirdfit::Trajectory>(m, "Trajectory")
        .def_readonly("states", &sirdfit::Trajectory::states)
        .def_readonly("population", &sirdfit::Trajectory::population)
        .def_readonly("finite", &sirdfit::Trajectory::finite)
        .def("days", &sirdfit::Trajectory::days);

    py::class_<sirdfit::EpiSeries>(m, "EpiSeries")
        .def_property_readonly("start_date",
                               [](const sirdfit::EpiSeries& s) { return sirdfit::format_date(s.start_date); })
        .def_readonly("infectious", &sirdfit::EpiSeries::infectious)
        .def_readonly("recovered_cum", &sirdfit::EpiSeries::recovered_cum)
        .def_readonly("deaths_cum", &sirdfit::EpiSeries::deaths_cum)
        .def_readonly("new_cases", &sirdfit::EpiSeries::new_cases)
        .def("size", &sirdfit::EpiSeries::size)
        .def("__len__", &sirdfit::EpiSeries::size);

    py::class_<sirdfit::Window>(m, "Window")
        .def(py::init([](std::size_t index, std::size_t start, std::size_t length) {
                 return sirdfit::Window{.index = index, .start = start, .length = length};
             }),
             py::arg("index"), py::arg("start"), py::arg("length"))
        .def_readonly("index", &sirdfit::Window::index)
        .def_readonly("start", &sirdfit::Window::start)
        .def_readonly("length", &sirdfit::Window::length)
        .def("last_day", &sirdfit::Window::last_day)
        .def("__repr__", [](const sirdfit::Window& w) {
            return "Window(index=" + std::to_string(w.index) + ", start=" + std::to_string(w.start) +
                   ", length=" + std::to_string(w.length) + ")";
        });

    py::class_<sirdfit::FitResult>(m, "FitResult")
        .def_readonly("window", &sirdfit::FitResult::window)
        .def_readonly("params", &sirdfit::FitResult::params)
        .def_readonly("objective", &sirdfit::FitResult::objective)
        .def_readonly("r2_d", &sirdfit::FitResult::r2_d)
        .def_readonly("trajectory", &sirdfit::FitResult::trajectory)
        .def_readonly("ok", &sirdfit::FitResult::ok)
        .def_readonly("failure", &sirdfit::FitResult::failure);

    py::class_<sirdfit::FitAllResult>(m, "FitAllResult")
        .def_readonly("fits", &sirdfit::FitAllResult::fits)
        .def_readonly("mean_r2_d", &sirdfit::FitAllResult::mean_r2_d)
        .def_readonly("failed_count", &sirdfit::FitAllResult::failed_count);

    py::class_<sirdfit::Forecast>(m, "Forecast")
        .def_readonly("junction_day", &sirdfit::Forecast::junction_day)
        .def_readonly("horizon", &sirdfit::Forecast::horizon)
        .def_readonly("trajectory", &sirdfit::Forecast::trajectory);

    m.def("beta_at", &sirdfit::beta_at, py::arg("params"), py::arg("t"),
          "Piecewise-linear transmission rate at time t");
    m.def("basic_reproduction_number", &sirdfit::basic_reproduction_number, py::arg("beta"), py::arg("gamma"),
          py::arg("mu"));

    m.def("integrate", &sirdfit::integrate_euler, py::arg("params"), py::arg("init"), py::arg("population"),
          py::arg("n_days"), py::arg("substeps") = sirdfit::kDefaultSubsteps,
          "Fixed-step Euler integration sampled at whole days");

    m.def(
        "load_raw_csv",
        [](const std::string& path, bool smooth) {
            const sirdfit::RawSeries raw = sirdfit::read_raw_csv_file(path);
            sirdfit::EpiSeries epi = sirdfit::build_epi_series(raw);
            if (smooth) {
                epi = sirdfit::smooth7(epi);
            }
            return epi;
        },
        py::arg("path"), py::arg("smooth") = false,
        "Read a date,confirmed,recovered,deaths CSV and run the cleaning pipeline");

    m.def(
        "make_windows",
        [](std::size_t n_days, std::size_t tau, std::size_t delta) {
            return sirdfit::make_windows(n_days, sirdfit::WindowScheme{.tau = tau, .delta = delta});
        },
        py::arg("n_days"), py::arg("tau") = 35, py::arg("delta") = 3);

    m.def(
        "fit_window",
        [](const sirdfit::EpiSeries& data, const sirdfit::Window& window, double population,
           const std::string& objective, const std::string& bounds, std::size_t particles, std::size_t iters,
           double inertia, double cognitive, double social, std::uint64_t seed, int substeps, int threads) {
            const sirdfit::FitSettings settings = make_settings(population, objective, bounds, particles, iters,
                                                                inertia, cognitive, social, substeps, threads);
            py::gil_scoped_release release;
            return sirdfit::fit_window(data, window, settings, seed);
        },
        py::arg("data"), py::arg("window"), py::arg("population"), py::arg("objective") = "ird-mxse",
        py::arg("bounds") = "stage2", py::arg("particles") = 10000, py::arg("iters") = 100,
        py::arg("inertia") = 0.5, py::arg("cognitive") = 0.5, py::arg("social") = 0.5, py::arg("seed") = 0,
        py::arg("substeps") = sirdfit::kDefaultSubsteps, py::arg("threads") = 1);

    m.def(
        "fit_all_windows",
        [](const sirdfit::EpiSeries& data, double population, std::size_t tau, std::size_t delta,
           const std::string& objective, const std::string& bounds, std::size_t particles, std::size_t iters,
           double inertia, double cognitive, double social, std::uint64_t seed, int substeps, int threads) {
            const sirdfit::FitSettings settings = make_settings(population, objective, bounds, particles, iters,
                                                                inertia, cognitive, social, substeps, threads);
            const sirdfit::WindowScheme scheme{.tau = tau, .delta = delta};
            py::gil_scoped_release release;
            return sirdfit::fit_all_windows(data, scheme, settings, seed);
        },
        py::arg("data"), py::arg("population"), py::arg("tau") = 35, py::arg("delta") = 3,
        py::arg("objective") = "ird-mxse", py::arg("bounds") = "stage2", py::arg("particles") = 10000,
        py::arg("iters") = 100, py::arg("inertia") = 0.5, py::arg("cognitive") = 0.5, py::arg("social") = 0.5,
        py::arg("seed") = 0, py::arg("substeps") = sirdfit::kDefaultSubsteps, py::arg("threads") = 1);

    m.def("forecast_extension", &sirdfit::forecast_extension, py::arg("fit"), py::arg("horizon"),
          py::arg("substeps") = sirdfit::kDefaultSubsteps,
          "Continue a fitted window holding beta = beta2 and the fitted gamma, mu");
}
