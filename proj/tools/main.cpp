#include "sirdfit/calibration.hpp"
#include "sirdfit/csv.hpp"
#include "sirdfit/dates.hpp"
#include "sirdfit/errors.hpp"
#include "sirdfit/timeseries.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sirdfit;

namespace {

struct Options {
    std::string input;
    std::string out_dir = ".";
    bool smooth = false;

    double population = 0.0;
    std::size_t tau = 35;
    std::size_t delta = 3;
    std::string objective = "ird-mxse";

    std::string bounds_preset = "stage2";
    double beta_lo = 0.0, beta_hi = 2.0;
    double gamma_lo = 0.0, gamma_hi = 1.0;
    double mu_lo = 0.0, mu_hi = 0.1;
    std::size_t t_margin = 7;

    std::size_t particles = 10000;
    std::size_t iters = 100;
    double inertia = 0.5;
    double cognitive = 0.5;
    double social = 0.5;
    std::uint64_t seed = 0;
    int substeps = kDefaultSubsteps;
    std::string threads = "auto";

    std::size_t horizon = 21;
    std::size_t reps = 1000;
    std::string window_start = "last";
};

int parse_threads(const std::string& s) {
    if (s == "auto" || s == "max") {
        return 0;
    }
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || value < 0) {
        throw Error("--threads expects a non-negative integer, 'auto' or 'max'");
    }
    return value;
}

ParamBounds resolve_bounds(const Options& opts) {
    if (opts.bounds_preset == "stage1") {
        return ParamBounds::stage1();
    }
    if (opts.bounds_preset == "stage2") {
        return ParamBounds::stage2();
    }
    ParamBounds b;
    b.beta_lo = opts.beta_lo;
    b.beta_hi = opts.beta_hi;
    b.gamma_lo = opts.gamma_lo;
    b.gamma_hi = opts.gamma_hi;
    b.mu_lo = opts.mu_lo;
    b.mu_hi = opts.mu_hi;
    b.t_margin = opts.t_margin;
    return b;
}

FitSettings make_settings(const Options& opts) {
    FitSettings s;
    s.spec = parse_objective(opts.objective);
    s.bounds = resolve_bounds(opts);
    s.pso.n_particles = opts.particles;
    s.pso.max_iters = opts.iters;
    s.pso.inertia = opts.inertia;
    s.pso.cognitive = opts.cognitive;
    s.pso.social = opts.social;
    s.population = opts.population;
    s.substeps = opts.substeps;
    s.n_threads = parse_threads(opts.threads);
    return s;
}

EpiSeries load_series(const Options& opts, CleaningStats* stats = nullptr) {
    const RawSeries raw = read_raw_csv_file(opts.input);
    EpiSeries epi = build_epi_series(raw, stats);
    if (opts.smooth) {
        epi = smooth7(epi);
    }
    return epi;
}

/// Day index of the requested window start: a plain number, an ISO date
/// within the series, or "last" for the latest start that still fits.
std::size_t resolve_window_start(const std::string& text, const EpiSeries& epi, std::size_t tau) {
    if (epi.size() < tau + 1) {
        throw SchemeError("series has " + std::to_string(epi.size()) + " days; a window needs " +
                          std::to_string(tau + 1));
    }
    const std::size_t max_start = epi.size() - 1 - tau;
    if (text == "last") {
        return max_start;
    }
    std::size_t day = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), day);
    if (ec == std::errc{} && ptr == text.data() + text.size()) {
        if (day > max_start) {
            throw SchemeError("window starting at day " + std::to_string(day) + " runs past the data");
        }
        return day;
    }
    const int offset = days_between(epi.start_date, parse_date(text));
    if (offset < 0 || static_cast<std::size_t>(offset) > max_start) {
        throw SchemeError("window starting at " + text + " runs past the data");
    }
    return static_cast<std::size_t>(offset);
}

json bounds_json(const ParamBounds& b) {
    return json{
        {"beta", {b.beta_lo, b.beta_hi}},
        {"gamma", {b.gamma_lo, b.gamma_hi}},
        {"mu", {b.mu_lo, b.mu_hi}},
        {"t_margin", b.t_margin},
    };
}

json config_json(const Options& opts) {
    return json{
        {"input", opts.input},
        {"population", opts.population},
        {"tau", opts.tau},
        {"delta", opts.delta},
        {"objective", opts.objective},
        {"bounds_preset", opts.bounds_preset},
        {"bounds", bounds_json(resolve_bounds(opts))},
        {"particles", opts.particles},
        {"iters", opts.iters},
        {"inertia", opts.inertia},
        {"cognitive", opts.cognitive},
        {"social", opts.social},
        {"seed", opts.seed},
        {"substeps", opts.substeps},
        {"smooth", opts.smooth},
    };
}

json params_json(const FitResult& fit) {
    if (!fit.ok) {
        return nullptr;
    }
    const double start = static_cast<double>(fit.window.start);
    return json{
        {"beta1", fit.params.beta1}, {"beta2", fit.params.beta2}, {"t1", start + fit.params.t1},
        {"t2", start + fit.params.t2}, {"gamma", fit.params.gamma}, {"mu", fit.params.mu},
    };
}

json scalar_bands_json(const ScalarBands& b) {
    return json{
        {"count", b.count},     {"median", b.median},
        {"p50", {b.p50_lo, b.p50_hi}}, {"p90", {b.p90_lo, b.p90_hi}}, {"p95", {b.p95_lo, b.p95_hi}},
    };
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << text;
}

void write_fits_json(const fs::path& path, const EpiSeries& epi, const FitAllResult& result, const Options& opts) {
    json windows = json::array();
    for (const FitResult& fit : result.fits) {
        windows.push_back(json{
            {"index", fit.window.index},
            {"start_day", fit.window.start},
            {"start_date", format_date(epi.date_at(fit.window.start))},
            {"end_day", fit.window.last_day()},
            {"ok", fit.ok},
            {"objective_value", fit.objective},
            {"r2_d", fit.r2_d},
            {"params", params_json(fit)},
            {"failure", fit.ok ? json(nullptr) : json(fit.failure)},
        });
    }
    const json doc{
        {"config", config_json(opts)},      {"n_windows", result.fits.size()},
        {"failed_count", result.failed_count}, {"mean_r2_d", result.mean_r2_d},
        {"windows", windows},
    };
    write_text_file(path, doc.dump(2) + "\n");
}

void envelope_rows(std::vector<std::vector<std::string>>& rows, const std::string& name, const Envelope& env,
                   const EpiSeries& epi) {
    for (std::size_t day = 0; day < env.days(); ++day) {
        rows.push_back({name, std::to_string(day), format_date(epi.date_at(day)), std::to_string(env.count[day]),
                        format_double(env.outer_lo[day]), format_double(env.band1_lo[day]),
                        format_double(env.band2_lo[day]), format_double(env.median[day]),
                        format_double(env.band2_hi[day]), format_double(env.band1_hi[day]),
                        format_double(env.outer_hi[day])});
    }
}

const std::string kEnvelopeHeader =
    "series,day,date,count,outer_lo,band1_lo,band2_lo,median,band2_hi,band1_hi,outer_hi";

void band_rows(std::vector<std::vector<std::string>>& rows, const std::string& name, const QuantileBands& bands,
               std::size_t first_day, const EpiSeries& epi) {
    for (std::size_t k = 0; k < bands.days(); ++k) {
        const std::size_t day = first_day + k;
        rows.push_back({name, std::to_string(day), format_date(epi.date_at(day)), std::to_string(bands.count[k]),
                        format_double(bands.p95_lo[k]), format_double(bands.p90_lo[k]),
                        format_double(bands.p50_lo[k]), format_double(bands.median[k]),
                        format_double(bands.p50_hi[k]), format_double(bands.p90_hi[k]),
                        format_double(bands.p95_hi[k])});
    }
}

const std::string kBandHeader = "series,day,date,count,p95_lo,p90_lo,p50_lo,median,p50_hi,p90_hi,p95_hi";

int run_preprocess(const Options& opts) {
    CleaningStats stats;
    const RawSeries raw = read_raw_csv_file(opts.input);
    EpiSeries epi = build_epi_series(raw, &stats);
    if (opts.smooth) {
        epi = smooth7(epi);
    }
    fs::create_directories(opts.out_dir);
    write_epi_csv_file((fs::path(opts.out_dir) / "preprocessed.csv").string(), epi);
    std::cout << "rows in: " << raw.records.size() << "\n"
              << "days out: " << epi.size() << "\n"
              << "interpolated cells: " << stats.interpolated_cells << "\n"
              << "negative daily corrections: " << stats.negative_corrections << "\n"
              << "outflow caps: " << stats.outflow_corrections << "\n";
    return 0;
}

int run_fit(const Options& opts) {
    const EpiSeries epi = load_series(opts);
    const FitSettings settings = make_settings(opts);
    const WindowScheme scheme{.tau = opts.tau, .delta = opts.delta};
    const FitAllResult result = fit_all_windows(epi, scheme, settings, opts.seed);

    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);
    write_fits_json(out / "fits.json", epi, result, opts);

    const ParameterEnvelopes p = parameter_envelopes(result.fits, epi.size());
    std::vector<std::vector<std::string>> rows;
    envelope_rows(rows, "beta", p.beta, epi);
    envelope_rows(rows, "gamma", p.gamma, epi);
    envelope_rows(rows, "mu", p.mu, epi);
    envelope_rows(rows, "r0", p.r0, epi);
    write_table_file((out / "envelopes_params.csv").string(), kEnvelopeHeader, rows);

    const CompartmentEnvelopes c = compartment_envelopes(result.fits, epi.size());
    rows.clear();
    envelope_rows(rows, "infectious", c.infectious, epi);
    envelope_rows(rows, "recovered", c.recovered, epi);
    envelope_rows(rows, "deaths", c.deaths, epi);
    write_table_file((out / "envelopes_compartments.csv").string(), kEnvelopeHeader, rows);

    std::cout << "windows: " << result.fits.size() << " (" << result.failed_count << " failed)\n"
              << "mean R2(D): " << format_double(result.mean_r2_d) << "\n";
    return result.failed_count > 0 ? 1 : 0;
}

int run_compare(const Options& opts) {
    const EpiSeries epi = load_series(opts);
    const WindowScheme scheme{.tau = opts.tau, .delta = opts.delta};
    const std::vector<std::pair<std::string, std::string>> row_specs = {
        {"stage1", "d"}, {"stage1", "ird"}, {"stage2", "d"}, {"stage2", "ird"}};
    const std::vector<std::string> metrics = {"mxse", "mse", "mae", "mape"};

    bool any_failed = false;
    std::vector<std::vector<std::string>> rows;
    for (const auto& [preset, family] : row_specs) {
        std::vector<std::string> row{preset, family};
        for (const std::string& metric : metrics) {
            Options cell = opts;
            cell.bounds_preset = preset;
            cell.objective = family + "-" + metric;
            const FitAllResult result = fit_all_windows(epi, scheme, make_settings(cell), opts.seed);
            any_failed = any_failed || result.failed_count > 0;
            row.push_back(format_double(result.mean_r2_d));
        }
        rows.push_back(std::move(row));
    }

    fs::create_directories(opts.out_dir);
    const std::string header = "bounds,family,mxse,mse,mae,mape";
    write_table_file((fs::path(opts.out_dir) / "comparison.csv").string(), header, rows);

    std::cout << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            std::cout << (k ? "," : "") << row[k];
        }
        std::cout << "\n";
    }
    return any_failed ? 1 : 0;
}

int run_forecast(const Options& opts) {
    const EpiSeries epi = load_series(opts);
    const FitSettings settings = make_settings(opts);
    const std::size_t start = resolve_window_start(opts.window_start, epi, opts.tau);
    const Window window{.index = 0, .start = start, .length = opts.tau + 1};

    const FitResult fit = fit_window(epi, window, settings, opts.seed);
    const Forecast forecast = forecast_extension(fit, opts.horizon, settings.substeps);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k <= opts.horizon; ++k) {
        const std::size_t day = forecast.junction_day + k;
        const SirdState& s = forecast.trajectory.states[k];
        std::vector<std::string> row{std::to_string(k),         format_date(epi.date_at(day)),
                                     format_double(s.S),        format_double(s.I),
                                     format_double(s.R),        format_double(s.D)};
        if (day < epi.size()) {
            row.push_back(format_double(epi.infectious[day]));
            row.push_back(format_double(epi.recovered_cum[day]));
            row.push_back(format_double(epi.deaths_cum[day]));
        } else {
            row.insert(row.end(), {"", "", ""});
        }
        rows.push_back(std::move(row));
    }
    fs::create_directories(opts.out_dir);
    write_table_file((fs::path(opts.out_dir) / "forecast.csv").string(),
                     "day,date,S,I,R,D,reported_infectious,reported_recovered_cum,reported_deaths_cum", rows);

    std::cout << "window: days " << window.start << ".." << window.last_day() << " ("
              << format_date(epi.date_at(window.start)) << ")\n"
              << "objective " << objective_name(fit.spec) << " = " << format_double(fit.objective)
              << ", R2(D) = " << format_double(fit.r2_d) << "\n"
              << "params: beta1=" << format_double(fit.params.beta1) << " beta2=" << format_double(fit.params.beta2)
              << " t1=" << format_double(static_cast<double>(start) + fit.params.t1)
              << " t2=" << format_double(static_cast<double>(start) + fit.params.t2)
              << " gamma=" << format_double(fit.params.gamma) << " mu=" << format_double(fit.params.mu) << "\n";
    return 0;
}

int run_stability(const Options& opts) {
    const EpiSeries epi = load_series(opts);
    const FitSettings settings = make_settings(opts);
    const std::size_t start = resolve_window_start(opts.window_start, epi, opts.tau);
    const Window window{.index = 0, .start = start, .length = opts.tau + 1};

    const StabilityResult st = stability_study(epi, window, settings, opts.reps, opts.horizon, opts.seed);

    std::vector<std::vector<std::string>> rows;
    band_rows(rows, "beta", st.beta, window.start, epi);
    band_rows(rows, "r0", st.r0, window.start, epi);
    band_rows(rows, "infectious", st.infectious, window.start, epi);
    band_rows(rows, "recovered", st.recovered, window.start, epi);
    band_rows(rows, "deaths", st.deaths, window.start, epi);
    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);
    write_table_file((out / "stability_bands.csv").string(), kBandHeader, rows);

    const json summary{
        {"window",
         {{"start_day", window.start},
          {"start_date", format_date(epi.date_at(window.start))},
          {"end_day", window.last_day()}}},
        {"horizon", st.horizon},
        {"repetitions", st.repetitions},
        {"failed", st.failed},
        {"gamma", scalar_bands_json(st.gamma)},
        {"mu", scalar_bands_json(st.mu)},
        {"config", config_json(opts)},
    };
    write_text_file(out / "stability_summary.json", summary.dump(2) + "\n");

    std::cout << "repetitions: " << st.repetitions << " (" << st.failed << " failed)\n";
    return st.failed > 0 ? 1 : 0;
}

void add_data_options(CLI::App* cmd, Options& opts) {
    cmd->add_option("--input", opts.input, "Input CSV: date,confirmed,recovered,deaths")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", opts.out_dir, "Directory for output files")->capture_default_str();
    cmd->add_flag("--smooth", opts.smooth, "Apply the 7-day trailing moving average");
}

void add_search_options(CLI::App* cmd, Options& opts) {
    cmd->add_option("--population", opts.population, "Total population N")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tau", opts.tau, "Window length in days")->capture_default_str();
    cmd->add_option("--delta", opts.delta, "Window shift in days")->capture_default_str();
    cmd->add_option("--bounds", opts.bounds_preset, "Parameter bounds preset")
        ->check(CLI::IsMember({"stage1", "stage2", "custom"}))
        ->capture_default_str();
    cmd->add_option("--beta-lo", opts.beta_lo, "Custom bounds: beta lower")->capture_default_str();
    cmd->add_option("--beta-hi", opts.beta_hi, "Custom bounds: beta upper")->capture_default_str();
    cmd->add_option("--gamma-lo", opts.gamma_lo, "Custom bounds: gamma lower")->capture_default_str();
    cmd->add_option("--gamma-hi", opts.gamma_hi, "Custom bounds: gamma upper")->capture_default_str();
    cmd->add_option("--mu-lo", opts.mu_lo, "Custom bounds: mu lower")->capture_default_str();
    cmd->add_option("--mu-hi", opts.mu_hi, "Custom bounds: mu upper")->capture_default_str();
    cmd->add_option("--t-margin", opts.t_margin, "Custom bounds: switch-time margin in days")
        ->capture_default_str();
    cmd->add_option("--particles", opts.particles, "Swarm size")->capture_default_str();
    cmd->add_option("--iters", opts.iters, "Swarm iterations")->capture_default_str();
    cmd->add_option("--inertia", opts.inertia, "Velocity inertia weight")->capture_default_str();
    cmd->add_option("--cognitive", opts.cognitive, "Personal-best pull")->capture_default_str();
    cmd->add_option("--social", opts.social, "Global-best pull")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "Root RNG seed")->capture_default_str();
    cmd->add_option("--substeps", opts.substeps, "Euler substeps per day")->capture_default_str();
    cmd->add_option("--threads", opts.threads, "Worker threads (number, 'auto' or 'max')")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SIRD model calibration on overlapping windows with particle swarm search"};
    app.set_config("--config");
    app.require_subcommand(1);
    Options opts;

    CLI::App* preprocess = app.add_subcommand("preprocess", "Clean a reported series into the daily model inputs");
    add_data_options(preprocess, opts);

    CLI::App* fit = app.add_subcommand("fit", "Calibrate every window and write fits and envelopes");
    add_data_options(fit, opts);
    add_search_options(fit, opts);
    fit->add_option("--objective", opts.objective, "Objective spec")
        ->check(CLI::IsMember({"d-mxse", "d-mse", "d-mae", "d-mape", "ird-mxse", "ird-mse", "ird-mae", "ird-mape"}))
        ->capture_default_str();

    CLI::App* compare = app.add_subcommand("compare", "Mean R2(D) for every objective spec and bounds preset");
    add_data_options(compare, opts);
    add_search_options(compare, opts);

    CLI::App* forecast = app.add_subcommand("forecast", "Fit one window and extend it past the fitted range");
    add_data_options(forecast, opts);
    add_search_options(forecast, opts);
    forecast->add_option("--objective", opts.objective, "Objective spec")
        ->check(CLI::IsMember({"d-mxse", "d-mse", "d-mae", "d-mape", "ird-mxse", "ird-mse", "ird-mae", "ird-mape"}))
        ->capture_default_str();
    forecast->add_option("--horizon", opts.horizon, "Days to extend past the window")->capture_default_str();
    forecast->add_option("--window-start", opts.window_start, "Window start: day index, ISO date or 'last'")
        ->capture_default_str();

    CLI::App* stability = app.add_subcommand("stability", "Re-fit one window under many seeds and band the spread");
    add_data_options(stability, opts);
    add_search_options(stability, opts);
    stability->add_option("--objective", opts.objective, "Objective spec")
        ->check(CLI::IsMember({"d-mxse", "d-mse", "d-mae", "d-mape", "ird-mxse", "ird-mse", "ird-mae", "ird-mape"}))
        ->capture_default_str();
    stability->add_option("--horizon", opts.horizon, "Days to extend past the window")->capture_default_str();
    stability->add_option("--reps", opts.reps, "Number of repeated calibrations")->capture_default_str();
    stability->add_option("--window-start", opts.window_start, "Window start: day index, ISO date or 'last'")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (preprocess->parsed()) {
            return run_preprocess(opts);
        }
        if (fit->parsed()) {
            return run_fit(opts);
        }
        if (compare->parsed()) {
            return run_compare(opts);
        }
        if (forecast->parsed()) {
            return run_forecast(opts);
        }
        return run_stability(opts);
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 2;
    }
}
