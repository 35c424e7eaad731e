#include "sirdfit/model.hpp"

#include "sirdfit/errors.hpp"
#include "sirdfit/parallel.hpp"

#include <cmath>
#include <limits>
#include <thread>
#include <vector>

namespace sirdfit {

namespace {

void spawn_workers(std::size_t n, int n_threads, const std::function<void(std::size_t, std::size_t)>& fn) {
    const std::size_t workers = static_cast<std::size_t>(n_threads);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        if (begin < end) {
            pool.emplace_back(fn, begin, end);
        }
    }
    fn(0, std::min(n, chunk));
    for (auto& t : pool) {
        t.join();
    }
}

} // namespace

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, int n_threads, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) {
        return;
    }
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(n_threads)), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    spawn_workers(n, workers, fn);
}

double beta_at(const SirdParams& params, double t) {
    if (t < params.t1) {
        return params.beta1;
    }
    if (t >= params.t2) {
        return params.beta2;
    }
    const double slope = (params.beta2 - params.beta1) / (params.t2 - params.t1);
    return params.beta1 + slope * (t - params.t1);
}

SirdState sird_rhs(const SirdState& state, double beta, double gamma, double mu, double population) {
    const double infections = beta / population * state.S * state.I;
    return SirdState{
        .S = -infections,
        .I = infections - gamma * state.I - mu * state.I,
        .R = gamma * state.I,
        .D = mu * state.I,
    };
}

void integrate_euler_into(const SirdParams& params, const SirdState& init, double population, int n_days,
                          int substeps, Trajectory& out) {
    if (n_days < 1 || substeps < 1 || !(population > 0.0)) {
        throw Error("integrate_euler needs n_days >= 1, substeps >= 1 and a positive population");
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.population = population;
    out.finite = std::isfinite(init.total());
    out.states.assign(static_cast<std::size_t>(n_days), SirdState{nan, nan, nan, nan});
    out.states[0] = init;
    if (!out.finite) {
        return;
    }

    const double h = 1.0 / static_cast<double>(substeps);
    SirdState y = init;
    for (int day = 1; day < n_days; ++day) {
        for (int sub = 0; sub < substeps; ++sub) {
            const double t = static_cast<double>(day - 1) + static_cast<double>(sub) * h;
            const SirdState dy = sird_rhs(y, beta_at(params, t), params.gamma, params.mu, population);
            y.S += h * dy.S;
            y.I += h * dy.I;
            y.R += h * dy.R;
            y.D += h * dy.D;
        }
        if (!std::isfinite(y.S) || !std::isfinite(y.I) || !std::isfinite(y.R) || !std::isfinite(y.D)) {
            out.finite = false; // remaining days stay NaN
            return;
        }
        out.states[static_cast<std::size_t>(day)] = y;
    }
}

Trajectory integrate_euler(const SirdParams& params, const SirdState& init, double population, int n_days,
                           int substeps) {
    Trajectory out;
    integrate_euler_into(params, init, population, n_days, substeps, out);
    return out;
}

std::vector<Trajectory> integrate_batch(std::span<const SirdParams> batch, const SirdState& init, double population,
                                        int n_days, int substeps, int n_threads) {
    std::vector<Trajectory> out(batch.size());
    parallel_for(batch.size(), n_threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            integrate_euler_into(batch[k], init, population, n_days, substeps, out[k]);
        }
    });
    return out;
}

double basic_reproduction_number(double beta, double gamma, double mu) {
    const double removal = gamma + mu;
    if (removal <= 0.0) {
        throw DegenerateRatesError{};
    }
    return beta / removal;
}

} // namespace sirdfit
