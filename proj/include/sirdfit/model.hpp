#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sirdfit {

/// Number of substeps per day used by the Euler scheme unless the caller
/// says otherwise. h = 1/24 day keeps the discretization stable for every
/// rate the search boxes allow.
inline constexpr int kDefaultSubsteps = 24;

/// The six fitted parameters. t1/t2 are expressed in days from the start
/// of the window the parameters belong to; they may be fractional.
struct SirdParams {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double gamma = 0.0;
    double mu = 0.0;
};

struct SirdState {
    double S = 0.0;
    double I = 0.0;
    double R = 0.0;
    double D = 0.0;

    double total() const { return S + I + R + D; }
};

/// Daily samples of the integrated system. `finite` is false when the
/// state blew up during integration; such trajectories are data, not
/// errors: the objective prices them at +infinity.
struct Trajectory {
    std::vector<SirdState> states;
    double population = 0.0;
    bool finite = true;

    std::size_t days() const { return states.size(); }
};

/// Piecewise-linear transmission rate: beta1 before t1, a linear ramp on
/// [t1, t2), beta2 from t2 on. When t1 == t2 the ramp collapses and the
/// rate switches from beta1 to beta2 at t1 (the pointwise limit).
double beta_at(const SirdParams& params, double t);

/// Right-hand side of S' = -b/N*S*I, I' = b/N*S*I - (g+m)*I, R' = g*I,
/// D' = m*I. The components sum to zero.
SirdState sird_rhs(const SirdState& state, double beta, double gamma, double mu, double population);

/// Explicit Euler with step h = 1/substeps day, sampling the state at
/// integer days. Day 0 of the result is `init`, bit for bit. The
/// transmission rate is re-evaluated at every substep time.
Trajectory integrate_euler(const SirdParams& params, const SirdState& init, double population, int n_days,
                           int substeps = kDefaultSubsteps);

/// Same as integrate_euler but reuses the caller's buffer.
void integrate_euler_into(const SirdParams& params, const SirdState& init, double population, int n_days,
                          int substeps, Trajectory& out);

/// One trajectory per parameter set; element k equals
/// integrate_euler(batch[k], ...) bit for bit regardless of `n_threads`.
/// Blow-ups are recorded per element and never abort the batch.
std::vector<Trajectory> integrate_batch(std::span<const SirdParams> batch, const SirdState& init, double population,
                                        int n_days, int substeps = kDefaultSubsteps, int n_threads = 0);

/// Basic reproduction number beta / (gamma + mu). Throws
/// DegenerateRatesError when gamma + mu == 0.
double basic_reproduction_number(double beta, double gamma, double mu);

} // namespace sirdfit
