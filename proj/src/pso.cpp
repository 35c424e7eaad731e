#include "sirdfit/pso.hpp"

#include "sirdfit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace sirdfit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void PsoConfig::validate() const {
    if (n_particles == 0 || max_iters == 0) {
        throw Error("pso: n_particles and max_iters must be positive");
    }
    if (!std::isfinite(inertia) || !std::isfinite(cognitive) || !std::isfinite(social)) {
        throw Error("pso: coefficients must be finite");
    }
}

void SearchBounds::validate() const {
    if (lower.empty() || lower.size() != upper.size()) {
        throw Error("pso: bounds must be non-empty and of equal dimension");
    }
    for (std::size_t d = 0; d < lower.size(); ++d) {
        if (!std::isfinite(lower[d]) || !std::isfinite(upper[d]) || lower[d] > upper[d]) {
            throw Error("pso: bound " + std::to_string(d) + " is invalid");
        }
    }
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

Swarm::Swarm(const PsoConfig& config, SearchBounds bounds, RepairHook repair)
    : config_(config), bounds_(std::move(bounds)), repair_(std::move(repair)), best_cost_(kInf) {
    config_.validate();
    bounds_.validate();

    const std::size_t n = config_.n_particles;
    const std::size_t dim = bounds_.dim();
    engines_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        engines_.emplace_back(mix_seed(config_.seed, i));
    }
    positions_.resize(n * dim);
    velocities_.assign(n * dim, 0.0);
    pbest_positions_.resize(n * dim);
    pbest_costs_.assign(n, kInf);
    costs_.assign(n, kInf);
    best_position_.assign(dim, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const std::span<double> x(positions_.data() + i * dim, dim);
        for (std::size_t d = 0; d < dim; ++d) {
            x[d] = bounds_.lower[d] + uniform01(engines_[i]) * (bounds_.upper[d] - bounds_.lower[d]);
        }
        if (repair_) {
            repair_(x);
        }
    }
    pbest_positions_ = positions_;
}

double Swarm::step(const BatchObjective& objective) {
    const std::size_t n = config_.n_particles;
    const std::size_t dim = bounds_.dim();

    objective(positions_, dim, costs_);

    for (std::size_t i = 0; i < n; ++i) {
        if (costs_[i] < pbest_costs_[i]) {
            pbest_costs_[i] = costs_[i];
            std::copy_n(positions_.begin() + static_cast<std::ptrdiff_t>(i * dim), dim,
                        pbest_positions_.begin() + static_cast<std::ptrdiff_t>(i * dim));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (pbest_costs_[i] < best_cost_) {
            best_cost_ = pbest_costs_[i];
            std::copy_n(pbest_positions_.begin() + static_cast<std::ptrdiff_t>(i * dim), dim,
                        best_position_.begin());
        }
    }

    move_particles();
    ++iterations_done_;
    return best_cost_;
}

void Swarm::move_particles() {
    const std::size_t n = config_.n_particles;
    const std::size_t dim = bounds_.dim();
    const bool have_best = best_cost_ < kInf;

    for (std::size_t i = 0; i < n; ++i) {
        auto& engine = engines_[i];
        const std::span<double> x(positions_.data() + i * dim, dim);
        const std::span<double> v(velocities_.data() + i * dim, dim);
        const double* pbest = pbest_positions_.data() + i * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            const double r1 = uniform01(engine);
            const double r2 = uniform01(engine);
            double vel = config_.inertia * v[d] + config_.cognitive * r1 * (pbest[d] - x[d]);
            if (have_best) {
                vel += config_.social * r2 * (best_position_[d] - x[d]);
            }
            v[d] = vel;
            x[d] = std::clamp(x[d] + vel, bounds_.lower[d], bounds_.upper[d]);
        }
        if (repair_) {
            repair_(x);
        }
    }
}

PsoResult optimize(const PsoConfig& config, const SearchBounds& bounds, const BatchObjective& objective,
                   RepairHook repair) {
    Swarm swarm(config, bounds, std::move(repair));
    PsoResult result;
    result.cost_history.reserve(config.max_iters);
    for (std::size_t it = 0; it < config.max_iters; ++it) {
        result.cost_history.push_back(swarm.step(objective));
    }
    if (!(swarm.best_cost() < kInf)) {
        throw AllInfeasibleError{};
    }
    result.best_cost = swarm.best_cost();
    result.best_position.assign(swarm.best_position().begin(), swarm.best_position().end());
    return result;
}

} // namespace sirdfit
