#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace sirdfit {

/// Swarm hyperparameters. Defaults are the "heavy" search profile used by
/// the calibration pipeline.
struct PsoConfig {
    std::size_t n_particles = 10000;
    double inertia = 0.5;
    double cognitive = 0.5;
    double social = 0.5;
    std::size_t max_iters = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SearchBounds {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dim() const { return lower.size(); }
    void validate() const;
};

/// Evaluates a row-major block of positions (n x dim) into cost slots.
/// Implementations may parallelize internally but must write each cost to
/// its own slot; slot order is what keeps runs reproducible.
using BatchObjective =
    std::function<void(std::span<const double> positions, std::size_t dim, std::span<double> costs)>;

/// Optional in-place fixup applied to a single position after init and
/// after every move, before evaluation.
using RepairHook = std::function<void(std::span<double> position)>;

/// SplitMix64 finalizer over base + GOLDEN * (index + 1). Used to derive
/// per-particle (and per-window, per-rep) streams from one root seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

/// Uniform double in [0, 1) using the top 53 bits of one engine draw.
double uniform01(std::mt19937_64& engine);

struct PsoResult {
    std::vector<double> best_position;
    double best_cost = 0.0;
    std::vector<double> cost_history; // best-so-far after each iteration
};

/// Particles live in fixed slots; every random draw comes from the owning
/// particle's engine, so results do not depend on evaluation threading.
class Swarm {
public:
    Swarm(const PsoConfig& config, SearchBounds bounds, RepairHook repair = {});

    /// One iteration: evaluate current positions, refresh personal and
    /// global bests, then move every particle. Returns best cost so far.
    double step(const BatchObjective& objective);

    std::size_t n_particles() const { return config_.n_particles; }
    std::size_t dim() const { return bounds_.dim(); }
    std::span<const double> positions() const { return positions_; }
    std::span<const double> best_position() const { return best_position_; }
    double best_cost() const { return best_cost_; }
    std::size_t iterations_done() const { return iterations_done_; }

private:
    void move_particles();

    PsoConfig config_;
    SearchBounds bounds_;
    RepairHook repair_;
    std::vector<std::mt19937_64> engines_;
    std::vector<double> positions_;
    std::vector<double> velocities_;
    std::vector<double> pbest_positions_;
    std::vector<double> pbest_costs_;
    std::vector<double> costs_;
    std::vector<double> best_position_;
    double best_cost_;
    std::size_t iterations_done_ = 0;
};

/// Runs a full swarm and returns the best point. Throws AllInfeasibleError
/// if no particle ever produced a comparable (non-NaN, finite) cost.
PsoResult optimize(const PsoConfig& config, const SearchBounds& bounds, const BatchObjective& objective,
                   RepairHook repair = {});

} // namespace sirdfit
