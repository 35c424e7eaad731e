#include "doctest.h"

#include "sirdfit/errors.hpp"
#include "sirdfit/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

using namespace sirdfit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BatchObjective sphere_at(std::vector<double> center) {
    return [center](std::span<const double> positions, std::size_t dim, std::span<double> costs) {
        for (std::size_t i = 0; i < costs.size(); ++i) {
            double acc = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double e = positions[i * dim + d] - center[d];
                acc += e * e;
            }
            costs[i] = acc;
        }
    };
}

} // namespace

TEST_SUITE("pso") {

TEST_CASE("seed mixing is deterministic and sensitive to both inputs") {
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
    CHECK(mix_seed(1, 2) != mix_seed(1, 3));
    CHECK(mix_seed(2, 2) != mix_seed(1, 2));
    CHECK(mix_seed(0, 0) != 0);
}

TEST_CASE("uniform01 covers [0,1)") {
    std::mt19937_64 engine(123);
    double acc = 0.0;
    for (int k = 0; k < 20000; ++k) {
        const double u = uniform01(engine);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        acc += u;
    }
    CHECK(acc / 20000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("configuration and bounds are validated") {
    PsoConfig bad;
    bad.n_particles = 0;
    SearchBounds box{.lower = {0.0}, .upper = {1.0}};
    CHECK_THROWS_AS(Swarm(bad, box), Error);

    SearchBounds inverted{.lower = {1.0}, .upper = {0.0}};
    CHECK_THROWS_AS(Swarm(PsoConfig{.n_particles = 4}, inverted), Error);

    SearchBounds mismatched{.lower = {0.0, 0.0}, .upper = {1.0}};
    CHECK_THROWS_AS(Swarm(PsoConfig{.n_particles = 4}, mismatched), Error);
}

TEST_CASE("sphere minimum is found") {
    PsoConfig cfg;
    cfg.n_particles = 80;
    cfg.max_iters = 200;
    cfg.seed = 42;
    const SearchBounds box{.lower = {-5.0, -5.0}, .upper = {10.0, 10.0}};
    const PsoResult res = optimize(cfg, box, sphere_at({3.0, 3.0}));
    CHECK(res.best_cost < 1e-10);
    CHECK(res.best_position[0] == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(res.best_position[1] == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("identical seeds reproduce the run bit for bit") {
    PsoConfig cfg;
    cfg.n_particles = 40;
    cfg.max_iters = 60;
    cfg.seed = 7;
    const SearchBounds box{.lower = {0.0, 0.0, 0.0}, .upper = {4.0, 4.0, 4.0}};
    const PsoResult a = optimize(cfg, box, sphere_at({1.0, 2.0, 3.0}));
    const PsoResult b = optimize(cfg, box, sphere_at({1.0, 2.0, 3.0}));
    CHECK(a.best_cost == b.best_cost);
    CHECK(a.best_position == b.best_position);
    CHECK(a.cost_history == b.cost_history);

    cfg.seed = 8;
    const PsoResult c = optimize(cfg, box, sphere_at({1.0, 2.0, 3.0}));
    CHECK(c.best_position != a.best_position);
}

TEST_CASE("cost history is complete and non-increasing") {
    PsoConfig cfg;
    cfg.n_particles = 30;
    cfg.max_iters = 50;
    cfg.seed = 3;
    const SearchBounds box{.lower = {-2.0}, .upper = {2.0}};
    const PsoResult res = optimize(cfg, box, sphere_at({0.5}));
    REQUIRE(res.cost_history.size() == cfg.max_iters);
    for (std::size_t k = 1; k < res.cost_history.size(); ++k) {
        CHECK(res.cost_history[k] <= res.cost_history[k - 1]);
    }
    CHECK(res.cost_history.back() == res.best_cost);
}

TEST_CASE("every evaluated position stays inside the box") {
    PsoConfig cfg;
    cfg.n_particles = 25;
    cfg.max_iters = 40;
    cfg.seed = 9;
    const SearchBounds box{.lower = {0.0, -1.0}, .upper = {1.0, 1.0}};
    bool in_bounds = true;
    const BatchObjective checked = [&](std::span<const double> positions, std::size_t dim,
                                       std::span<double> costs) {
        for (std::size_t i = 0; i < costs.size(); ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double x = positions[i * dim + d];
                in_bounds = in_bounds && x >= box.lower[d] && x <= box.upper[d];
            }
            const double e0 = positions[i * dim] - 5.0; // optimum outside the box
            const double e1 = positions[i * dim + 1];
            costs[i] = e0 * e0 + e1 * e1;
        }
    };
    const PsoResult res = optimize(cfg, box, checked);
    CHECK(in_bounds);
    CHECK(res.best_position[0] == doctest::Approx(1.0)); // clamped onto the boundary
}

TEST_CASE("first iteration scores the initial sample") {
    PsoConfig cfg;
    cfg.n_particles = 16;
    cfg.max_iters = 5;
    cfg.seed = 21;
    const SearchBounds box{.lower = {-1.0, -1.0}, .upper = {1.0, 1.0}};
    Swarm swarm(cfg, box);
    const std::vector<double> initial(swarm.positions().begin(), swarm.positions().end());
    std::vector<double> first_costs;
    const BatchObjective objective = [&](std::span<const double> positions, std::size_t dim,
                                         std::span<double> costs) {
        for (std::size_t i = 0; i < costs.size(); ++i) {
            double acc = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                acc += positions[i * dim + d] * positions[i * dim + d];
            }
            costs[i] = acc;
        }
        if (first_costs.empty()) {
            first_costs.assign(costs.begin(), costs.end());
        }
    };
    swarm.step(objective);
    REQUIRE(first_costs.size() == cfg.n_particles);
    const auto best = std::min_element(first_costs.begin(), first_costs.end());
    CHECK(swarm.best_cost() == *best);
    const std::size_t idx = static_cast<std::size_t>(best - first_costs.begin());
    CHECK(swarm.best_position()[0] == initial[idx * 2]);
    CHECK(swarm.best_position()[1] == initial[idx * 2 + 1]);
}

TEST_CASE("ties go to the lowest particle index") {
    PsoConfig cfg;
    cfg.n_particles = 8;
    cfg.max_iters = 1;
    cfg.seed = 4;
    const SearchBounds box{.lower = {0.0}, .upper = {1.0}};
    Swarm swarm(cfg, box);
    const double first_particle = swarm.positions()[0];
    swarm.step([](std::span<const double>, std::size_t, std::span<double> costs) {
        std::fill(costs.begin(), costs.end(), 0.25);
    });
    CHECK(swarm.best_cost() == 0.25);
    CHECK(swarm.best_position()[0] == first_particle);
}

TEST_CASE("an all-infeasible swarm never moves and is reported") {
    PsoConfig cfg;
    cfg.n_particles = 10;
    cfg.max_iters = 3;
    cfg.seed = 5;
    const SearchBounds box{.lower = {0.0, 0.0}, .upper = {1.0, 1.0}};
    Swarm swarm(cfg, box);
    const std::vector<double> initial(swarm.positions().begin(), swarm.positions().end());
    const BatchObjective infeasible = [](std::span<const double>, std::size_t, std::span<double> costs) {
        std::fill(costs.begin(), costs.end(), kInf);
    };
    swarm.step(infeasible);
    swarm.step(infeasible);
    // no personal or global best exists, so there is nothing to pull toward
    const std::vector<double> after(swarm.positions().begin(), swarm.positions().end());
    CHECK(after == initial);

    CHECK_THROWS_AS(optimize(cfg, box, infeasible), AllInfeasibleError);
}

TEST_CASE("nan costs are never selected") {
    PsoConfig cfg;
    cfg.n_particles = 6;
    cfg.max_iters = 2;
    cfg.seed = 12;
    const SearchBounds box{.lower = {0.0}, .upper = {1.0}};
    const BatchObjective mostly_nan = [](std::span<const double>, std::size_t, std::span<double> costs) {
        std::fill(costs.begin(), costs.end(), std::numeric_limits<double>::quiet_NaN());
        costs[3] = 0.5;
    };
    const PsoResult res = optimize(cfg, box, mostly_nan);
    CHECK(res.best_cost == 0.5);

    const BatchObjective all_nan = [](std::span<const double>, std::size_t, std::span<double> costs) {
        std::fill(costs.begin(), costs.end(), std::numeric_limits<double>::quiet_NaN());
    };
    CHECK_THROWS_AS(optimize(cfg, box, all_nan), AllInfeasibleError);
}

TEST_CASE("the repair hook runs before every evaluation") {
    PsoConfig cfg;
    cfg.n_particles = 20;
    cfg.max_iters = 30;
    cfg.seed = 33;
    const SearchBounds box{.lower = {0.0, 0.0}, .upper = {10.0, 10.0}};
    const RepairHook order = [](std::span<double> x) {
        if (x[0] > x[1]) {
            std::swap(x[0], x[1]);
        }
    };
    bool ordered = true;
    const BatchObjective objective = [&](std::span<const double> positions, std::size_t dim,
                                         std::span<double> costs) {
        for (std::size_t i = 0; i < costs.size(); ++i) {
            ordered = ordered && positions[i * dim] <= positions[i * dim + 1];
            const double e = positions[i * dim + 1] - 4.0;
            costs[i] = e * e + positions[i * dim];
        }
    };
    optimize(cfg, box, objective, order);
    CHECK(ordered);
}

} // TEST_SUITE
