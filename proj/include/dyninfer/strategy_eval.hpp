#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dyninfer/dp_solver.hpp"
#include "dyninfer/model.hpp"
#include "dyninfer/random.hpp"
#include "dyninfer/reduction.hpp"

namespace dyninfer {

/// Deterministic Markov strategy: one estimate index per (round, observation).
struct MarkovStrategy {
    int n = 0;
    std::size_t num_x = 0;
    std::vector<std::size_t> table; // (i, x), i 1-based

    std::size_t operator()(int i, std::size_t x) const { return table[static_cast<std::size_t>(i - 1) * num_x + x]; }
    std::size_t& operator()(int i, std::size_t x) { return table[static_cast<std::size_t>(i - 1) * num_x + x]; }

    static MarkovStrategy constant(const Problem& p, std::size_t yhat) {
        return MarkovStrategy{p.horizon(), p.num_x(), std::vector<std::size_t>(static_cast<std::size_t>(p.horizon()) * p.num_x(), yhat)};
    }
    static MarkovStrategy optimal(const SolveResult& r) { return MarkovStrategy{r.n, r.num_x(), r.policy}; }
    static MarkovStrategy myopic(const Problem& p) {
        const BarLossTable table = bar_loss_table(p);
        MarkovStrategy s = constant(p, 0);
        for (int i = 1; i <= p.horizon(); ++i)
            for (std::size_t x = 0; x < p.num_x(); ++x) s(i, x) = myopic_bayes_estimate(table, i, x);
        return s;
    }

    friend bool operator==(const MarkovStrategy&, const MarkovStrategy&) = default;
};

inline void check_strategy_shape(const Problem& p, const MarkovStrategy& s) {
    if (s.n != p.horizon() || s.num_x != p.num_x() || s.table.size() != static_cast<std::size_t>(p.horizon()) * p.num_x())
        fail(ErrorKind::ShapeMismatch, "strategy shape does not match the problem");
    for (std::size_t a : s.table)
        if (a >= p.num_yhat()) fail(ErrorKind::ShapeMismatch, "strategy uses an estimate index outside the estimate space");
}

/// Exact inference loss and loss-to-go table of a Markov strategy.
struct EvalResult {
    int n = 0;
    std::size_t num_x = 0;
    Alphabet x_space;
    double j = 0.0;
    std::vector<double> v; // (i, x)

    double operator()(int i, std::size_t x) const { return v[static_cast<std::size_t>(i - 1) * num_x + x]; }
};

inline EvalResult evaluate_markov(const Problem& problem, const MarkovStrategy& strategy) {
    check_strategy_shape(problem, strategy);
    const BarLossTable lbar = bar_loss_table(problem);
    const int n = problem.horizon();
    const std::size_t nx = problem.num_x();

    EvalResult out;
    out.n = n;
    out.num_x = nx;
    out.x_space = problem.x_space();
    out.v.assign(static_cast<std::size_t>(n) * nx, 0.0);
    auto at = [&](int i, std::size_t x) -> double& { return out.v[static_cast<std::size_t>(i - 1) * nx + x]; };

    for (int i = n; i >= 1; --i) {
        for (std::size_t x = 0; x < nx; ++x) {
            const std::size_t a = strategy(i, x);
            double value = lbar(i, x, a);
            if (i < n) {
                const Distribution& next = problem.transition(i + 1).row(x, a);
                double expected = 0.0;
                for (std::size_t x2 = 0; x2 < nx; ++x2) expected += next[x2] * at(i + 1, x2);
                value += expected;
            }
            at(i, x) = value;
        }
    }
    for (std::size_t x = 0; x < nx; ++x) out.j += problem.init()[x] * at(1, x);
    return out;
}

inline double loss_to_go(const EvalResult& result, int i, std::size_t x) {
    if (i < 1 || i > result.n) fail(ErrorKind::RoundOutOfRange, "round " + std::to_string(i) + " outside 1.." + std::to_string(result.n));
    if (x >= result.num_x) fail(ErrorKind::UnknownLabel, "observation index out of range");
    return result(i, x);
}

inline double loss_to_go(const EvalResult& result, int i, const std::string& x) {
    if (i < 1 || i > result.n) fail(ErrorKind::RoundOutOfRange, "round " + std::to_string(i) + " outside 1.." + std::to_string(result.n));
    return loss_to_go(result, i, result.x_space.index(x));
}

struct Trajectory {
    std::uint64_t rollout = 0; // substream index under the run's seed
    std::vector<std::size_t> xs;
    std::vector<std::size_t> ys;
    std::vector<std::size_t> yhats;
    double loss = 0.0;
};

struct SimulationOptions {
    bool keep_trajectories = false;
    std::size_t trajectory_cap = 10'000;
};

struct SimulationResult {
    double mean = 0.0;
    double variance = 0.0; // unbiased sample variance; 0 for a single rollout
    std::uint64_t rollouts = 0;
    std::uint64_t seed = 0;
    std::vector<Trajectory> trajectories;
};

/// One sampled episode on substream `rollout`. Draw order per round:
/// (X_1 on the first round), Y_i, then X_{i+1}.
inline Trajectory simulate_one(const Problem& problem, const MarkovStrategy& strategy, std::uint64_t seed, std::uint64_t rollout) {
    SplitMix64 rng = SplitMix64::substream(seed, rollout);
    const int n = problem.horizon();
    Trajectory t;
    t.rollout = rollout;
    std::size_t x = sample_categorical(problem.init(), rng.uniform());
    for (int i = 1; i <= n; ++i) {
        const std::size_t y = sample_categorical(problem.quantity(i).rows[x], rng.uniform());
        const std::size_t a = strategy(i, x);
        t.xs.push_back(x);
        t.ys.push_back(y);
        t.yhats.push_back(a);
        t.loss += problem.loss()(x, y, a);
        if (i < n) x = sample_categorical(problem.transition(i + 1).row(x, a), rng.uniform());
    }
    return t;
}

/// Monte Carlo estimate of the inference loss. Rollout r always uses
/// substream r, so the output depends only on the inputs and the seed.
inline SimulationResult simulate(const Problem& problem, const MarkovStrategy& strategy, std::uint64_t rollouts,
                                 std::uint64_t seed, const SimulationOptions& options = {}) {
    check_strategy_shape(problem, strategy);
    if (rollouts < 1) fail(ErrorKind::InvalidParams, "rollouts must be at least 1");

    std::vector<double> losses;
    losses.reserve(rollouts);
    SimulationResult out;
    out.rollouts = rollouts;
    out.seed = seed;
    for (std::uint64_t r = 0; r < rollouts; ++r) {
        Trajectory t = simulate_one(problem, strategy, seed, r);
        losses.push_back(t.loss);
        if (options.keep_trajectories && out.trajectories.size() < options.trajectory_cap)
            out.trajectories.push_back(std::move(t));
    }
    double sum = 0.0;
    for (double l : losses) sum += l;
    out.mean = sum / static_cast<double>(rollouts);
    if (rollouts > 1) {
        double ss = 0.0;
        for (double l : losses) ss += (l - out.mean) * (l - out.mean);
        out.variance = ss / static_cast<double>(rollouts - 1);
    }
    return out;
}

} // namespace dyninfer
