#include <gtest/gtest.h>

#include <cmath>

#include "dyninfer/dp_solver.hpp"
#include "dyninfer/oracle.hpp"
#include "dyninfer/strategy_eval.hpp"
#include "dyninfer/worked_examples.hpp"
#include "reference_oracles.hpp"

using namespace dyninfer;

namespace {

/// Calls f on every Markov strategy of p (|Yhat|^(n |X|) of them).
template <class F>
void for_each_markov(const Problem& p, F&& f) {
    MarkovStrategy s = MarkovStrategy::constant(p, 0);
    while (true) {
        f(s);
        std::size_t k = 0;
        for (; k < s.table.size(); ++k) {
            if (++s.table[k] < p.num_yhat()) break;
            s.table[k] = 0;
        }
        if (k == s.table.size()) return;
    }
}

} // namespace

TEST(EvaluateMarkov, OptimalStrategyReproducesValueFunction) {
    const Problem p = examples::example_section33(6);
    const SolveResult r = solve(p);
    const EvalResult e = evaluate_markov(p, MarkovStrategy::optimal(r));
    for (int i = 1; i <= 6; ++i)
        for (std::size_t x = 0; x < 2; ++x) EXPECT_NEAR(e(i, x), r.v(i, x), 1e-12);
}

TEST(EvaluateMarkov, StockMyopicVersusOptimal) {
    const Problem p = examples::example_stock(6);
    const MarkovStrategy myopic = MarkovStrategy::myopic(p);
    EXPECT_EQ(myopic(1, 0), 0u);
    EXPECT_EQ(myopic(1, 1), 1u);
    const double j_myopic = evaluate_markov(p, myopic).j;
    EXPECT_NEAR(j_myopic, reference::markov_loss_by_enumeration(p, myopic), 1e-12);
    EXPECT_NEAR(j_myopic, 2.4, 1e-12);

    const MarkovStrategy best = MarkovStrategy::optimal(solve(p));
    const double j_best = evaluate_markov(p, best).j;
    EXPECT_NEAR(j_best, reference::markov_loss_by_enumeration(p, best), 1e-12);
    EXPECT_NEAR(j_best, 2.1, 1e-12);
    EXPECT_LT(j_best, j_myopic);
}

TEST(EvaluateMarkov, MatchesTrajectoryEnumerationOnRandomModels) {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const Problem p = random_problem({3, 3, 2, 2}, rng);
        MarkovStrategy s = MarkovStrategy::constant(p, 0);
        for (auto& a : s.table) a = rng() % 2;
        const EvalResult e = evaluate_markov(p, s);
        EXPECT_NEAR(e.j, reference::markov_loss_by_enumeration(p, s), 1e-12);
        double j = 0.0;
        for (std::size_t x = 0; x < 3; ++x) j += p.init()[x] * e(1, x);
        EXPECT_NEAR(e.j, j, 1e-12);
    }
}

TEST(EvaluateMarkov, ShapeMismatch) {
    const Problem p = examples::example_stock(3);
    MarkovStrategy s = MarkovStrategy::constant(examples::example_stock(2), 0);
    try {
        evaluate_markov(p, s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
    }
    s = MarkovStrategy::constant(p, 5);
    EXPECT_THROW(evaluate_markov(p, s), Error);
}

TEST(LossToGo, BaseCaseIsLastRoundBarLoss) {
    const Problem p = examples::example_section33(4);
    const BarLossTable lbar = bar_loss_table(p);
    MarkovStrategy s = MarkovStrategy::constant(p, 0);
    s(4, 1) = 1;
    const EvalResult e = evaluate_markov(p, s);
    for (std::size_t x = 0; x < 2; ++x) EXPECT_EQ(loss_to_go(e, 4, x), lbar(4, x, s(4, x)));
}

TEST(LossToGo, WorkedValues) {
    const Problem p = examples::example_section33(6);
    EXPECT_NEAR(loss_to_go(evaluate_markov(p, MarkovStrategy::optimal(solve(p))), 1, "1"), 2.1, 1e-12);

    const EvalResult keep = evaluate_markov(p, MarkovStrategy::constant(p, 1));
    EXPECT_NEAR(loss_to_go(keep, 5, "1"), 0.8, 1e-12);
    // Cross-check: a two-round copy started at x = 1 is the same tail.
    const Problem tail = examples::example_section33(2).with_init({0.0, 1.0});
    EXPECT_NEAR(reference::markov_loss_by_enumeration(tail, MarkovStrategy::constant(tail, 1)), 0.8, 1e-12);
}

TEST(LossToGo, Errors) {
    const Problem p = examples::example_section33(3);
    const EvalResult e = evaluate_markov(p, MarkovStrategy::constant(p, 0));
    EXPECT_THROW(loss_to_go(e, 0, "0"), Error);
    EXPECT_THROW(loss_to_go(e, 4, "0"), Error);
    EXPECT_THROW(loss_to_go(e, 1, "9"), Error);
}

TEST(MarkovDominance, DominanceOverAllMarkovStrategies) {
    SplitMix64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const Problem p = random_problem({3, 2, 2, 2}, rng);
        const SolveResult r = solve(p);
        int count = 0;
        for_each_markov(p, [&](const MarkovStrategy& s) {
            ++count;
            const EvalResult e = evaluate_markov(p, s);
            for (int i = 1; i <= 3; ++i)
                for (std::size_t x = 0; x < 2; ++x) EXPECT_GE(e(i, x), r.v(i, x) - 1e-9);
        });
        EXPECT_EQ(count, 64);
    }
}

TEST(MarkovDominance, DominanceOnLargerModelsWithRandomStrategies) {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const Problem p = random_problem({6, 4, 3, 3}, rng);
        const SolveResult r = solve(p);
        for (int k = 0; k < 50; ++k) {
            MarkovStrategy s = MarkovStrategy::constant(p, 0);
            for (auto& a : s.table) a = rng() % 3;
            const EvalResult e = evaluate_markov(p, s);
            for (int i = 1; i <= 6; ++i)
                for (std::size_t x = 0; x < 4; ++x) EXPECT_GE(e(i, x), r.v(i, x) - 1e-9);
        }
    }
}

TEST(MarkovDominance, EqualityWhenTailFollowsOptimalPolicy) {
    SplitMix64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const Problem p = random_problem({5, 3, 2, 2}, rng);
        const SolveResult r = solve(p);
        for (int from = 1; from <= 5; ++from) {
            MarkovStrategy s = MarkovStrategy::optimal(r);
            for (int i = 1; i < from; ++i)
                for (std::size_t x = 0; x < 3; ++x) s(i, x) = rng() % 2;
            const EvalResult e = evaluate_markov(p, s);
            for (int i = from; i <= 5; ++i)
                for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(e(i, x), r.v(i, x), 1e-9);
        }
    }
}

TEST(Simulate, DeterministicModelSingleRolloutIsExact) {
    // Point-mass init, deterministic transitions and point-mass quantities.
    ProblemData d = examples::example_stock(5).to_data();
    for (auto& q : d.quantities) q = {{1.0, 0.0}, {0.0, 1.0}};
    const Problem p = validate_problem(d);
    const MarkovStrategy s = MarkovStrategy::myopic(examples::example_stock(5));
    const SimulationResult sim = simulate(p, s, 1, 99);
    EXPECT_EQ(sim.mean, evaluate_markov(p, s).j);
    EXPECT_EQ(sim.variance, 0.0);
}

TEST(Simulate, StockOptimalWithinThreeSigma) {
    const Problem p = examples::example_stock(6);
    const MarkovStrategy s = MarkovStrategy::optimal(solve(p));
    const SimulationResult sim = simulate(p, s, 100'000, 2024);
    const double half_width = 3.0 * std::sqrt(sim.variance / 100'000.0);
    EXPECT_NEAR(sim.mean, 2.1, half_width);
}

TEST(Simulate, SameSeedSameBits) {
    const Problem p = examples::example_section33(6).with_init({0.3, 0.7});
    const MarkovStrategy s = MarkovStrategy::optimal(solve(p));
    SimulationOptions keep{true, 50};
    const SimulationResult a = simulate(p, s, 5000, 42, keep);
    const SimulationResult b = simulate(p, s, 5000, 42, keep);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.variance, b.variance);
    ASSERT_EQ(a.trajectories.size(), 50u);
    for (std::size_t k = 0; k < 50; ++k) {
        EXPECT_EQ(a.trajectories[k].xs, b.trajectories[k].xs);
        EXPECT_EQ(a.trajectories[k].ys, b.trajectories[k].ys);
    }
    const SimulationResult c = simulate(p, s, 5000, 43);
    EXPECT_NE(a.mean, c.mean);
}

TEST(Simulate, TrajectoriesAreConsistent) {
    const Problem p = examples::example_stock(4);
    const MarkovStrategy s = MarkovStrategy::optimal(solve(p));
    const SimulationResult sim = simulate(p, s, 200, 5, SimulationOptions{true, 10'000});
    ASSERT_EQ(sim.trajectories.size(), 200u);
    for (const auto& t : sim.trajectories) {
        ASSERT_EQ(t.xs.size(), 4u);
        double loss = 0.0;
        for (int i = 1; i <= 4; ++i) {
            const std::size_t k = static_cast<std::size_t>(i - 1);
            EXPECT_EQ(t.yhats[k], s(i, t.xs[k]));
            if (i > 1) {
                EXPECT_EQ(t.xs[k], t.yhats[k - 1]); // X_i = Yhat_{i-1}
            }
            loss += p.loss()(t.xs[k], t.ys[k], t.yhats[k]);
        }
        EXPECT_EQ(loss, t.loss);
    }
    // Rollout r is reproducible on its own.
    const Trajectory again = simulate_one(p, s, 5, 17);
    EXPECT_EQ(again.xs, sim.trajectories[17].xs);
    EXPECT_EQ(again.ys, sim.trajectories[17].ys);
}

TEST(Simulate, Errors) {
    const Problem p = examples::example_stock(3);
    EXPECT_THROW(simulate(p, MarkovStrategy::constant(p, 0), 0, 1), Error);
    EXPECT_THROW(simulate(p, MarkovStrategy::constant(examples::example_stock(2), 0), 10, 1), Error);
}

TEST(SampleCategorical, InverseCdf) {
    const std::vector<double> probs{0.2, 0.0, 0.5, 0.3};
    EXPECT_EQ(sample_categorical(probs, 0.0), 0u);
    EXPECT_EQ(sample_categorical(probs, 0.19999), 0u);
    EXPECT_EQ(sample_categorical(probs, 0.2), 2u);
    EXPECT_EQ(sample_categorical(probs, 0.71), 3u);
    EXPECT_EQ(sample_categorical(probs, 0.9999999999999999), 3u);
}

TEST(SplitMix64, KnownStream) {
    // Reference outputs of SplitMix64 seeded with 1234567.
    SplitMix64 g(1234567);
    EXPECT_EQ(g(), 6457827717110365317ULL);
    EXPECT_EQ(g(), 3203168211198807973ULL);
    EXPECT_EQ(g(), 9817491932198370423ULL);
}
