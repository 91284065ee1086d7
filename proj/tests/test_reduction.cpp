#include <gtest/gtest.h>

#include "dyninfer/oracle.hpp"
#include "dyninfer/reduction.hpp"
#include "dyninfer/strategy_eval.hpp"
#include "dyninfer/worked_examples.hpp"

using namespace dyninfer;

TEST(ObservationEstimateLoss, ToyModelZeroOneLoss) {
    const Problem p = examples::example_section33(6);
    for (int i = 1; i <= 6; ++i) {
        EXPECT_NEAR(observation_estimate_loss(p, i, "0", "1"), 0.9, 1e-15);
        EXPECT_NEAR(observation_estimate_loss(p, i, "1", "1"), 0.4, 1e-15);
    }
}

TEST(ObservationEstimateLoss, StockModel) {
    const Problem p = examples::example_stock(6);
    EXPECT_NEAR(observation_estimate_loss(p, 2, "1", "0"), 0.7, 1e-15);
}

TEST(ObservationEstimateLoss, Errors) {
    const Problem p = examples::example_stock(2);
    EXPECT_THROW(observation_estimate_loss(p, 0, "0", "0"), Error);
    EXPECT_THROW(observation_estimate_loss(p, 3, "0", "0"), Error);
    try {
        observation_estimate_loss(p, 1, "7", "0");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnknownLabel);
    }
    try {
        observation_estimate_loss(p, 3, "0", "0");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RoundOutOfRange);
    }
}

TEST(BarLossTable, StationarySlicesAreIdentical) {
    const Problem p = examples::example_section33(6);
    const BarLossTable t = bar_loss_table(p);
    for (int i = 2; i <= 6; ++i)
        for (std::size_t x = 0; x < 2; ++x)
            for (std::size_t a = 0; a < 2; ++a) EXPECT_EQ(t(i, x, a), t(1, x, a));
}

TEST(BarLossTable, SingleRound) {
    const BarLossTable t = bar_loss_table(examples::example_stock(1));
    EXPECT_EQ(t.horizon(), 1);
    EXPECT_EQ(t.values().size(), 4u);
}

TEST(BarLossTable, StockSliceMatchesHandExpectation) {
    // Hand expectation: lbar(x, a) = P(Y != a | x) with P(Y=1|0)=0.4, P(Y=1|1)=0.7.
    const BarLossTable t = bar_loss_table(examples::example_stock(6));
    EXPECT_NEAR(t(1, 0, 0), 0.4, 1e-15);
    EXPECT_NEAR(t(1, 0, 1), 0.6, 1e-15);
    EXPECT_NEAR(t(1, 1, 0), 0.7, 1e-15);
    EXPECT_NEAR(t(1, 1, 1), 0.3, 1e-15);
}

TEST(BarLossTable, AgreesWithExplicitSumOnRandomModels) {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const Problem p = random_problem({3, 3, 4, 2}, rng);
        const BarLossTable t = bar_loss_table(p);
        for (int i = 1; i <= p.horizon(); ++i)
            for (std::size_t x = 0; x < p.num_x(); ++x)
                for (std::size_t a = 0; a < p.num_yhat(); ++a) {
                    double sum = 0.0;
                    for (std::size_t y = 0; y < p.num_y(); ++y) sum += p.quantity(i).rows[x][y] * p.loss()(x, y, a);
                    EXPECT_NEAR(t(i, x, a), sum, 1e-12);
                }
    }
}

TEST(BarLossTable, ZeroOneLossIsComplementOfQuantityKernel) {
    SplitMix64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        ProblemData d = random_problem({2, 3, 3, 3}, rng).to_data();
        d.loss = ContextualLoss::from_function(3, 3, 3, [](std::size_t, std::size_t y, std::size_t a) { return y == a ? 0.0 : 1.0; }).values;
        const Problem p = validate_problem(d);
        const BarLossTable t = bar_loss_table(p);
        for (int i = 1; i <= 2; ++i)
            for (std::size_t x = 0; x < 3; ++x)
                for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(t(i, x, a), 1.0 - p.quantity(i).rows[x][a], 1e-12);
    }
}

TEST(BarLossTable, DoesNotDependOnAnyStrategy) {
    const Problem p = examples::example_stock(4);
    const BarLossTable before = bar_loss_table(p);
    const EvalResult ignored = evaluate_markov(p, MarkovStrategy::constant(p, 1));
    (void)ignored;
    const BarLossTable after = bar_loss_table(p);
    EXPECT_EQ(before.values(), after.values());
}

TEST(MyopicBayesEstimate, WorkedExamples) {
    const Problem toy = examples::example_section33(6);
    EXPECT_EQ(myopic_bayes_estimate(toy, 1, "1"), "1");
    EXPECT_EQ(myopic_bayes_estimate(toy, 1, "0"), "0");
    const Problem stock = examples::example_stock(6);
    EXPECT_EQ(myopic_bayes_estimate(stock, 1, "0"), "0");
    EXPECT_EQ(myopic_bayes_estimate(stock, 1, "1"), "1");
}

TEST(MyopicBayesEstimate, TiesGoToSmallestIndex) {
    ProblemData d;
    d.n = 1;
    d.x_space = {"x"};
    d.y_space = {"0", "1"};
    d.yhat_space = {"a", "b", "c"};
    d.init = {1.0};
    d.quantities = {{{0.5, 0.5}}};
    // lbar = (1, 0.5, 0.5): b and c tie.
    d.loss = {1, 0, 0, 1, 1, 1};
    const Problem p = validate_problem(d);
    EXPECT_EQ(myopic_bayes_estimate(p, 1, "x"), "b");
}

TEST(MyopicBayesEstimate, Errors) {
    const Problem p = examples::example_stock(2);
    EXPECT_THROW(myopic_bayes_estimate(p, 5, "0"), Error);
    EXPECT_THROW(myopic_bayes_estimate(p, 1, "nope"), Error);
}

TEST(ToMdp, ToyModelShape) {
    const Problem p = examples::example_section33(6);
    const MdpView mdp = to_mdp(p);
    EXPECT_EQ(mdp.states().size(), 2u);
    EXPECT_EQ(mdp.actions().size(), 2u);
    EXPECT_EQ(mdp.horizon(), 6);
    EXPECT_EQ(mdp.cost(), bar_loss_table(p));
    EXPECT_EQ(&mdp.problem(), &p);
    EXPECT_EQ(mdp.dynamics(), p.transitions());
}

TEST(ToMdp, SingleRoundHasNoDynamics) {
    const Problem p = examples::example_section33(1);
    EXPECT_TRUE(to_mdp(p).dynamics().empty());
}

TEST(ToMdp, StockDynamicsFollowTheAction) {
    const Problem p = examples::example_stock(6);
    const MdpView mdp = to_mdp(p);
    for (int i = 1; i < 6; ++i)
        for (std::size_t x = 0; x < 2; ++x)
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t next = 0; next < 2; ++next)
                    EXPECT_EQ(mdp.transition(i, x, a, next), next == a ? 1.0 : 0.0);
}
