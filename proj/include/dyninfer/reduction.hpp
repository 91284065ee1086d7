#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dyninfer/model.hpp"

namespace dyninfer {

/// Expected loss with the quantity marginalized out: lbar_i(x, yhat) =
/// sum_y P(Y_i = y | X_i = x) l(x, y, yhat). Dense over (round, x, yhat).
class BarLossTable {
public:
    BarLossTable() = default;
    BarLossTable(int n, std::size_t num_x, std::size_t num_yhat)
        : n_(n), num_x_(num_x), num_yhat_(num_yhat),
          values_(static_cast<std::size_t>(n) * num_x * num_yhat, 0.0) {}

    int horizon() const noexcept { return n_; }
    std::size_t num_x() const noexcept { return num_x_; }
    std::size_t num_yhat() const noexcept { return num_yhat_; }

    double operator()(int i, std::size_t x, std::size_t yhat) const { return values_[offset(i, x, yhat)]; }
    double& operator()(int i, std::size_t x, std::size_t yhat) { return values_[offset(i, x, yhat)]; }

    const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const BarLossTable&, const BarLossTable&) = default;

private:
    std::size_t offset(int i, std::size_t x, std::size_t yhat) const {
        return (static_cast<std::size_t>(i - 1) * num_x_ + x) * num_yhat_ + yhat;
    }

    int n_ = 0;
    std::size_t num_x_ = 0;
    std::size_t num_yhat_ = 0;
    std::vector<double> values_;
};

inline double observation_estimate_loss(const Problem& problem, int i, std::size_t x, std::size_t yhat) {
    problem.check_round(i);
    if (x >= problem.num_x() || yhat >= problem.num_yhat())
        fail(ErrorKind::UnknownLabel, "observation or estimate index out of range");
    const QuantityKernel& q = problem.quantity(i);
    const ContextualLoss& loss = problem.loss();
    double sum = 0.0;
    for (std::size_t y = 0; y < problem.num_y(); ++y) sum += q(x, y) * loss(x, y, yhat);
    return sum;
}

inline double observation_estimate_loss(const Problem& problem, int i, const std::string& x, const std::string& yhat) {
    problem.check_round(i);
    return observation_estimate_loss(problem, i, problem.x_space().index(x), problem.yhat_space().index(yhat));
}

inline BarLossTable bar_loss_table(const Problem& problem) {
    BarLossTable table(problem.horizon(), problem.num_x(), problem.num_yhat());
    for (int i = 1; i <= problem.horizon(); ++i)
        for (std::size_t x = 0; x < problem.num_x(); ++x)
            for (std::size_t a = 0; a < problem.num_yhat(); ++a)
                table(i, x, a) = observation_estimate_loss(problem, i, x, a);
    return table;
}

/// Single-round Bayes estimate argmin_yhat lbar_i(x, yhat). Exact ties go to
/// the smallest estimate index.
inline std::size_t myopic_bayes_estimate(const BarLossTable& table, int i, std::size_t x) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < table.num_yhat(); ++a)
        if (table(i, x, a) < table(i, x, best)) best = a;
    return best;
}

inline std::size_t myopic_bayes_estimate(const Problem& problem, int i, std::size_t x) {
    problem.check_round(i);
    if (x >= problem.num_x()) fail(ErrorKind::UnknownLabel, "observation index out of range");
    std::size_t best = 0;
    double best_value = observation_estimate_loss(problem, i, x, 0);
    for (std::size_t a = 1; a < problem.num_yhat(); ++a) {
        const double v = observation_estimate_loss(problem, i, x, a);
        if (v < best_value) {
            best = a;
            best_value = v;
        }
    }
    return best;
}

inline std::string myopic_bayes_estimate(const Problem& problem, int i, const std::string& x) {
    problem.check_round(i);
    return problem.yhat_space().label(myopic_bayes_estimate(problem, i, problem.x_space().index(x)));
}

/// The problem seen as a finite-horizon MDP: observations are states,
/// estimates are actions, lbar is the per-step cost. Holds a reference to the
/// source problem, which must outlive the view.
class MdpView {
public:
    explicit MdpView(const Problem& problem) : problem_(&problem), cost_(bar_loss_table(problem)) {}
    explicit MdpView(Problem&&) = delete;

    const Problem& problem() const noexcept { return *problem_; }
    const Alphabet& states() const noexcept { return problem_->x_space(); }
    const Alphabet& actions() const noexcept { return problem_->yhat_space(); }
    int horizon() const noexcept { return problem_->horizon(); }
    const BarLossTable& cost() const noexcept { return cost_; }
    const Distribution& init() const noexcept { return problem_->init(); }
    /// Controlled dynamics; empty for a one-round problem.
    const std::vector<TransitionKernel>& dynamics() const noexcept { return problem_->transitions(); }

    double cost(int i, std::size_t x, std::size_t a) const { return cost_(i, x, a); }
    /// P(X_{i+1} = next | X_i = x, action a), for i in 1..n-1.
    double transition(int i, std::size_t x, std::size_t a, std::size_t next) const {
        return problem_->transition(i + 1)(x, a, next);
    }

private:
    const Problem* problem_;
    BarLossTable cost_;
};

inline MdpView to_mdp(const Problem& problem) { return MdpView(problem); }
MdpView to_mdp(Problem&&) = delete;

} // namespace dyninfer
