#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "dyninfer/model.hpp"
#include "dyninfer/reduction.hpp"

namespace dyninfer {

/// Q* entries within this distance of the row minimum count as tied.
inline constexpr double kTieTolerance = 1e-9;

/// How to pick among tied minimizers of a Q* row.
enum class TieBreakRule {
    MyopicPreferred, ///< the single-round Bayes estimate if tied, else the smallest index
    FirstIndex,      ///< always the smallest tied index
};

/// Output of backward induction. All tables are indexed by 1-based round.
struct SolveResult {
    int n = 0;
    Alphabet x_space;
    Alphabet yhat_space;
    TieBreakRule rule = TieBreakRule::MyopicPreferred;
    std::vector<double> v_star;                    // (i, x)
    std::vector<double> q_star;                    // (i, x, yhat)
    std::vector<std::size_t> policy;               // (i, x)
    std::vector<std::vector<std::size_t>> tie_sets; // (i, x), ascending
    std::vector<std::size_t> myopic;               // (i, x)

    std::size_t num_x() const noexcept { return x_space.size(); }
    std::size_t num_yhat() const noexcept { return yhat_space.size(); }

    double v(int i, std::size_t x) const { return v_star[cell(i, x)]; }
    double q(int i, std::size_t x, std::size_t a) const { return q_star[cell(i, x) * num_yhat() + a]; }
    std::size_t action(int i, std::size_t x) const { return policy[cell(i, x)]; }
    const std::vector<std::size_t>& ties(int i, std::size_t x) const { return tie_sets[cell(i, x)]; }
    std::size_t myopic_action(int i, std::size_t x) const { return myopic[cell(i, x)]; }

    std::size_t cell(int i, std::size_t x) const { return static_cast<std::size_t>(i - 1) * num_x() + x; }
};

inline std::size_t break_tie(const std::vector<std::size_t>& tied, std::size_t myopic, TieBreakRule rule) {
    if (rule == TieBreakRule::MyopicPreferred && std::find(tied.begin(), tied.end(), myopic) != tied.end())
        return myopic;
    return tied.front();
}

/// Backward induction over rounds n..1:
///   Q*_n(x, a) = lbar_n(x, a)
///   Q*_i(x, a) = lbar_i(x, a) + sum_x' P(x' | x, a) V*_{i+1}(x')
///   V*_i(x)    = min_a Q*_i(x, a)
inline SolveResult solve(const Problem& problem, TieBreakRule rule = TieBreakRule::MyopicPreferred) {
    const MdpView mdp = to_mdp(problem);
    const int n = problem.horizon();
    const std::size_t nx = problem.num_x();
    const std::size_t na = problem.num_yhat();

    SolveResult r;
    r.n = n;
    r.x_space = problem.x_space();
    r.yhat_space = problem.yhat_space();
    r.rule = rule;
    const std::size_t cells = static_cast<std::size_t>(n) * nx;
    r.v_star.assign(cells, 0.0);
    r.q_star.assign(cells * na, 0.0);
    r.policy.assign(cells, 0);
    r.tie_sets.assign(cells, {});
    r.myopic.assign(cells, 0);

    for (int i = n; i >= 1; --i) {
        for (std::size_t x = 0; x < nx; ++x) {
            const std::size_t c = r.cell(i, x);
            double* qrow = &r.q_star[c * na];
            for (std::size_t a = 0; a < na; ++a) {
                double value = mdp.cost(i, x, a);
                if (i < n) {
                    const Distribution& next = problem.transition(i + 1).row(x, a);
                    double expected = 0.0;
                    for (std::size_t x2 = 0; x2 < nx; ++x2) expected += next[x2] * r.v_star[r.cell(i + 1, x2)];
                    value += expected;
                }
                qrow[a] = value;
            }
            const double best = *std::min_element(qrow, qrow + na);
            r.v_star[c] = best;
            for (std::size_t a = 0; a < na; ++a)
                if (qrow[a] <= best + kTieTolerance) r.tie_sets[c].push_back(a);
            r.myopic[c] = myopic_bayes_estimate(mdp.cost(), i, x);
            r.policy[c] = break_tie(r.tie_sets[c], r.myopic[c], rule);
        }
    }
    return r;
}

namespace detail {

inline void check_result_matches(const Problem& problem, const SolveResult& result) {
    if (result.n != problem.horizon() || !(result.x_space == problem.x_space()) || !(result.yhat_space == problem.yhat_space()) ||
        result.v_star.size() != static_cast<std::size_t>(problem.horizon()) * problem.num_x())
        fail(ErrorKind::MismatchedResult, "solve result does not match the problem's horizon or alphabets");
}

} // namespace detail

/// E[V*_1(X_1)] under the problem's initial distribution.
inline double minimum_inference_loss(const Problem& problem, const SolveResult& result) {
    detail::check_result_matches(problem, result);
    double sum = 0.0;
    for (std::size_t x = 0; x < problem.num_x(); ++x) sum += problem.init()[x] * result.v(1, x);
    return sum;
}

struct ReportEntry {
    int round = 0;
    std::size_t x = 0;
    double v_star = 0.0;
    std::vector<double> q_row;
    std::size_t chosen = 0;
    bool tie = false;
    std::size_t myopic = 0;
    bool differs_from_myopic = false;
};

struct SolutionReport {
    std::vector<ReportEntry> entries; // round-major, x ascending

    std::vector<std::pair<int, std::size_t>> deviations() const {
        std::vector<std::pair<int, std::size_t>> out;
        for (const auto& e : entries)
            if (e.differs_from_myopic) out.emplace_back(e.round, e.x);
        return out;
    }
};

inline SolutionReport solution_report(const SolveResult& result) {
    SolutionReport report;
    for (int i = 1; i <= result.n; ++i) {
        for (std::size_t x = 0; x < result.num_x(); ++x) {
            ReportEntry e;
            e.round = i;
            e.x = x;
            e.v_star = result.v(i, x);
            for (std::size_t a = 0; a < result.num_yhat(); ++a) e.q_row.push_back(result.q(i, x, a));
            e.chosen = result.action(i, x);
            e.tie = result.ties(i, x).size() > 1;
            e.myopic = result.myopic_action(i, x);
            e.differs_from_myopic = e.chosen != e.myopic;
            report.entries.push_back(std::move(e));
        }
    }
    return report;
}

} // namespace dyninfer
