#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dyninfer/dp_solver.hpp"
#include "dyninfer/model.hpp"
#include "dyninfer/random.hpp"
#include "dyninfer/reduction.hpp"
#include "dyninfer/strategy_eval.hpp"

// Brute-force ground truth for small instances. Nothing in here relies on the
// Markov reduction: losses are summed over full (x^n, y^n) trajectories and
// strategies may look at the whole history.

namespace dyninfer {

enum class HistoryMode {
    Revealed,   ///< round i sees (x_1, y_1, ..., y_{i-1}, x_i)
    Unrevealed, ///< round i sees (x_1, ..., x_i)
};

inline constexpr std::uint64_t kDefaultStrategyLimit = 1'000'000;
inline constexpr std::uint64_t kDefaultPairLimit = 10'000'000;

namespace detail {

inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}
inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    if (b > std::numeric_limits<std::uint64_t>::max() - a) return std::numeric_limits<std::uint64_t>::max();
    return a + b;
}
inline std::uint64_t sat_pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t k = 0; k < exp; ++k) {
        r = sat_mul(r, base);
        if (r == std::numeric_limits<std::uint64_t>::max()) break;
    }
    return r;
}

} // namespace detail

/// Number of distinct round-i histories. Histories are encoded in mixed radix
/// with the earliest symbol most significant, so index order is lexicographic
/// order of the symbol sequence.
inline std::uint64_t history_count(HistoryMode mode, int i, std::size_t nx, std::size_t ny) {
    const std::uint64_t xs = detail::sat_pow(nx, static_cast<std::uint64_t>(i));
    if (mode == HistoryMode::Unrevealed) return xs;
    return detail::sat_mul(xs, detail::sat_pow(ny, static_cast<std::uint64_t>(i - 1)));
}

/// Size of the deterministic strategy space, |Yhat|^(sum_i H_i), kept in
/// base/exponent form because it overflows quickly.
struct StrategyCount {
    std::uint64_t base = 0;
    std::uint64_t exponent = 0;

    std::optional<std::uint64_t> value() const {
        const std::uint64_t v = detail::sat_pow(base, exponent);
        if (v == std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
        return v;
    }
    bool exceeds(std::uint64_t limit) const {
        auto v = value();
        return !v || *v > limit;
    }
    std::string to_string() const {
        if (auto v = value()) return std::to_string(*v);
        return std::to_string(base) + "^" + std::to_string(exponent);
    }
};

inline StrategyCount count_history_strategies(const Problem& p, HistoryMode mode) {
    StrategyCount c{p.num_yhat(), 0};
    for (int i = 1; i <= p.horizon(); ++i)
        c.exponent = detail::sat_add(c.exponent, history_count(mode, i, p.num_x(), p.num_y()));
    return c;
}

/// Number of (x^n, y^n) sequences, an upper bound on trajectories per strategy.
inline std::uint64_t count_trajectories(const Problem& p) {
    return detail::sat_pow(detail::sat_mul(p.num_x(), p.num_y()), static_cast<std::uint64_t>(p.horizon()));
}

/// Deterministic history-dependent strategy. tables[i-1][h] is the estimate
/// index for round-i history h, or kUnset.
struct HistoryStrategy {
    static constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();

    int n = 0;
    std::size_t num_x = 0;
    std::size_t num_y = 0;
    std::size_t num_yhat = 0;
    HistoryMode mode = HistoryMode::Revealed;
    std::vector<std::vector<std::size_t>> tables;

    static HistoryStrategy unset(const Problem& p, HistoryMode mode) {
        HistoryStrategy s{p.horizon(), p.num_x(), p.num_y(), p.num_yhat(), mode, {}};
        for (int i = 1; i <= p.horizon(); ++i)
            s.tables.emplace_back(static_cast<std::size_t>(history_count(mode, i, p.num_x(), p.num_y())), kUnset);
        return s;
    }

    std::size_t decide(int i, std::uint64_t history) const {
        const auto& t = tables[static_cast<std::size_t>(i - 1)];
        return history < t.size() ? t[history] : kUnset;
    }

    /// Index of the history extended by (y_i, x_{i+1}); y is ignored when unrevealed.
    std::uint64_t extend(std::uint64_t history, std::size_t y, std::size_t x_next) const {
        if (mode == HistoryMode::Revealed) return (history * num_y + y) * num_x + x_next;
        return history * num_x + x_next;
    }

    /// Most recent observation in a history.
    std::size_t last_x(std::uint64_t history) const { return static_cast<std::size_t>(history % num_x); }
};

/// Markov strategy as a history strategy that only reads the last observation.
inline HistoryStrategy lift(const Problem& p, const MarkovStrategy& m, HistoryMode mode) {
    check_strategy_shape(p, m);
    HistoryStrategy s = HistoryStrategy::unset(p, mode);
    for (int i = 1; i <= p.horizon(); ++i) {
        auto& t = s.tables[static_cast<std::size_t>(i - 1)];
        for (std::uint64_t h = 0; h < t.size(); ++h) t[h] = m(i, s.last_x(h));
    }
    return s;
}

namespace detail {

inline void check_history_shape(const Problem& p, const HistoryStrategy& s) {
    if (s.n != p.horizon() || s.num_x != p.num_x() || s.num_y != p.num_y() || s.num_yhat != p.num_yhat() ||
        s.tables.size() != static_cast<std::size_t>(p.horizon()))
        fail(ErrorKind::ShapeMismatch, "history strategy shape does not match the problem");
}

inline std::size_t require_decision(const HistoryStrategy& s, int i, std::uint64_t h) {
    const std::size_t a = s.decide(i, h);
    if (a == HistoryStrategy::kUnset)
        fail(ErrorKind::HistoryIncomplete, "no estimate for reachable round-" + std::to_string(i) + " history " + std::to_string(h));
    if (a >= s.num_yhat) fail(ErrorKind::ShapeMismatch, "estimate index outside the estimate space");
    return a;
}

/// Walks every positive-probability (x^n, y^n) trajectory in lexicographic
/// order and adds P(trajectory) * sum_i l(x_i, y_i, yhat_i) at each leaf.
struct FullTrajectoryWalker {
    const Problem& p;
    const HistoryStrategy& s;
    double total = 0.0;

    void walk(int i, std::size_t x, std::uint64_t h, double prob, double path_loss) {
        const std::size_t a = require_decision(s, i, h);
        const Distribution& qy = p.quantity(i).rows[x];
        for (std::size_t y = 0; y < p.num_y(); ++y) {
            if (qy[y] <= 0.0) continue;
            const double py = prob * qy[y];
            const double loss = path_loss + p.loss()(x, y, a);
            if (i == p.horizon()) {
                total += py * loss;
                continue;
            }
            const Distribution& next = p.transition(i + 1).row(x, a);
            for (std::size_t x2 = 0; x2 < p.num_x(); ++x2)
                if (next[x2] > 0.0) walk(i + 1, x2, s.extend(h, y, x2), py * next[x2], loss);
        }
    }
};

/// Same walk with y marginalized into lbar wherever the strategy cannot see
/// it: the last round always, every round when unrevealed.
struct ObservationTrajectoryWalker {
    const Problem& p;
    const HistoryStrategy& s;
    const BarLossTable& lbar;
    double total = 0.0;

    void walk(int i, std::size_t x, std::uint64_t h, double prob, double path_loss) {
        const std::size_t a = require_decision(s, i, h);
        const double loss = path_loss + lbar(i, x, a);
        if (i == p.horizon()) {
            total += prob * loss;
            return;
        }
        const Distribution& next = p.transition(i + 1).row(x, a);
        if (s.mode == HistoryMode::Unrevealed) {
            for (std::size_t x2 = 0; x2 < p.num_x(); ++x2)
                if (next[x2] > 0.0) walk(i + 1, x2, s.extend(h, 0, x2), prob * next[x2], loss);
            return;
        }
        const Distribution& qy = p.quantity(i).rows[x];
        for (std::size_t y = 0; y < p.num_y(); ++y) {
            if (qy[y] <= 0.0) continue;
            for (std::size_t x2 = 0; x2 < p.num_x(); ++x2)
                if (next[x2] > 0.0) walk(i + 1, x2, s.extend(h, y, x2), prob * qy[y] * next[x2], loss);
        }
    }
};

} // namespace detail

/// E[sum_i l(X_i, Y_i, Yhat_i)] by exact enumeration of trajectories.
inline double exact_loss_history(const Problem& problem, const HistoryStrategy& strategy) {
    detail::check_history_shape(problem, strategy);
    detail::FullTrajectoryWalker w{problem, strategy};
    for (std::size_t x = 0; x < problem.num_x(); ++x)
        if (problem.init()[x] > 0.0) w.walk(1, x, x, problem.init()[x], 0.0);
    return w.total;
}

struct Lemma1Pair {
    double lhs = 0.0; // E sum l
    double rhs = 0.0; // E sum lbar
};

inline Lemma1Pair verify_lemma1(const Problem& problem, const HistoryStrategy& strategy) {
    detail::check_history_shape(problem, strategy);
    const BarLossTable lbar = bar_loss_table(problem);
    detail::ObservationTrajectoryWalker w{problem, strategy, lbar};
    for (std::size_t x = 0; x < problem.num_x(); ++x)
        if (problem.init()[x] > 0.0) w.walk(1, x, x, problem.init()[x], 0.0);
    return Lemma1Pair{exact_loss_history(problem, strategy), w.total};
}

/// Yields every deterministic history strategy exactly once. Decision slots
/// are ordered round 1 first and by history index within a round; strategies
/// come out in lexicographic order of that slot sequence, all-zeros first.
class HistoryStrategyEnumerator {
public:
    HistoryStrategyEnumerator(const Problem& problem, HistoryMode mode, std::uint64_t limit = kDefaultStrategyLimit)
        : count_(count_history_strategies(problem, mode)) {
        if (count_.exceeds(limit))
            fail(ErrorKind::SearchSpaceTooLarge,
                 "history strategy count " + count_.to_string() + " exceeds limit " + std::to_string(limit));
        current_ = HistoryStrategy::unset(problem, mode);
        for (auto& t : current_.tables) std::fill(t.begin(), t.end(), 0);
    }

    const StrategyCount& count() const noexcept { return count_; }

    /// Advances to the next strategy; false once the space is exhausted.
    /// The first call yields the all-zeros strategy.
    bool next() {
        if (!started_) {
            started_ = true;
            return true;
        }
        for (auto round = current_.tables.rbegin(); round != current_.tables.rend(); ++round) {
            for (auto slot = round->rbegin(); slot != round->rend(); ++slot) {
                if (++*slot < current_.num_yhat) return true;
                *slot = 0;
            }
        }
        return false;
    }

    const HistoryStrategy& current() const noexcept { return current_; }

private:
    StrategyCount count_;
    HistoryStrategy current_;
    bool started_ = false;
};

inline HistoryStrategyEnumerator enumerate_history_strategies(const Problem& problem, HistoryMode mode,
                                                              std::uint64_t limit = kDefaultStrategyLimit) {
    return HistoryStrategyEnumerator(problem, mode, limit);
}

enum class SearchMethod {
    Enumerate,   ///< evaluate every strategy in the space
    HistoryTree, ///< exhaustive expectimin over every history node
};

struct OracleOptions {
    HistoryMode mode = HistoryMode::Revealed;
    SearchMethod method = SearchMethod::Enumerate;
    std::uint64_t limit = kDefaultStrategyLimit;
    std::uint64_t pair_limit = kDefaultPairLimit;
    bool record_lemma1 = false; // one pair per searched strategy (enumeration only)
};

struct OracleReport {
    double brute_min = 0.0;
    double dp_min = 0.0;
    double gap = 0.0;
    HistoryStrategy witness;
    StrategyCount search_space;
    std::uint64_t strategies_searched = 0; // explicit enumeration only
    std::uint64_t history_nodes = 0;       // history-tree search only
    HistoryMode mode = HistoryMode::Revealed;
    SearchMethod method = SearchMethod::Enumerate;
    std::vector<Lemma1Pair> lemma1_pairs;
};

namespace detail {

/// min over all estimate assignments of the expected loss from a round-i
/// history node onward; choices are written into the witness.
struct HistoryTreeSearch {
    const Problem& p;
    HistoryStrategy& witness;
    std::uint64_t nodes = 0;

    double node_value(int i, std::size_t x, std::uint64_t h) {
        ++nodes;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_a = 0;
        for (std::size_t a = 0; a < p.num_yhat(); ++a) {
            double value = 0.0;
            const Distribution& qy = p.quantity(i).rows[x];
            if (i == p.horizon()) {
                for (std::size_t y = 0; y < p.num_y(); ++y) value += qy[y] * p.loss()(x, y, a);
            } else {
                const Distribution& next = p.transition(i + 1).row(x, a);
                for (std::size_t y = 0; y < p.num_y(); ++y) {
                    double future = 0.0;
                    for (std::size_t x2 = 0; x2 < p.num_x(); ++x2) {
                        const std::uint64_t child = witness.extend(h, y, x2);
                        future += next[x2] * child_value(i + 1, x2, child);
                    }
                    value += qy[y] * (p.loss()(x, y, a) + future);
                }
            }
            if (value < best) {
                best = value;
                best_a = a;
            }
        }
        witness.tables[static_cast<std::size_t>(i - 1)][h] = best_a;
        return best;
    }

    // Children are shared across estimates and, when unrevealed, across y.
    std::vector<std::vector<double>> memo;
    double child_value(int i, std::size_t x, std::uint64_t h) {
        auto& m = memo[static_cast<std::size_t>(i - 1)];
        if (std::isnan(m[h])) m[h] = node_value(i, x, h);
        return m[h];
    }
};

} // namespace detail

/// Minimum inference loss over all history-dependent strategies, next to the
/// dynamic-programming minimum over Markov strategies.
inline OracleReport brute_force_optimum(const Problem& problem, const OracleOptions& options = {}) {
    OracleReport report;
    report.mode = options.mode;
    report.method = options.method;
    report.search_space = count_history_strategies(problem, options.mode);
    report.dp_min = minimum_inference_loss(problem, solve(problem, TieBreakRule::FirstIndex));

    if (options.method == SearchMethod::Enumerate) {
        auto enumerator = enumerate_history_strategies(problem, options.mode, options.limit);
        const std::uint64_t pairs = detail::sat_mul(*enumerator.count().value(), count_trajectories(problem));
        if (pairs > options.pair_limit)
            fail(ErrorKind::SearchSpaceTooLarge, "strategy-trajectory pairs " + std::to_string(pairs) + " exceed limit " +
                                                     std::to_string(options.pair_limit));
        bool first = true;
        while (enumerator.next()) {
            const HistoryStrategy& s = enumerator.current();
            ++report.strategies_searched;
            double loss = 0.0;
            if (options.record_lemma1) {
                const Lemma1Pair pair = verify_lemma1(problem, s);
                report.lemma1_pairs.push_back(pair);
                loss = pair.lhs;
            } else {
                loss = exact_loss_history(problem, s);
            }
            if (first || loss < report.brute_min) {
                report.brute_min = loss;
                report.witness = s;
                first = false;
            }
        }
    } else {
        std::uint64_t nodes = 0;
        for (int i = 1; i <= problem.horizon(); ++i)
            nodes = detail::sat_add(nodes, history_count(options.mode, i, problem.num_x(), problem.num_y()));
        if (nodes > options.pair_limit)
            fail(ErrorKind::SearchSpaceTooLarge, "history node count " + std::to_string(nodes) + " exceeds limit " +
                                                     std::to_string(options.pair_limit));
        report.witness = HistoryStrategy::unset(problem, options.mode);
        detail::HistoryTreeSearch search{problem, report.witness, 0, {}};
        for (const auto& t : report.witness.tables) search.memo.emplace_back(t.size(), std::nan(""));
        double total = 0.0;
        for (std::size_t x = 0; x < problem.num_x(); ++x) {
            const double v = search.child_value(1, x, x);
            total += problem.init()[x] * v;
        }
        // The recursion visits every history, reachable or not, so the
        // witness table is total.
        report.brute_min = total;
        report.history_nodes = search.nodes;
    }
    report.gap = report.brute_min - report.dp_min;
    return report;
}

/// Sizes of a random instance; every alphabet gets labels "0", "1", ...
struct RandomInstanceSpec {
    int n = 2;
    std::size_t num_x = 2;
    std::size_t num_y = 2;
    std::size_t num_yhat = 2;
};

namespace detail {

inline std::vector<std::string> index_labels(std::size_t size) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < size; ++k) out.push_back(std::to_string(k));
    return out;
}

inline Distribution random_distribution(std::size_t size, SplitMix64& rng) {
    Distribution d(size);
    double sum = 0.0;
    for (double& p : d) {
        p = rng.uniform() + 1e-3;
        sum += p;
    }
    for (double& p : d) p /= sum;
    return d;
}

} // namespace detail

/// Random non-stationary instance: all kernels and the initial distribution
/// drawn from normalized uniforms, losses uniform in [0, 1).
inline Problem random_problem(const RandomInstanceSpec& spec, SplitMix64& rng) {
    ProblemData d;
    d.n = spec.n;
    d.x_space = detail::index_labels(spec.num_x);
    d.y_space = detail::index_labels(spec.num_y);
    d.yhat_space = detail::index_labels(spec.num_yhat);
    d.init = detail::random_distribution(spec.num_x, rng);
    for (int i = 2; i <= spec.n; ++i) {
        std::vector<Distribution> rows;
        for (std::size_t r = 0; r < spec.num_x * spec.num_yhat; ++r) rows.push_back(detail::random_distribution(spec.num_x, rng));
        d.transitions.push_back(std::move(rows));
    }
    for (int i = 1; i <= spec.n; ++i) {
        std::vector<Distribution> rows;
        for (std::size_t r = 0; r < spec.num_x; ++r) rows.push_back(detail::random_distribution(spec.num_y, rng));
        d.quantities.push_back(std::move(rows));
    }
    for (std::size_t k = 0; k < spec.num_x * spec.num_y * spec.num_yhat; ++k) d.loss.push_back(rng.uniform());
    return validate_problem(std::move(d));
}

inline HistoryStrategy random_history_strategy(const Problem& p, HistoryMode mode, SplitMix64& rng) {
    HistoryStrategy s = HistoryStrategy::unset(p, mode);
    for (auto& t : s.tables)
        for (auto& a : t) a = static_cast<std::size_t>(rng() % p.num_yhat());
    return s;
}

} // namespace dyninfer
