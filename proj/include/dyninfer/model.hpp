#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dyninfer/error.hpp"

namespace dyninfer {

/// Probability vector indexed by the label order of some Alphabet.
using Distribution = std::vector<double>;

/// Rows may drift from 1 by at most this much before validation rejects them.
inline constexpr double kNormalizationTolerance = 1e-9;

/// Ordered, duplicate-free set of symbolic labels. Index order is the label
/// order given at construction and never changes.
class Alphabet {
public:
    Alphabet() = default;

    explicit Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.empty()) fail(ErrorKind::InvalidParams, "alphabet must not be empty");
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (!index_.emplace(labels_[i], i).second)
                fail(ErrorKind::InvalidParams, "duplicate label '" + labels_[i] + "'");
        }
    }

    std::size_t size() const noexcept { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    bool contains(const std::string& label) const { return index_.count(label) != 0; }

    std::size_t index(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end()) fail(ErrorKind::UnknownLabel, "unknown label '" + label + "'");
        return it->second;
    }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.labels_ == b.labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Observation-transition kernel of one round: a distribution over the next
/// observation for every (previous observation, previous estimate) pair.
struct TransitionKernel {
    std::size_t num_x = 0;
    std::size_t num_yhat = 0;
    std::vector<Distribution> rows; // row index = x_prev * num_yhat + yhat_prev

    const Distribution& row(std::size_t x_prev, std::size_t yhat_prev) const {
        return rows[x_prev * num_yhat + yhat_prev];
    }
    double operator()(std::size_t x_prev, std::size_t yhat_prev, std::size_t x_next) const {
        return row(x_prev, yhat_prev)[x_next];
    }

    friend bool operator==(const TransitionKernel&, const TransitionKernel&) = default;
};

/// Quantity-generation kernel of one round: P(y | x).
struct QuantityKernel {
    std::vector<Distribution> rows; // row index = x

    double operator()(std::size_t x, std::size_t y) const { return rows[x][y]; }

    friend bool operator==(const QuantityKernel&, const QuantityKernel&) = default;
};

/// Contextual loss l(x, y, yhat), stored dense in (x, y, yhat) row-major order.
struct ContextualLoss {
    std::size_t num_x = 0;
    std::size_t num_y = 0;
    std::size_t num_yhat = 0;
    std::vector<double> values;

    double operator()(std::size_t x, std::size_t y, std::size_t yhat) const {
        return values[(x * num_y + y) * num_yhat + yhat];
    }

    template <class F>
    static ContextualLoss from_function(std::size_t nx, std::size_t ny, std::size_t nyhat, F&& f) {
        ContextualLoss loss{nx, ny, nyhat, {}};
        loss.values.reserve(nx * ny * nyhat);
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y)
                for (std::size_t a = 0; a < nyhat; ++a) loss.values.push_back(f(x, y, a));
        return loss;
    }

    friend bool operator==(const ContextualLoss&, const ContextualLoss&) = default;
};

/// Unvalidated problem description, as read from a file or assembled by hand.
struct ProblemData {
    int n = 0;
    std::vector<std::string> x_space;
    std::vector<std::string> y_space;
    std::vector<std::string> yhat_space;
    Distribution init;
    /// Rounds 2..n; each entry holds |X|*|Yhat| rows of length |X|.
    std::vector<std::vector<Distribution>> transitions;
    /// Rounds 1..n; each entry holds |X| rows of length |Y|.
    std::vector<std::vector<Distribution>> quantities;
    /// Dense (x, y, yhat) row-major, |X|*|Y|*|Yhat| values.
    std::vector<double> loss;
};

class Problem;
Problem validate_problem(ProblemData raw);

/// A validated dynamic-inference instance. Immutable once built; rounds are
/// 1-indexed as i = 1..n.
class Problem {
public:
    int horizon() const noexcept { return n_; }
    const Alphabet& x_space() const noexcept { return x_space_; }
    const Alphabet& y_space() const noexcept { return y_space_; }
    const Alphabet& yhat_space() const noexcept { return yhat_space_; }
    std::size_t num_x() const noexcept { return x_space_.size(); }
    std::size_t num_y() const noexcept { return y_space_.size(); }
    std::size_t num_yhat() const noexcept { return yhat_space_.size(); }

    const Distribution& init() const noexcept { return init_; }
    const ContextualLoss& loss() const noexcept { return loss_; }

    /// Kernel P(X_i | X_{i-1}, Yhat_{i-1}) for i in 2..n.
    const TransitionKernel& transition(int i) const {
        if (i < 2 || i > n_) fail(ErrorKind::RoundOutOfRange, "transition round " + std::to_string(i) + " outside 2.." + std::to_string(n_));
        return transitions_[static_cast<std::size_t>(i - 2)];
    }
    /// Kernel P(Y_i | X_i) for i in 1..n.
    const QuantityKernel& quantity(int i) const {
        check_round(i);
        return quantities_[static_cast<std::size_t>(i - 1)];
    }

    const std::vector<TransitionKernel>& transitions() const noexcept { return transitions_; }
    const std::vector<QuantityKernel>& quantities() const noexcept { return quantities_; }

    void check_round(int i) const {
        if (i < 1 || i > n_) fail(ErrorKind::RoundOutOfRange, "round " + std::to_string(i) + " outside 1.." + std::to_string(n_));
    }

    /// Same problem with a different initial distribution (validated).
    Problem with_init(Distribution init) const;

    ProblemData to_data() const {
        ProblemData d;
        d.n = n_;
        d.x_space = x_space_.labels();
        d.y_space = y_space_.labels();
        d.yhat_space = yhat_space_.labels();
        d.init = init_;
        for (const auto& t : transitions_) d.transitions.push_back(t.rows);
        for (const auto& q : quantities_) d.quantities.push_back(q.rows);
        d.loss = loss_.values;
        return d;
    }

    friend bool operator==(const Problem&, const Problem&) = default;

private:
    Problem() = default;
    friend Problem validate_problem(ProblemData raw);

    int n_ = 0;
    Alphabet x_space_;
    Alphabet y_space_;
    Alphabet yhat_space_;
    Distribution init_;
    std::vector<TransitionKernel> transitions_;
    std::vector<QuantityKernel> quantities_;
    ContextualLoss loss_;
};

namespace detail {

inline void normalize_row(Distribution& row, std::size_t expected, const std::string& where) {
    if (row.size() != expected)
        fail(ErrorKind::DimensionMismatch, where + ": expected " + std::to_string(expected) + " entries, got " + std::to_string(row.size()));
    double sum = 0.0;
    for (double p : row) {
        if (!std::isfinite(p) || p < 0.0) fail(ErrorKind::NotStochastic, where + ": negative or non-finite probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kNormalizationTolerance)
        fail(ErrorKind::NotStochastic, where + ": row sums to " + std::to_string(sum));
    if (sum != 1.0)
        for (double& p : row) p /= sum;
}

} // namespace detail

/// Checks shapes, horizon and stochasticity; rows within 1e-9 of unit mass are
/// re-normalized exactly, anything further off is rejected.
inline Problem validate_problem(ProblemData raw) {
    if (raw.n < 1) fail(ErrorKind::HorizonMismatch, "horizon must be at least 1, got " + std::to_string(raw.n));

    Problem p;
    p.n_ = raw.n;
    p.x_space_ = Alphabet(std::move(raw.x_space));
    p.y_space_ = Alphabet(std::move(raw.y_space));
    p.yhat_space_ = Alphabet(std::move(raw.yhat_space));
    const std::size_t nx = p.x_space_.size();
    const std::size_t ny = p.y_space_.size();
    const std::size_t na = p.yhat_space_.size();

    if (raw.transitions.size() != static_cast<std::size_t>(raw.n - 1))
        fail(ErrorKind::HorizonMismatch, "expected " + std::to_string(raw.n - 1) + " transition kernels, got " + std::to_string(raw.transitions.size()));
    if (raw.quantities.size() != static_cast<std::size_t>(raw.n))
        fail(ErrorKind::HorizonMismatch, "expected " + std::to_string(raw.n) + " quantity kernels, got " + std::to_string(raw.quantities.size()));

    detail::normalize_row(raw.init, nx, "init");
    p.init_ = std::move(raw.init);

    for (std::size_t k = 0; k < raw.transitions.size(); ++k) {
        auto& rows = raw.transitions[k];
        const std::string where = "transition round " + std::to_string(k + 2);
        if (rows.size() != nx * na)
            fail(ErrorKind::DimensionMismatch, where + ": expected " + std::to_string(nx * na) + " rows, got " + std::to_string(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r)
            detail::normalize_row(rows[r], nx, where + " row " + std::to_string(r));
        p.transitions_.push_back(TransitionKernel{nx, na, std::move(rows)});
    }
    for (std::size_t k = 0; k < raw.quantities.size(); ++k) {
        auto& rows = raw.quantities[k];
        const std::string where = "quantity round " + std::to_string(k + 1);
        if (rows.size() != nx)
            fail(ErrorKind::DimensionMismatch, where + ": expected " + std::to_string(nx) + " rows, got " + std::to_string(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r)
            detail::normalize_row(rows[r], ny, where + " row " + std::to_string(r));
        p.quantities_.push_back(QuantityKernel{std::move(rows)});
    }

    if (raw.loss.size() != nx * ny * na)
        fail(ErrorKind::DimensionMismatch, "loss: expected " + std::to_string(nx * ny * na) + " entries, got " + std::to_string(raw.loss.size()));
    for (double v : raw.loss)
        if (!std::isfinite(v)) fail(ErrorKind::InvalidParams, "loss: non-finite entry");
    p.loss_ = ContextualLoss{nx, ny, na, std::move(raw.loss)};
    return p;
}

inline Problem Problem::with_init(Distribution init) const {
    ProblemData d = to_data();
    d.init = std::move(init);
    return validate_problem(std::move(d));
}

/// One round's worth of model data, repeated over the horizon by
/// make_stationary_problem.
struct StationaryModel {
    std::vector<std::string> x_space;
    std::vector<std::string> y_space;
    std::vector<std::string> yhat_space;
    Distribution init;
    std::vector<Distribution> transition; // |X|*|Yhat| rows
    std::vector<Distribution> quantity;   // |X| rows
    std::vector<double> loss;
};

inline Problem make_stationary_problem(int n, const StationaryModel& m) {
    if (n < 1) fail(ErrorKind::HorizonMismatch, "horizon must be at least 1, got " + std::to_string(n));
    ProblemData d;
    d.n = n;
    d.x_space = m.x_space;
    d.y_space = m.y_space;
    d.yhat_space = m.yhat_space;
    d.init = m.init;
    d.transitions.assign(static_cast<std::size_t>(n - 1), m.transition);
    d.quantities.assign(static_cast<std::size_t>(n), m.quantity);
    d.loss = m.loss;
    return validate_problem(std::move(d));
}

/// Point mass on index `at` over `size` labels.
inline Distribution point_mass(std::size_t size, std::size_t at) {
    Distribution d(size, 0.0);
    d.at(at) = 1.0;
    return d;
}

} // namespace dyninfer
