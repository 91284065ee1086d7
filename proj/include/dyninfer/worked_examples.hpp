#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "dyninfer/model.hpp"

namespace dyninfer::examples {

namespace detail {

inline std::vector<double> zero_one_loss_binary() {
    return ContextualLoss::from_function(2, 2, 2, [](std::size_t, std::size_t y, std::size_t a) { return y == a ? 0.0 : 1.0; })
        .values;
}

} // namespace detail

/// Binary toy model. Estimating 0 flips the observation, estimating 1 keeps
/// it; P(Y=1|X=0) = 0.1, P(Y=1|X=1) = 0.6; 0-1 loss. Starts at x = 0.
inline Problem example_section33(int n) {
    StationaryModel m;
    m.x_space = m.y_space = m.yhat_space = {"0", "1"};
    m.init = point_mass(2, 0);
    // rows ordered (x_prev, yhat_prev): (0,0) (0,1) (1,0) (1,1)
    m.transition = {{0.0, 1.0}, {1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    m.quantity = {{0.9, 0.1}, {0.4, 0.6}};
    m.loss = detail::zero_one_loss_binary();
    return make_stationary_problem(n, m);
}

/// Stock trend prediction with the deterministic market response
/// X_i = Yhat_{i-1}; P(Y=1|X=0) = 0.4, P(Y=1|X=1) = 0.7; 0-1 loss.
inline Problem example_stock(int n) {
    StationaryModel m;
    m.x_space = m.y_space = m.yhat_space = {"0", "1"};
    m.init = point_mass(2, 0);
    m.transition = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}};
    m.quantity = {{0.6, 0.4}, {0.3, 0.7}};
    m.loss = detail::zero_one_loss_binary();
    return make_stationary_problem(n, m);
}

enum class Planner {
    Persist,  ///< keep negotiating the same gap after predicting not-yield
    FallBack, ///< drop back to the largest gap after predicting not-yield
};

/// Yield-prediction model parameters. Distances are bumper-to-bumper gaps in
/// meters; none of the defaults come from measured data.
struct YieldParams {
    double beta = 1.0;      // logistic slope, 1/m
    double d_c = 10.0;      // critical distance, m
    std::vector<double> grid{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
    double c_missed = 0.05; // per meter of gap wasted by predicting not-yield
    double c_danger = 1.0;  // scale of the penalty for a wrong yield prediction
    Planner planner = Planner::Persist;
    double p_move = 0.7;    // chance the gap actually moves one grid step
};

inline constexpr std::size_t kYield = 0;
inline constexpr std::size_t kNotYield = 1;

inline double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }

inline void check_yield_params(const YieldParams& p) {
    if (!(p.beta > 0.0) || !std::isfinite(p.beta)) fail(ErrorKind::InvalidParams, "beta must be positive");
    if (p.grid.size() < 2) fail(ErrorKind::InvalidParams, "grid needs at least two points");
    for (std::size_t k = 1; k < p.grid.size(); ++k)
        if (!(p.grid[k] > p.grid[k - 1])) fail(ErrorKind::InvalidParams, "grid must be strictly increasing");
    if (!(p.d_c >= p.grid.front() && p.d_c <= p.grid.back())) fail(ErrorKind::InvalidParams, "d_c outside the grid range");
    if (!(p.c_missed >= 0.0) || !(p.c_danger >= 0.0)) fail(ErrorKind::InvalidParams, "loss scales must be non-negative");
    if (!(p.p_move >= 0.0 && p.p_move <= 1.0)) fail(ErrorKind::InvalidParams, "p_move must lie in [0, 1]");
}

inline std::string distance_label(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", d);
    return buf;
}

/// Yield prediction for a lane change: observation is the gap to the
/// following vehicle, P(yield | x) = sigmoid(beta (x - d_c)).
inline Problem example_yield(int n, const YieldParams& params = {}) {
    check_yield_params(params);
    const std::size_t nx = params.grid.size();
    const double span = params.grid.back() - params.grid.front();

    StationaryModel m;
    for (double d : params.grid) m.x_space.push_back(distance_label(d));
    m.y_space = m.yhat_space = {"yield", "not_yield"};

    std::size_t start = 0;
    for (std::size_t k = 1; k < nx; ++k)
        if (std::abs(params.grid[k] - params.d_c) < std::abs(params.grid[start] - params.d_c)) start = k;
    m.init = point_mass(nx, start);

    for (double x : params.grid) {
        const double p_yield = logistic(params.beta * (x - params.d_c));
        m.quantity.push_back({p_yield, 1.0 - p_yield});
    }

    for (std::size_t x = 0; x < nx; ++x) {
        for (std::size_t a : {kYield, kNotYield}) {
            Distribution row(nx, 0.0);
            if (a == kNotYield && params.planner == Planner::FallBack) {
                row[nx - 1] = 1.0;
            } else {
                const std::size_t target = a == kYield ? (x == 0 ? 0 : x - 1) : std::min(x + 1, nx - 1);
                row[target] += params.p_move;
                row[x] += 1.0 - params.p_move;
            }
            m.transition.push_back(std::move(row));
        }
    }

    m.loss = ContextualLoss::from_function(nx, 2, 2, [&](std::size_t x, std::size_t y, std::size_t a) {
                 const double gap = params.grid[x];
                 if (y == kYield && a == kNotYield) return params.c_missed * gap;
                 if (y == kNotYield && a == kYield) return params.c_danger * std::max(0.0, 1.0 + (params.d_c - gap) / span);
                 return 0.0;
             }).values;
    return make_stationary_problem(n, m);
}

} // namespace dyninfer::examples
