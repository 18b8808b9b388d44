#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "linebo/gaussian_process.hpp"
#include "linebo/line_geometry.hpp"

namespace linebo {

/// One noisy oracle answer: y = f(x) + noise and, for constrained problems,
/// s = g(x) + noise.
struct Observation {
    double y = 0.0;
    std::optional<double> s;
};

using Oracle = std::function<Observation(const Vector&)>;

/// Reported after every oracle call: the evaluated point and the solver's
/// current candidate (the point it would return if stopped now).
struct EvaluationEvent {
    const Vector& point;
    const Observation& observation;
    const Vector& candidate;
};

using EvaluationObserver = std::function<void(const EvaluationEvent&)>;

struct LineHooks {
    EvaluationObserver on_evaluation;
    /// Runs after each posterior update (the outer loop uses it to enforce the data buffer).
    std::function<void()> after_update;
};

struct LineSolverConfig {
    double epsilon = 0.05;
    int max_evals_per_line = 30;
    int grid_size = 200;
    ConfidenceParams confidence;
    bool refine = true;

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
        if (max_evals_per_line < 1) throw std::invalid_argument("max_evals_per_line must be >= 1");
        if (grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
        confidence.validate();
    }
};

struct LineResult {
    Vector best_point;
    double best_alpha = 0.0;
    int evals_used = 0;
    double err_at_best = 0.0;
    bool converged = false;
    std::vector<double> grid;              // final grid, refinement points included
    std::vector<double> evaluated_alphas;  // in evaluation order
};

/// Lower confidence bound f_hat - beta * sigma; the acquisition to minimize.
inline double ucb(const GaussianProcess& gp, const VectorRef& x, double beta) {
    const Prediction p = gp.predict(x);
    return p.mean - beta * p.std;
}

/// Certified suboptimality bound of x against a candidate set (columns of
/// `candidates`): upper bound at x minus the smallest lower bound.
inline double err(const GaussianProcess& gp, const VectorRef& x, const MatrixRef& candidates, double beta) {
    if (candidates.cols() == 0) throw std::invalid_argument("err: candidate set is empty");
    const Prediction p = gp.predict(x);
    const BatchPrediction c = gp.predict_batch(candidates);
    return (p.mean + beta * p.std) - c.lower(beta).minCoeff();
}

inline std::vector<double> make_grid(const LineSegment& seg, int grid_size) {
    if (grid_size < 2) throw std::invalid_argument("make_grid: grid_size must be >= 2");
    std::vector<double> grid(static_cast<std::size_t>(grid_size));
    const double step = seg.length() / (grid_size - 1);
    for (int i = 0; i < grid_size; ++i) grid[static_cast<std::size_t>(i)] = seg.alpha_lo + i * step;
    grid.back() = seg.alpha_hi;
    return grid;
}

namespace detail {

inline constexpr double kGridMergeTolerance = 1e-12;

// Inserts `alpha` into the sorted grid unless an existing point is within
// tolerance. Returns the index of the (possibly pre-existing) point.
inline std::size_t insert_sorted(std::vector<double>& grid, double alpha) {
    auto it = std::lower_bound(grid.begin(), grid.end(), alpha);
    if (it != grid.end() && std::abs(*it - alpha) <= kGridMergeTolerance)
        return static_cast<std::size_t>(it - grid.begin());
    if (it != grid.begin() && std::abs(*(it - 1) - alpha) <= kGridMergeTolerance)
        return static_cast<std::size_t>(it - grid.begin() - 1);
    return static_cast<std::size_t>(grid.insert(it, alpha) - grid.begin());
}

template <typename T>
std::size_t argmin_index(const T& values) {
    Eigen::Index i = 0;
    values.minCoeff(&i);  // first minimum: lowest index wins ties
    return static_cast<std::size_t>(i);
}

}  // namespace detail

inline constexpr int kRefinementPoints = 10;

/// Inserts kRefinementPoints evenly spaced alphas spanning [a_star - h, a_star + h],
/// clamped to [lo, hi], into the sorted grid.
inline void refine_grid(std::vector<double>& grid, double a_star, double h, double lo, double hi) {
    for (int k = 0; k < kRefinementPoints; ++k) {
        const double a = a_star - h + 2.0 * h * k / (kRefinementPoints - 1);
        detail::insert_sorted(grid, std::clamp(a, lo, hi));
    }
}

/// Unconstrained GP-UCB on one line segment.
///
/// Each step minimizes f_hat - beta*sigma over the grid (plus a local
/// refinement around the minimizer), evaluates the oracle, updates the shared
/// model `gp` in place and reports the err-minimizing grid point. Stops once
/// err(best) <= epsilon or after max_evals_per_line evaluations. The offset
/// (alpha = 0) is always a grid point.
inline LineResult solve_line(GaussianProcess& gp, const LineSegment& seg, const Oracle& oracle,
                             const LineSolverConfig& cfg, const LineHooks& hooks = {}) {
    cfg.validate();
    const double beta = cfg.confidence.beta;

    LineResult result;
    std::vector<double> grid;
    if (seg.degenerate()) {
        grid = {0.0};
    } else {
        grid = make_grid(seg, cfg.grid_size);
        detail::insert_sorted(grid, 0.0);
    }
    const double spacing = seg.degenerate() ? 0.0 : seg.length() / (cfg.grid_size - 1);

    Matrix points = seg.embed_all(grid);
    BatchPrediction pred = gp.predict_batch(points);

    while (result.evals_used < cfg.max_evals_per_line) {
        std::size_t pick = detail::argmin_index(pred.lower(beta));
        if (cfg.refine && !seg.degenerate()) {
            refine_grid(grid, grid[pick], spacing, seg.alpha_lo, seg.alpha_hi);
            if (static_cast<Eigen::Index>(grid.size()) != points.cols()) {
                points = seg.embed_all(grid);
                pred = gp.predict_batch(points);
            }
            pick = detail::argmin_index(pred.lower(beta));
        }

        const double alpha = grid[pick];
        const Vector x = seg.embed(alpha);
        const Observation obs = oracle(x);
        gp.update(x, obs.y);
        if (hooks.after_update) hooks.after_update();
        ++result.evals_used;
        result.evaluated_alphas.push_back(alpha);

        pred = gp.predict_batch(points);
        const Vector upper = pred.upper(beta);
        const std::size_t best = detail::argmin_index(upper);
        result.best_alpha = grid[best];
        result.best_point = points.col(static_cast<Eigen::Index>(best));
        result.err_at_best = upper(static_cast<Eigen::Index>(best)) - pred.lower(beta).minCoeff();

        if (hooks.on_evaluation) hooks.on_evaluation({x, obs, result.best_point});
        if (result.err_at_best <= cfg.epsilon) {
            result.converged = true;
            break;
        }
    }
    result.grid = std::move(grid);
    return result;
}

}  // namespace linebo
