#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "linebo/bo1d.hpp"

namespace linebo {

/// Discretized SafeOpt state on one line. Constraint convention: g(x) <= threshold is safe.
struct SafeState {
    std::vector<double> grid;
    Matrix points;  // embedded grid, d x m
    std::vector<bool> safe;
    std::vector<bool> expander;
    std::vector<bool> minimizer;
    double lipschitz = 1.0;
    double threshold = 0.0;

    [[nodiscard]] std::size_t size() const { return grid.size(); }

    [[nodiscard]] std::size_t safe_count() const {
        return static_cast<std::size_t>(std::count(safe.begin(), safe.end(), true));
    }

    static SafeState on_segment(const LineSegment& seg, std::vector<double> alphas, double lipschitz,
                                double threshold = 0.0) {
        if (!(lipschitz > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
        SafeState s;
        s.grid = std::move(alphas);
        s.points = seg.embed_all(s.grid);
        s.safe.assign(s.grid.size(), false);
        s.expander.assign(s.grid.size(), false);
        s.minimizer.assign(s.grid.size(), false);
        s.lipschitz = lipschitz;
        s.threshold = threshold;
        return s;
    }
};

struct SafeLineResult {
    Vector best_point;
    double best_alpha = 0.0;
    int violations = 0;  // filled from ground truth by the caller, never by the solver
    int evals_used = 0;
    double err_at_best = 0.0;
    bool converged = false;
    bool certificate_lost = false;
    std::vector<double> evaluated_alphas;
    std::vector<Vector> evaluated_points;
};

/// Per-iteration view handed to observers: the state in which a point was
/// selected and the constraint bounds used to certify the safe set.
struct SafeStepView {
    const SafeState& state;
    std::size_t selected;
    const Vector& g_mean;
    const Vector& g_std;
    double beta;
};

struct SafeLineHooks {
    EvaluationObserver on_evaluation;
    std::function<void()> after_update;
    std::function<void(const SafeStepView&)> on_select;
};

/// The safe set became empty, or no point is eligible for selection.
class SafetyCertificateLost : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_safe_point(const SafeState& state) {
    if (std::find(state.safe.begin(), state.safe.end(), true) == state.safe.end())
        throw SafetyCertificateLost("safe set is empty: safety certificate lost");
}

}  // namespace detail

/// Enlarges the safe set: x' becomes safe if some safe x has
/// u_g(x) + L * |x - x'| <= threshold, where u_g is the pessimistic bound.
inline void update_safe_set(SafeState& state, const Vector& g_upper) {
    detail::require_safe_point(state);
    const std::size_t m = state.size();
    std::vector<bool> next = state.safe;
    for (std::size_t i = 0; i < m; ++i) {
        if (!state.safe[i]) continue;
        const double base = g_upper(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < m; ++j)
            if (!next[j] && base + state.lipschitz * std::abs(state.grid[i] - state.grid[j]) <= state.threshold)
                next[j] = true;
    }
    state.safe = std::move(next);
}

inline void update_safe_set(SafeState& state, const GaussianProcess& gp_g, double beta) {
    update_safe_set(state, gp_g.predict_batch(state.points).upper(beta));
}

/// Expansion potential of every grid point: the number of currently unsafe
/// points that would be certified if the optimistic bound l_g(x) were the true
/// value. Zero for unsafe points.
inline std::vector<int> expansion_counts(const SafeState& state, const Vector& g_lower) {
    const std::size_t m = state.size();
    std::vector<int> counts(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        if (!state.safe[i]) continue;
        const double base = g_lower(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < m; ++j)
            if (!state.safe[j] && base + state.lipschitz * std::abs(state.grid[i] - state.grid[j]) <= state.threshold)
                ++counts[i];
    }
    return counts;
}

inline void expanders(SafeState& state, const Vector& g_lower) {
    const std::vector<int> counts = expansion_counts(state, g_lower);
    for (std::size_t i = 0; i < state.size(); ++i) state.expander[i] = state.safe[i] && counts[i] > 0;
}

inline void expanders(SafeState& state, const GaussianProcess& gp_g, double beta) {
    expanders(state, gp_g.predict_batch(state.points).lower(beta));
}

/// Plausible minimizers: safe x with l_f(x) <= min over safe x' of u_f(x').
inline void minimizers(SafeState& state, const Vector& f_lower, const Vector& f_upper) {
    detail::require_safe_point(state);
    double best_upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.size(); ++i)
        if (state.safe[i]) best_upper = std::min(best_upper, f_upper(static_cast<Eigen::Index>(i)));
    for (std::size_t i = 0; i < state.size(); ++i)
        state.minimizer[i] = state.safe[i] && f_lower(static_cast<Eigen::Index>(i)) <= best_upper;
}

inline void minimizers(SafeState& state, const GaussianProcess& gp_f, double beta) {
    const BatchPrediction p = gp_f.predict_batch(state.points);
    minimizers(state, p.lower(beta), p.upper(beta));
}

/// Uncertainty score w(x) = max(2 beta sigma_f(x), 2 beta sigma_g(x)).
inline double uncertainty_score(double f_std, double g_std, double beta) {
    return std::max(2.0 * beta * f_std, 2.0 * beta * g_std);
}

/// Index maximizing w over expanders and plausible minimizers, lowest index on ties.
inline std::size_t select(const SafeState& state, const Vector& f_std, const Vector& g_std, double beta) {
    std::size_t pick = state.size();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (!(state.expander[i] || state.minimizer[i])) continue;
        const auto k = static_cast<Eigen::Index>(i);
        const double w = uncertainty_score(f_std(k), g_std(k), beta);
        if (w > best) {
            best = w;
            pick = i;
        }
    }
    if (pick == state.size()) throw SafetyCertificateLost("select: no expander or plausible minimizer");
    return pick;
}

inline std::size_t select(const SafeState& state, const GaussianProcess& gp_f, const GaussianProcess& gp_g,
                          double beta) {
    return select(state, gp_f.predict_batch(state.points).std, gp_g.predict_batch(state.points).std, beta);
}

/// SafeOpt on one line segment whose offset (alpha = 0) is assumed safe.
///
/// The safe set starts as the offset grid point and only grows. Every
/// evaluation is taken from it. On exit, the best point is the err minimizer
/// over the safe set. Stops when that err is <= epsilon, when the largest
/// uncertainty score over expanders and minimizers is <= epsilon, or when the
/// budget runs out. Refinement points are not inserted: the grid is fixed so
/// that no uncertified point is ever proposed.
inline SafeLineResult solve_line_safe(GaussianProcess& gp_f, GaussianProcess& gp_g, const LineSegment& seg,
                                      const Oracle& oracle, const LineSolverConfig& cfg, double lipschitz,
                                      const SafeLineHooks& hooks = {}) {
    cfg.validate();
    const double beta = cfg.confidence.beta;

    std::vector<double> alphas;
    if (seg.degenerate()) {
        alphas = {0.0};
    } else {
        alphas = make_grid(seg, cfg.grid_size);
        detail::insert_sorted(alphas, 0.0);
    }
    SafeState state = SafeState::on_segment(seg, std::move(alphas), lipschitz);
    const auto seed = static_cast<std::size_t>(
        std::lower_bound(state.grid.begin(), state.grid.end(), -detail::kGridMergeTolerance) - state.grid.begin());
    state.safe[seed] = true;

    SafeLineResult result;
    BatchPrediction pf = gp_f.predict_batch(state.points);
    BatchPrediction pg = gp_g.predict_batch(state.points);

    auto refresh_sets = [&] {
        update_safe_set(state, pg.upper(beta));
        expanders(state, pg.lower(beta));
        minimizers(state, pf.lower(beta), pf.upper(beta));
    };

    try {
        refresh_sets();
        while (result.evals_used < cfg.max_evals_per_line) {
            const std::size_t pick = select(state, pf.std, pg.std, beta);
            if (!state.safe[pick]) throw std::logic_error("solve_line_safe: selected an uncertified point");
            if (hooks.on_select) hooks.on_select({state, pick, pg.mean, pg.std, beta});

            const Vector x = state.points.col(static_cast<Eigen::Index>(pick));
            const Observation obs = oracle(x);
            if (!obs.s) throw std::invalid_argument("solve_line_safe: oracle returned no constraint value");
            gp_f.update(x, obs.y);
            gp_g.update(x, *obs.s);
            if (hooks.after_update) hooks.after_update();
            ++result.evals_used;
            result.evaluated_alphas.push_back(state.grid[pick]);
            result.evaluated_points.push_back(x);

            pf = gp_f.predict_batch(state.points);
            pg = gp_g.predict_batch(state.points);
            refresh_sets();

            const Vector upper = pf.upper(beta);
            const Vector lower = pf.lower(beta);
            double best_upper = std::numeric_limits<double>::infinity();
            double min_lower = std::numeric_limits<double>::infinity();
            std::size_t best = seed;
            for (std::size_t i = 0; i < state.size(); ++i) {
                if (!state.safe[i]) continue;
                const auto k = static_cast<Eigen::Index>(i);
                if (upper(k) < best_upper) {
                    best_upper = upper(k);
                    best = i;
                }
                min_lower = std::min(min_lower, lower(k));
            }
            result.best_alpha = state.grid[best];
            result.best_point = state.points.col(static_cast<Eigen::Index>(best));
            result.err_at_best = best_upper - min_lower;
            if (hooks.on_evaluation) hooks.on_evaluation({x, obs, result.best_point});

            double max_w = 0.0;
            for (std::size_t i = 0; i < state.size(); ++i) {
                if (!(state.expander[i] || state.minimizer[i])) continue;
                const auto k = static_cast<Eigen::Index>(i);
                max_w = std::max(max_w, uncertainty_score(pf.std(k), pg.std(k), beta));
            }
            if (result.err_at_best <= cfg.epsilon || max_w <= cfg.epsilon) {
                result.converged = true;
                break;
            }
        }
    } catch (const SafetyCertificateLost&) {
        result.certificate_lost = true;
        result.converged = false;
    }
    if (result.best_point.size() == 0) {
        result.best_alpha = 0.0;
        result.best_point = seg.embed(0.0);
    }
    return result;
}

/// Ground-truth violation count over evaluated points; used by the harness and tests.
template <typename Constraint>
int count_violations(const std::vector<Vector>& points, Constraint&& g) {
    int n = 0;
    for (const Vector& x : points)
        if (g(x) > 0.0) ++n;
    return n;
}

}  // namespace linebo
