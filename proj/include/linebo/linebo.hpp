#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "linebo/bo1d.hpp"
#include "linebo/line_geometry.hpp"
#include "linebo/safeopt1d.hpp"

namespace linebo {

enum class DirectionKind { RandomSphere, Coordinate, Descent };
enum class CoordinateMode { Cyclic, Uniform };

inline std::string_view to_string(DirectionKind kind) {
    switch (kind) {
        case DirectionKind::RandomSphere: return "Random";
        case DirectionKind::Coordinate: return "Coordinate";
        case DirectionKind::Descent: return "Descent";
    }
    return "unknown";
}

struct DirectionOracleConfig {
    DirectionKind kind = DirectionKind::RandomSphere;
    CoordinateMode coordinate_mode = CoordinateMode::Cyclic;
    double descent_step = 0.1;
    int descent_evals = -1;  // < 0 means 2 * dim
    double descent_switch_norm = 1e-6;
    bool normalize_descent_step = true;

    [[nodiscard]] int resolved_descent_evals(int dim) const { return descent_evals < 0 ? 2 * dim : descent_evals; }

    void validate() const {
        if (!(descent_step > 0.0)) throw std::invalid_argument("descent_step must be positive");
        if (!(descent_switch_norm >= 0.0)) throw std::invalid_argument("descent_switch_norm must be >= 0");
    }
};

struct LineBOConfig {
    KernelSpec kernel;
    double noise_std = 0.2;
    std::optional<KernelSpec> constraint_kernel;  // defaults to `kernel`
    LineSolverConfig solver;
    DirectionOracleConfig direction;
    int budget = 400;
    int buffer_cap = 2000;
    bool safe = false;
    double lipschitz = 1.0;

    void validate() const {
        kernel.validate();
        if (constraint_kernel) constraint_kernel->validate();
        if (!(noise_std > 0.0)) throw std::invalid_argument("GP noise_std must be positive");
        solver.validate();
        direction.validate();
        if (budget < 1) throw std::invalid_argument("budget must be >= 1");
        if (buffer_cap < 1) throw std::invalid_argument("buffer_cap must be >= 1");
        if (safe && !(lipschitz > 0.0)) throw std::invalid_argument("lipschitz must be positive");
    }
};

/// One outer-loop decision on whether to move the incumbent to a line's best point.
struct IncumbentTransition {
    int iteration = 0;
    Vector from;
    Vector to;
    double mean_from = 0.0;  // posterior mean estimates under the model after the line solve
    double mean_to = 0.0;
    bool accepted = false;
};

struct OptimizerState {
    GaussianProcess model_f;
    std::optional<GaussianProcess> model_g;
    Vector incumbent;
    int iteration = 0;
    int total_evals = 0;
    int buffer_cap = 2000;
    int descent_evals_total = 0;
    std::vector<int> line_evals;
    std::vector<LineSegment> segments;
    std::vector<IncumbentTransition> transitions;
};

/// Hooks bubbled up to whoever drives the optimizer (usually the benchmark harness).
struct RunHooks {
    EvaluationObserver on_evaluation;
    std::function<void(const SafeStepView&)> on_safe_select;
};

/// Enforces the data-buffer cap by dropping the oldest observations that are
/// farther than two lengthscales from the incumbent. Points at the incumbent
/// itself are never dropped. When everything is close, the oldest point not
/// located at the incumbent goes first.
inline void enforce_buffer(OptimizerState& state) {
    const double radius = 2.0 * state.model_f.kernel().lengthscale;
    while (state.model_f.size() > state.buffer_cap) {
        const Matrix& X = state.model_f.inputs();
        Eigen::Index victim = -1;
        Eigen::Index fallback = -1;
        for (Eigen::Index i = 0; i < X.cols(); ++i) {
            const double dist = (X.col(i) - state.incumbent).norm();
            if (dist > radius) {
                victim = i;
                break;
            }
            if (fallback < 0 && dist > 0.0) fallback = i;
        }
        if (victim < 0) victim = fallback;
        if (victim < 0) break;  // every stored point sits at the incumbent
        state.model_f.remove(victim);
        if (state.model_g) state.model_g->remove(victim);
    }
}

namespace detail {

inline void record_observation(OptimizerState& state, const Vector& x, const Observation& obs) {
    state.model_f.update(x, obs.y);
    if (state.model_g) {
        if (!obs.s) throw std::invalid_argument("safe optimization requires constraint observations");
        state.model_g->update(x, *obs.s);
    }
    enforce_buffer(state);
}

}  // namespace detail

/// Thompson-sampling descent direction at the incumbent.
///
/// Takes up to `max_evals` steps x = incumbent - step * g, with g a sampled
/// posterior gradient (normalized unless configured otherwise), updating the
/// model after each, then returns the normalized posterior-mean gradient at
/// the incumbent. Returns nullopt when that gradient norm is below the switch
/// threshold so the caller can fall back to a random direction. With a safety
/// model, steps not certified by u_g(incumbent) + L * |step| <= 0 are skipped.
inline std::optional<Vector> descent_oracle(OptimizerState& state, const BoxDomain& domain, const Oracle& oracle,
                                            const DirectionOracleConfig& cfg, int max_evals, Rng& rng,
                                            const LineBOConfig* safety = nullptr, const RunHooks& hooks = {}) {
    const int dim = domain.dim();
    const int m = std::min(cfg.resolved_descent_evals(dim), std::max(max_evals, 0));
    for (int i = 0; i < m; ++i) {
        Vector g = state.model_f.sample_gradient(state.incumbent, rng);
        const double norm = g.norm();
        if (cfg.normalize_descent_step && norm > 0.0) g /= norm;
        const Vector x = domain.clamp(state.incumbent - cfg.descent_step * g);

        if (safety && state.model_g) {
            const Prediction pg = state.model_g->predict(state.incumbent);
            const double reach = pg.mean + safety->solver.confidence.beta * pg.std +
                                 safety->lipschitz * (x - state.incumbent).norm();
            if (reach > 0.0) continue;
        }

        const Observation obs = oracle(x);
        detail::record_observation(state, x, obs);
        ++state.total_evals;
        ++state.descent_evals_total;
        if (hooks.on_evaluation) hooks.on_evaluation({x, obs, state.incumbent});
    }
    const Vector grad = state.model_f.mean_grad(state.incumbent);
    const double norm = grad.norm();
    if (!(norm > 0.0) || norm < cfg.descent_switch_norm) return std::nullopt;
    return Vector(grad / norm);
}

/// Zeroes the components of a gradient direction whose descent step -grad
/// would leave the box at a bound the point already sits on, then
/// renormalizes. Returns nullopt when nothing is left.
inline std::optional<Vector> project_to_feasible_cone(const Vector& grad_dir, const Vector& x, const BoxDomain& domain) {
    Vector d = grad_dir;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double tol = kDomainTolerance * (domain.upper(i) - domain.lower(i));
        const bool at_lower = x(i) <= domain.lower(i) + tol;
        const bool at_upper = x(i) >= domain.upper(i) - tol;
        if ((at_lower && d(i) > 0.0) || (at_upper && d(i) < 0.0)) d(i) = 0.0;
    }
    const double norm = d.norm();
    if (!(norm >= kDirectionNormTolerance)) return std::nullopt;
    return Vector(d / norm);
}

/// Next line direction. Coordinate directions cycle e_0, e_1, ... by
/// iteration (1-based) unless uniform sampling is configured. Descent lines
/// drop gradient components blocked by bounds the incumbent sits on, and fall
/// back to a uniformly random direction when the mean gradient vanishes.
inline Vector choose_direction(OptimizerState& state, const BoxDomain& domain, const Oracle& oracle,
                               const LineBOConfig& cfg, Rng& rng, const RunHooks& hooks = {}) {
    const int dim = domain.dim();
    switch (cfg.direction.kind) {
        case DirectionKind::RandomSphere:
            return sample_sphere(dim, rng);
        case DirectionKind::Coordinate:
            if (cfg.direction.coordinate_mode == CoordinateMode::Uniform) return coordinate_direction(dim, rng);
            return coordinate_direction(dim, (std::max(state.iteration, 1) - 1) % dim);
        case DirectionKind::Descent: {
            const int remaining = cfg.budget - state.total_evals;
            auto dir = descent_oracle(state, domain, oracle, cfg.direction, remaining, rng,
                                      cfg.safe ? &cfg : nullptr, hooks);
            if (dir) {
                if (auto projected = project_to_feasible_cone(*dir, state.incumbent, domain)) return *projected;
            }
            return sample_sphere(dim, rng);
        }
    }
    throw std::logic_error("choose_direction: unknown direction kind");
}

/// The outer LineBO / SafeLineBO loop with one shared global model.
///
/// Each iteration picks a direction, intersects the line through the
/// incumbent with the box, and solves the 1D problem with GP-UCB (or SafeOpt
/// when `cfg.safe`). The line's best point replaces the incumbent only when
/// its posterior mean does not exceed the incumbent's. Runs until the total
/// evaluation budget is spent.
class LineBayesOpt {
public:
    LineBayesOpt(BoxDomain domain, LineBOConfig cfg, const Vector& start, std::uint64_t seed)
        : domain_(std::move(domain)),
          cfg_(std::move(cfg)),
          state_{GaussianProcess(cfg_.kernel, cfg_.noise_std, domain_.dim()), std::nullopt, start, 0, 0, 2000, 0, {}, {}, {}},
          rng_(seed) {
        cfg_.validate();
        if (!domain_.contains(start)) throw std::invalid_argument("LineBayesOpt: start point outside the domain");
        state_.incumbent = domain_.clamp(start);
        state_.buffer_cap = cfg_.buffer_cap;
        if (cfg_.safe)
            state_.model_g.emplace(cfg_.constraint_kernel.value_or(cfg_.kernel), cfg_.noise_std, domain_.dim());
    }

    [[nodiscard]] bool done() const { return state_.total_evals >= cfg_.budget; }

    /// One outer iteration. Returns false once the budget is exhausted.
    bool step(const Oracle& oracle, const RunHooks& hooks = {}) {
        if (done()) return false;
        ++state_.iteration;
        const Vector direction = choose_direction(state_, domain_, oracle, cfg_, rng_, hooks);
        if (done()) return false;

        const LineSegment seg = intersect(domain_, state_.incumbent, direction);
        state_.segments.push_back(seg);
        LineSolverConfig line_cfg = cfg_.solver;
        line_cfg.max_evals_per_line = std::min(line_cfg.max_evals_per_line, cfg_.budget - state_.total_evals);

        Vector candidate;
        int used = 0;
        bool ok = true;
        if (cfg_.safe) {
            SafeLineHooks sh{hooks.on_evaluation, [this] { enforce_buffer(state_); }, hooks.on_safe_select};
            const SafeLineResult r = solve_line_safe(state_.model_f, *state_.model_g, seg, oracle, line_cfg,
                                                     cfg_.lipschitz, sh);
            candidate = r.best_point;
            used = r.evals_used;
            ok = !r.certificate_lost && used > 0;
        } else {
            LineHooks lh{hooks.on_evaluation, [this] { enforce_buffer(state_); }};
            const LineResult r = solve_line(state_.model_f, seg, oracle, line_cfg, lh);
            candidate = r.best_point;
            used = r.evals_used;
        }
        state_.total_evals += used;
        state_.line_evals.push_back(used);

        if (ok) {
            IncumbentTransition t;
            t.iteration = state_.iteration;
            t.from = state_.incumbent;
            t.to = candidate;
            t.mean_from = state_.model_f.predict(t.from).mean;
            t.mean_to = state_.model_f.predict(t.to).mean;
            t.accepted = t.mean_to <= t.mean_from;
            if (t.accepted) state_.incumbent = domain_.clamp(candidate);
            state_.transitions.push_back(std::move(t));
        }
        return !done();
    }

    /// Steps until the budget is spent. Throws if kMaxIdleSteps consecutive
    /// iterations make no evaluation (e.g. every safe descent step is rejected
    /// and every line loses its certificate).
    void run(const Oracle& oracle, const RunHooks& hooks = {}) {
        int idle = 0;
        while (!done()) {
            const int before = state_.total_evals;
            step(oracle, hooks);
            idle = state_.total_evals == before ? idle + 1 : 0;
            if (idle >= kMaxIdleSteps) throw std::runtime_error("LineBayesOpt: no evaluation in consecutive iterations");
        }
    }

    static constexpr int kMaxIdleSteps = 1000;

    [[nodiscard]] const OptimizerState& state() const { return state_; }
    [[nodiscard]] OptimizerState& state() { return state_; }
    [[nodiscard]] const BoxDomain& domain() const { return domain_; }
    [[nodiscard]] const LineBOConfig& config() const { return cfg_; }

private:
    BoxDomain domain_;
    LineBOConfig cfg_;
    OptimizerState state_;
    Rng rng_;
};

}  // namespace linebo
