#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "linebo/linebo.hpp"

using namespace linebo;

namespace {

Oracle sphere_oracle(double noise = 0.0, std::uint64_t seed = 0) {
    auto rng = std::make_shared<Rng>(seed);
    return [=](const Vector& x) {
        std::normal_distribution<double> n(0.0, 1.0);
        return Observation{x.squaredNorm() + noise * n(*rng), std::nullopt};
    };
}

LineBOConfig base_config(DirectionKind kind, int budget) {
    LineBOConfig cfg;
    cfg.kernel = {KernelFamily::RBF, 0.5, 1.0};
    cfg.noise_std = 0.05;
    cfg.direction.kind = kind;
    cfg.budget = budget;
    cfg.solver.max_evals_per_line = 10;
    cfg.solver.grid_size = 50;
    return cfg;
}

OptimizerState make_state(int dim, const Vector& incumbent, double noise = 1e-3) {
    return OptimizerState{GaussianProcess({KernelFamily::RBF, 0.5, 1.0}, noise, dim), std::nullopt, incumbent, 0, 0,
                          2000, 0, {}, {}, {}};
}

}  // namespace

TEST(ChooseDirection, CoordinateCycles) {
    const BoxDomain box = BoxDomain::cube(3, -1.0, 1.0);
    OptimizerState state = make_state(3, Vector::Zero(3));
    LineBOConfig cfg = base_config(DirectionKind::Coordinate, 10);
    Rng rng(1);
    const int expected[] = {0, 1, 2, 0};
    for (int it = 1; it <= 4; ++it) {
        state.iteration = it;
        const Vector d = choose_direction(state, box, sphere_oracle(), cfg, rng);
        EXPECT_EQ(d, Vector::Unit(3, expected[it - 1])) << "iteration " << it;
    }
}

TEST(ChooseDirection, RandomSphereIsUnit) {
    const BoxDomain box = BoxDomain::cube(7, -1.0, 1.0);
    OptimizerState state = make_state(7, Vector::Zero(7));
    const LineBOConfig cfg = base_config(DirectionKind::RandomSphere, 10);
    Rng rng(2);
    for (int i = 0; i < 100; ++i) EXPECT_NEAR(choose_direction(state, box, sphere_oracle(), cfg, rng).norm(), 1.0, 1e-12);
}

TEST(ChooseDirection, DescentOnPriorFallsBackToRandom) {
    const BoxDomain box = BoxDomain::cube(4, -1.0, 1.0);
    OptimizerState state = make_state(4, Vector::Zero(4));
    LineBOConfig cfg = base_config(DirectionKind::Descent, 10);
    cfg.direction.descent_evals = 0;
    Rng rng(3);
    const Vector d = choose_direction(state, box, sphere_oracle(), cfg, rng);
    EXPECT_NEAR(d.norm(), 1.0, 1e-12);
    EXPECT_EQ(state.total_evals, 0);
}

TEST(ChooseDirection, DescentDropsComponentsBlockedByActiveBounds) {
    const BoxDomain box = BoxDomain::cube(2, -1.0, 1.0);
    const Vector x{{1.0, 0.0}};
    // Descent step -grad moves +x0 out through the upper bound.
    const auto d = project_to_feasible_cone(Vector{{-0.6, 0.8}}, x, box);
    ASSERT_TRUE(d);
    EXPECT_NEAR((*d)(0), 0.0, 0.0);
    EXPECT_NEAR((*d)(1), 1.0, 1e-15);
    // Descent step moves -x0, into the box: untouched.
    EXPECT_EQ(*project_to_feasible_cone(Vector{{0.6, 0.8}}, x, box), (Vector{{0.6, 0.8}}));
    EXPECT_FALSE(project_to_feasible_cone(Vector{{-1.0, 0.0}}, x, box));
}

TEST(DescentOracle, ZeroEvalsReturnsNormalizedMeanGradient) {
    const BoxDomain box = BoxDomain::cube(2, -2.0, 2.0);
    OptimizerState state = make_state(2, Vector{{1.0, 0.0}});
    state.model_f.update(Vector{{0.5, 0.0}}, 0.25);
    state.model_f.update(Vector{{1.0, 0.5}}, 1.25);
    DirectionOracleConfig cfg;
    cfg.kind = DirectionKind::Descent;
    cfg.descent_evals = 0;
    Rng rng(4);
    const auto d = descent_oracle(state, box, sphere_oracle(), cfg, 100, rng);
    ASSERT_TRUE(d);
    const Vector g = state.model_f.mean_grad(state.incumbent);
    EXPECT_LT((*d - g / g.norm()).norm(), 1e-14);
    EXPECT_EQ(state.total_evals, 0);
    EXPECT_EQ(state.model_f.size(), 2);
}

TEST(DescentOracle, AlignsWithTrueGradient) {
    const BoxDomain box = BoxDomain::cube(2, -2.0, 2.0);
    DirectionOracleConfig cfg;
    cfg.kind = DirectionKind::Descent;
    cfg.descent_evals = 4;
    cfg.descent_step = 0.1;
    int aligned = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        OptimizerState state = make_state(2, Vector{{1.0, 0.0}});
        Rng rng(seed);
        const auto d = descent_oracle(state, box, sphere_oracle(), cfg, 100, rng);
        if (d && d->dot(Vector{{2.0, 0.0}}) > 0.0) ++aligned;
    }
    EXPECT_GE(aligned, 95);
}

TEST(DescentOracle, CountsEvaluations) {
    const BoxDomain box = BoxDomain::cube(3, -2.0, 2.0);
    OptimizerState state = make_state(3, Vector::Constant(3, 0.5));
    DirectionOracleConfig cfg;
    cfg.kind = DirectionKind::Descent;
    EXPECT_EQ(cfg.resolved_descent_evals(3), 6);
    Rng rng(5);
    int calls = 0;
    Oracle o = [&](const Vector& x) {
        ++calls;
        EXPECT_TRUE(box.contains(x));
        return Observation{x.squaredNorm(), std::nullopt};
    };
    descent_oracle(state, box, o, cfg, 100, rng);
    EXPECT_EQ(calls, 6);
    EXPECT_EQ(state.total_evals, 6);
    EXPECT_EQ(state.descent_evals_total, 6);
    // Remaining budget caps the steps.
    descent_oracle(state, box, o, cfg, 2, rng);
    EXPECT_EQ(state.total_evals, 8);
}

TEST(Buffer, EvictsOldestFarPointsAndKeepsIncumbent) {
    OptimizerState state = make_state(1, Vector::Zero(1));
    state.buffer_cap = 3;
    state.model_f.update(Vector::Zero(1), 0.0);
    state.model_f.update(Vector::Constant(1, 5.0), 1.0);
    state.model_f.update(Vector::Constant(1, 0.1), 2.0);
    state.model_f.update(Vector::Constant(1, 6.0), 3.0);
    state.model_f.update(Vector::Constant(1, 0.2), 4.0);
    enforce_buffer(state);
    ASSERT_EQ(state.model_f.size(), 3);
    EXPECT_EQ(state.model_f.inputs()(0, 0), 0.0);
    EXPECT_EQ(state.model_f.inputs()(0, 1), 0.1);
    EXPECT_EQ(state.model_f.inputs()(0, 2), 0.2);

    // Everything near: the oldest point not at the incumbent goes.
    state.buffer_cap = 2;
    enforce_buffer(state);
    ASSERT_EQ(state.model_f.size(), 2);
    EXPECT_EQ(state.model_f.inputs()(0, 0), 0.0);
    EXPECT_EQ(state.model_f.inputs()(0, 1), 0.2);
}

TEST(Buffer, RunStaysWithinCap) {
    const BoxDomain box = BoxDomain::cube(2, -1.0, 1.0);
    LineBOConfig cfg = base_config(DirectionKind::RandomSphere, 60);
    cfg.buffer_cap = 15;
    LineBayesOpt opt(box, cfg, Vector{{0.7, -0.3}}, 6);
    RunHooks hooks;
    hooks.on_evaluation = [&](const EvaluationEvent&) { EXPECT_LE(opt.state().model_f.size(), 16); };
    opt.run(sphere_oracle(0.05, 6), hooks);
    EXPECT_EQ(opt.state().model_f.size(), 15);
}

TEST(LineBayesOpt, SingleLineMatchesSolveLine) {
    const BoxDomain box = BoxDomain::cube(1, -1.0, 1.0);
    LineBOConfig cfg = base_config(DirectionKind::Coordinate, 10);
    const Vector start = Vector::Constant(1, 0.6);
    const Oracle f = [](const Vector& x) { return Observation{std::pow(x(0) - 0.2, 2), std::nullopt}; };
    LineBayesOpt opt(box, cfg, start, 7);
    opt.run(f);
    ASSERT_EQ(opt.state().line_evals.size(), 1u);

    GaussianProcess gp(cfg.kernel, cfg.noise_std, 1);
    LineSolverConfig line_cfg = cfg.solver;
    const LineResult r = solve_line(gp, intersect(box, start, Vector::Ones(1)), f, line_cfg);
    EXPECT_EQ(opt.state().total_evals, r.evals_used);
    EXPECT_EQ(opt.state().model_f.inputs(), gp.inputs());
    EXPECT_EQ(opt.state().transitions.front().to, r.best_point);
}

TEST(LineBayesOpt, SegmentsContainIncumbentAndTransitionsAreMonotone) {
    const BoxDomain box = BoxDomain::cube(3, -1.0, 1.0);
    for (DirectionKind kind : {DirectionKind::RandomSphere, DirectionKind::Coordinate, DirectionKind::Descent}) {
        LineBayesOpt opt(box, base_config(kind, 120), Vector{{0.9, -0.8, 0.4}}, 8);
        const Oracle o = sphere_oracle(0.1, 8);
        while (!opt.done()) {
            const Vector before = opt.state().incumbent;
            const std::size_t lines = opt.state().segments.size();
            opt.step(o);
            if (opt.state().segments.size() > lines) {
                const LineSegment& seg = opt.state().segments.back();
                EXPECT_LT((seg.embed(0.0) - before).norm(), 1e-12);
                EXPECT_LE(seg.alpha_lo, 0.0);
                EXPECT_GE(seg.alpha_hi, 0.0);
            }
            EXPECT_TRUE(box.contains(opt.state().incumbent));
        }
        for (const IncumbentTransition& t : opt.state().transitions) {
            if (t.accepted) EXPECT_LE(t.mean_to, t.mean_from);
            else EXPECT_GT(t.mean_to, t.mean_from);
        }
    }
}

TEST(LineBayesOpt, EvaluationAccounting) {
    const BoxDomain box = BoxDomain::cube(2, -1.0, 1.0);
    LineBOConfig cfg = base_config(DirectionKind::Descent, 97);
    int events = 0;
    RunHooks hooks;
    hooks.on_evaluation = [&](const EvaluationEvent&) { ++events; };
    LineBayesOpt opt(box, cfg, Vector{{0.5, 0.5}}, 9);
    opt.run(sphere_oracle(0.1, 9), hooks);
    const OptimizerState& s = opt.state();
    int line_total = 0;
    for (int n : s.line_evals) line_total += n;
    EXPECT_EQ(s.total_evals, 97);
    EXPECT_EQ(events, 97);
    EXPECT_EQ(line_total + s.descent_evals_total, 97);
    EXPECT_GT(s.descent_evals_total, 0);
}

TEST(LineBayesOpt, Deterministic) {
    const BoxDomain box = BoxDomain::cube(3, -1.0, 1.0);
    auto run = [&] {
        LineBayesOpt opt(box, base_config(DirectionKind::Descent, 80), Vector{{0.1, 0.2, 0.3}}, 10);
        opt.run(sphere_oracle(0.1, 10));
        return opt.state().model_f.inputs();
    };
    EXPECT_EQ(run(), run());
}

TEST(LineBayesOpt, RejectsStartOutsideDomain) {
    EXPECT_THROW(LineBayesOpt(BoxDomain::cube(1, 0.0, 1.0), base_config(DirectionKind::Coordinate, 5),
                              Vector::Constant(1, 2.0), 0),
                 std::invalid_argument);
}

TEST(SafeLineBayesOpt, StaysSafeOnLinearConstraint) {
    // g(x) = x0 - 0.5 with a tight Lipschitz bound; f is minimized at the unsafe corner.
    const BoxDomain box = BoxDomain::cube(2, -1.0, 1.0);
    for (DirectionKind kind : {DirectionKind::Coordinate, DirectionKind::Descent}) {
        LineBOConfig cfg = base_config(kind, 80);
        cfg.safe = true;
        cfg.lipschitz = 1.5;
        cfg.noise_std = 0.01;
        cfg.constraint_kernel = KernelSpec{KernelFamily::RBF, 2.0, 1.0};
        cfg.solver.confidence.beta = 3.0;
        auto rng = std::make_shared<Rng>(11);
        Oracle o = [=](const Vector& x) {
            std::normal_distribution<double> n(0.0, 0.01);
            return Observation{(x - Vector{{1.0, 1.0}}).squaredNorm() + n(*rng), x(0) - 0.5 + n(*rng)};
        };
        int unsafe = 0;
        RunHooks hooks;
        hooks.on_evaluation = [&](const EvaluationEvent& e) { unsafe += e.point(0) > 0.5; };
        LineBayesOpt opt(box, cfg, Vector{{-0.5, -0.5}}, 11);
        opt.run(o, hooks);
        EXPECT_EQ(unsafe, 0) << to_string(kind);
        EXPECT_GT(opt.state().incumbent(0), -0.5) << to_string(kind);
    }
}

TEST(SafeLineBayesOpt, RequiresConstraintObservations) {
    const BoxDomain box = BoxDomain::cube(1, -1.0, 1.0);
    LineBOConfig cfg = base_config(DirectionKind::Coordinate, 5);
    cfg.safe = true;
    LineBayesOpt opt(box, cfg, Vector::Zero(1), 0);
    EXPECT_THROW(opt.run(sphere_oracle()), std::invalid_argument);
}
