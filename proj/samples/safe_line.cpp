// SafeOpt on a single line: minimize (a + 0.3)^2 subject to a - 0.5 <= 0.

#include <cstdio>
#include <random>

#include "linebo.hpp"

int main() {
    using namespace linebo;
    BoxDomain domain{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
    const LineSegment seg = intersect(domain, Vector::Zero(1), Vector::Ones(1));

    const KernelSpec k{KernelFamily::RBF, 0.3, 1.0};
    GaussianProcess gp_f(k, 0.01, 1), gp_g(k, 0.01, 1);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.01);
    Oracle oracle = [&](const Vector& x) {
        const double a = x(0);
        return Observation{(a + 0.3) * (a + 0.3) + noise(rng), a - 0.5 + noise(rng)};
    };

    LineSolverConfig cfg;
    cfg.confidence.beta = 3.0;
    cfg.max_evals_per_line = 40;
    SafeLineHooks hooks;
    hooks.on_evaluation = [](const EvaluationEvent& e) {
        std::printf("  evaluated a = %+.4f  candidate a = %+.4f\n", e.point(0), e.candidate(0));
    };
    const SafeLineResult r = solve_line_safe(gp_f, gp_g, seg, oracle, cfg, 1.5, hooks);
    std::printf("best a = %.4f after %d evaluations (converged: %s)\n", r.best_alpha, r.evals_used,
                r.converged ? "yes" : "no");
}
