// Minimize the six-hump camelback with coordinate LineBO under noise.

#include <cstdio>

#include "linebo.hpp"

int main() {
    using namespace linebo;
    const ObjectiveSpec spec = make_benchmark("Camelback2D");

    LineBOConfig cfg;
    cfg.kernel = {KernelFamily::RBF, 0.5, 2.0};
    cfg.noise_std = 0.2;
    cfg.direction.kind = DirectionKind::Coordinate;
    cfg.budget = 200;

    NoisyOracle noisy(spec, NoiseModel{0.2}, 7);
    Oracle oracle = [&](const Vector& x) { return noisy(x); };

    Vector start(2);
    start << 1.5, 0.5;
    LineBayesOpt opt(spec.domain, cfg, start, 7);
    opt.run(oracle);

    const Vector& x = opt.state().incumbent;
    std::printf("after %d evaluations over %zu lines: x = (%.4f, %.4f), f(x) = %.5f, f* = %.5f\n",
                opt.state().total_evals, opt.state().line_evals.size(), x(0), x(1), spec.truth(x), spec.f_star);
}
