#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "linebo/line_geometry.hpp"

namespace linebo {

using ScalarFunction = std::function<double(const Vector&)>;

/// A benchmark problem: noiseless objective, known optimum value, optional
/// safety constraint (g <= 0 is safe) and its invariant-subspace structure.
struct ObjectiveSpec {
    std::string name;
    int dim = 0;
    BoxDomain domain;
    ScalarFunction truth;
    double f_star = 0.0;
    ScalarFunction constraint;  // empty when unconstrained
    int effective_dim = 0;
    std::vector<int> permutation;  // identity unless augmented
    /// Samples from {x : f(x) = level}; empty when the level set has no closed form.
    std::function<Vector(double level, Rng&)> level_set;

    [[nodiscard]] bool constrained() const { return static_cast<bool>(constraint); }
};

// ---------------------------------------------------------------------------
// Synthetic functions

/// Six-hump camelback on [-2, 2] x [-1, 1].
inline double camelback(const VectorRef& x) {
    if (x.size() != 2) throw std::invalid_argument("camelback expects a 2-vector");
    const double a = x(0), b = x(1);
    const double a2 = a * a, b2 = b * b;
    return (4.0 - 2.1 * a2 + a2 * a2 / 3.0) * a2 + a * b + (-4.0 + 4.0 * b2) * b2;
}

inline constexpr double kCamelbackMin = -1.031628453489877;

namespace detail {

inline constexpr std::array<double, 4> kHartmannWeights = {1.0, 1.2, 3.0, 3.2};
inline constexpr std::array<std::array<double, 6>, 4> kHartmannA = {{
    {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
}};
inline constexpr std::array<std::array<double, 6>, 4> kHartmannP = {{
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381},
}};

}  // namespace detail

/// Hartmann-6 on [0, 1]^6 with the usual constants.
inline double hartmann6(const VectorRef& x) {
    if (x.size() != 6) throw std::invalid_argument("hartmann6 expects a 6-vector");
    double f = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double e = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            const double d = x(static_cast<Eigen::Index>(j)) - detail::kHartmannP[i][j];
            e += detail::kHartmannA[i][j] * d * d;
        }
        f -= detail::kHartmannWeights[i] * std::exp(-e);
    }
    return f;
}

inline constexpr double kHartmann6Min = -3.322368011415515;

/// -exp(-4 |x|^2).
inline double gaussian_nd(const VectorRef& x) { return -std::exp(-4.0 * x.squaredNorm()); }

/// Radius of the level set {x : gaussian_nd(x) = level}, level in [-1, 0).
inline double gaussian_level_radius(double level) {
    if (!(level >= -1.0 && level < 0.0)) throw std::invalid_argument("gaussian level must lie in [-1, 0)");
    return std::sqrt(-std::log(-level) / 4.0);
}

// ---------------------------------------------------------------------------
// Problem constructors

namespace detail {

inline std::vector<int> identity_permutation(int d) {
    std::vector<int> p(static_cast<std::size_t>(d));
    std::iota(p.begin(), p.end(), 0);
    return p;
}

}  // namespace detail

inline ObjectiveSpec make_camelback() {
    ObjectiveSpec s;
    s.name = "Camelback2D";
    s.dim = 2;
    s.domain = BoxDomain(Vector{{-2.0, -1.0}}, Vector{{2.0, 1.0}});
    s.truth = [](const Vector& x) { return camelback(x); };
    s.f_star = kCamelbackMin;
    s.effective_dim = 2;
    s.permutation = detail::identity_permutation(2);
    return s;
}

inline ObjectiveSpec make_hartmann6() {
    ObjectiveSpec s;
    s.name = "Hartmann6D";
    s.dim = 6;
    s.domain = BoxDomain::cube(6, 0.0, 1.0);
    s.truth = [](const Vector& x) { return hartmann6(x); };
    s.f_star = kHartmann6Min;
    s.effective_dim = 6;
    s.permutation = detail::identity_permutation(6);
    return s;
}

/// Gaussian benchmark on [-1, 1]^d.
inline ObjectiveSpec make_gaussian(int d = 10) {
    if (d < 1) throw std::invalid_argument("gaussian dimension must be >= 1");
    ObjectiveSpec s;
    s.name = "Gaussian" + std::to_string(d) + "D";
    s.dim = d;
    s.domain = BoxDomain::cube(d, -1.0, 1.0);
    s.truth = [](const Vector& x) { return gaussian_nd(x); };
    s.f_star = -1.0;
    s.effective_dim = d;
    s.permutation = detail::identity_permutation(d);
    s.level_set = [d](double level, Rng& rng) -> Vector {
        return gaussian_level_radius(level) * sample_sphere(d, rng);
    };
    return s;
}

/// Embeds `base` into [0, 1]^(base.dim + extra_dims) with shuffled coordinates.
/// The first base.dim entries of a seeded random permutation select the active
/// coordinates, which are mapped affinely onto the base domain; the remaining
/// coordinates are never read.
inline ObjectiveSpec augment(const ObjectiveSpec& base, int extra_dims, Rng& rng) {
    if (extra_dims < 0) throw std::invalid_argument("augment: extra_dims must be >= 0");
    const int d = base.dim + extra_dims;
    std::vector<int> perm = detail::identity_permutation(d);
    std::shuffle(perm.begin(), perm.end(), rng);

    ObjectiveSpec s;
    s.name = base.name + "+" + std::to_string(extra_dims) + "D";
    s.dim = d;
    s.domain = BoxDomain::cube(d, 0.0, 1.0);
    s.f_star = base.f_star;
    s.effective_dim = base.effective_dim;
    s.permutation = perm;

    const std::vector<int> active(perm.begin(), perm.begin() + base.dim);
    const Vector lo = base.domain.lower;
    const Vector width = base.domain.upper - base.domain.lower;
    auto to_base = [active, lo, width](const Vector& x) {
        Vector z(static_cast<Eigen::Index>(active.size()));
        for (std::size_t j = 0; j < active.size(); ++j) {
            const auto k = static_cast<Eigen::Index>(j);
            z(k) = lo(k) + x(active[j]) * width(k);
        }
        return z;
    };
    ScalarFunction f = base.truth;
    s.truth = [f, to_base](const Vector& x) { return f(to_base(x)); };
    if (base.constrained()) {
        ScalarFunction g = base.constraint;
        s.constraint = [g, to_base](const Vector& x) { return g(to_base(x)); };
    }
    return s;
}

/// Orientation of the constraint built from the objective.
/// Literal: g = -f + tau (safe iff f >= tau). Flipped: g = f - tau (safe iff f <= tau).
enum class ConstraintSign { Literal, Flipped };

inline ObjectiveSpec constrain(const ObjectiveSpec& base, double tau, ConstraintSign sign = ConstraintSign::Literal) {
    ObjectiveSpec s = base;
    s.name = base.name + "-Constraint";
    ScalarFunction f = base.truth;
    if (sign == ConstraintSign::Literal)
        s.constraint = [f, tau](const Vector& x) { return -f(x) + tau; };
    else
        s.constraint = [f, tau](const Vector& x) { return f(x) - tau; };
    return s;
}

// ---------------------------------------------------------------------------
// Noise and start points

struct NoiseModel {
    double std = 0.2;

    void validate() const {
        if (!(std >= 0.0)) throw std::invalid_argument("noise std must be >= 0");
    }
};

/// Engine for the noise of evaluation `eval_index` in the run seeded with `seed`.
inline Rng noise_stream(std::uint64_t seed, std::uint64_t eval_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(eval_index), static_cast<std::uint32_t>(eval_index >> 32),
                      0x6e6f6973u};
    return Rng(seq);
}

struct NoisyValue {
    double y = 0.0;
    std::optional<double> s;
};

/// y = f(x) + e and, if constrained, s = g(x) + e' with e, e' independent N(0, std^2).
inline NoisyValue noisy_eval(const ObjectiveSpec& spec, const NoiseModel& noise, const VectorRef& x, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const Vector p = x;
    NoisyValue out;
    const double ey = normal(rng);
    out.y = spec.truth(p) + noise.std * ey;
    if (spec.constrained()) {
        const double es = normal(rng);
        out.s = spec.constraint(p) + noise.std * es;
    }
    return out;
}

enum class InitMode { UniformDomain, UniformSafeSet, LevelSet };

struct InitSpec {
    InitMode mode = InitMode::UniformDomain;
    double level = -0.2;
};

inline constexpr long kRejectionCap = 1'000'000;

inline Vector uniform_in_box(const BoxDomain& domain, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector x(domain.dim());
    for (int i = 0; i < domain.dim(); ++i) x(i) = domain.lower(i) + u(rng) * (domain.upper(i) - domain.lower(i));
    return x;
}

inline Vector init_point(const ObjectiveSpec& spec, const InitSpec& init, Rng& rng) {
    switch (init.mode) {
        case InitMode::UniformDomain:
            return uniform_in_box(spec.domain, rng);
        case InitMode::UniformSafeSet: {
            if (!spec.constrained()) return uniform_in_box(spec.domain, rng);
            for (long k = 0; k < kRejectionCap; ++k) {
                Vector x = uniform_in_box(spec.domain, rng);
                if (spec.constraint(x) <= 0.0) return x;
            }
            throw std::runtime_error("init_point: no safe point found within the rejection cap");
        }
        case InitMode::LevelSet: {
            if (!spec.level_set) throw std::invalid_argument("init_point: objective has no level-set sampler");
            return spec.level_set(init.level, rng);
        }
    }
    throw std::logic_error("init_point: unknown mode");
}

// ---------------------------------------------------------------------------
// Named benchmarks

inline constexpr std::uint64_t kDefaultPermutationSeed = 2019;

/// Default thresholds: about 30% of the domain is safe under the literal sign.
inline constexpr double kCamelbackTau = 2.0465;
inline constexpr double kHartmann6Tau = -0.0343;
inline constexpr double kGaussianTau = -0.4;

struct BenchmarkOptions {
    std::uint64_t permutation_seed = kDefaultPermutationSeed;
    std::optional<double> tau;
    ConstraintSign sign = ConstraintSign::Literal;
};

inline std::vector<std::string> benchmark_names() {
    return {"Camelback2D",         "Hartmann6D",          "Gaussian10D",
            "Camelback2D+10D",     "Hartmann6D+14D",      "Camelback2D-Constraint",
            "Hartmann6D-Constraint", "Gaussian10D-Constraint", "Camelback2D+10D-Constraint"};
}

inline ObjectiveSpec make_benchmark(const std::string& name, const BenchmarkOptions& opt = {}) {
    std::string base = name;
    bool constrained = false;
    if (constexpr std::string_view suffix = "-Constraint";
        base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
        constrained = true;
        base.resize(base.size() - suffix.size());
    }
    ObjectiveSpec spec;
    double tau = 0.0;
    Rng perm_rng(opt.permutation_seed);
    if (base == "Camelback2D") {
        spec = make_camelback();
        tau = kCamelbackTau;
    } else if (base == "Hartmann6D") {
        spec = make_hartmann6();
        tau = kHartmann6Tau;
    } else if (base == "Gaussian10D") {
        spec = make_gaussian(10);
        tau = kGaussianTau;
    } else if (base == "Camelback2D+10D") {
        spec = augment(make_camelback(), 10, perm_rng);
        tau = kCamelbackTau;
    } else if (base == "Hartmann6D+14D") {
        spec = augment(make_hartmann6(), 14, perm_rng);
        tau = kHartmann6Tau;
    } else {
        throw std::invalid_argument("unknown benchmark: " + name);
    }
    if (constrained) spec = constrain(spec, opt.tau.value_or(tau), opt.sign);
    return spec;
}

}  // namespace linebo
