#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "linebo/gaussian_process.hpp"

namespace linebo {

inline constexpr double kDomainTolerance = 1e-9;
inline constexpr double kDirectionNormTolerance = 1e-12;

struct BoxDomain {
    Vector lower;
    Vector upper;

    BoxDomain() = default;
    BoxDomain(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) { validate(); }

    static BoxDomain cube(int dim, double lo, double hi) {
        return {Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
    }

    [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }

    void validate() const {
        if (lower.size() != upper.size() || lower.size() == 0)
            throw std::invalid_argument("box domain bounds must be nonempty and of equal size");
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            if (!(lower(i) < upper(i))) throw std::invalid_argument("box domain requires lower < upper");
    }

    [[nodiscard]] bool contains(const VectorRef& x, double tol = kDomainTolerance) const {
        if (x.size() != lower.size()) return false;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
        return true;
    }

    [[nodiscard]] Vector clamp(const VectorRef& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
};

/// {offset + a * direction : a in [alpha_lo, alpha_hi]}, the full intersection
/// of a line with the box. alpha_lo <= 0 <= alpha_hi always.
struct LineSegment {
    Vector offset;
    Vector direction;
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
    BoxDomain domain;

    [[nodiscard]] bool degenerate() const { return !(alpha_hi > alpha_lo); }
    [[nodiscard]] double length() const { return alpha_hi - alpha_lo; }

    /// Maps a line coordinate into the box; coordinates are clamped to absorb rounding.
    [[nodiscard]] Vector embed(double a) const {
        if (a < alpha_lo - kDomainTolerance || a > alpha_hi + kDomainTolerance)
            throw std::out_of_range("embed: alpha outside the segment range");
        a = std::clamp(a, alpha_lo, alpha_hi);
        return domain.clamp(offset + a * direction);
    }

    /// Embeds a list of line coordinates as the columns of a d x m matrix.
    template <typename Range>
    [[nodiscard]] Matrix embed_all(const Range& alphas) const {
        Matrix pts(offset.size(), static_cast<Eigen::Index>(std::size(alphas)));
        Eigen::Index j = 0;
        for (double a : alphas) pts.col(j++) = embed(a);
        return pts;
    }
};

inline LineSegment intersect(const BoxDomain& domain, const VectorRef& offset, const VectorRef& direction) {
    if (offset.size() != domain.dim() || direction.size() != domain.dim())
        throw std::invalid_argument("intersect: dimension mismatch");
    if (!domain.contains(offset)) throw std::invalid_argument("intersect: offset lies outside the domain");
    const double norm = direction.norm();
    if (!(norm >= kDirectionNormTolerance) || !std::isfinite(norm))
        throw std::invalid_argument("intersect: direction has (near) zero norm");

    LineSegment seg;
    seg.domain = domain;
    seg.offset = domain.clamp(offset);
    seg.direction = direction / norm;

    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < seg.offset.size(); ++i) {
        const double di = seg.direction(i);
        if (di == 0.0) continue;
        const double t1 = (domain.lower(i) - seg.offset(i)) / di;
        const double t2 = (domain.upper(i) - seg.offset(i)) / di;
        lo = std::max(lo, std::min(t1, t2));
        hi = std::min(hi, std::max(t1, t2));
    }
    seg.alpha_lo = std::min(lo, 0.0);
    seg.alpha_hi = std::max(hi, 0.0);
    return seg;
}

/// Uniform draw from the unit sphere in R^d (normalized standard normal).
inline Vector sample_sphere(int d, Rng& rng) {
    if (d < 1) throw std::invalid_argument("sample_sphere: dimension must be >= 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(d);
    double norm = 0.0;
    do {
        for (int i = 0; i < d; ++i) v(i) = normal(rng);
        norm = v.norm();
    } while (norm < kDirectionNormTolerance);
    return v / norm;
}

inline Vector coordinate_direction(int d, int index) {
    if (index < 0 || index >= d) throw std::out_of_range("coordinate_direction: index out of range");
    return Vector::Unit(d, index);
}

inline Vector coordinate_direction(int d, Rng& rng) {
    if (d < 1) throw std::invalid_argument("coordinate_direction: dimension must be >= 1");
    std::uniform_int_distribution<int> pick(0, d - 1);
    return coordinate_direction(d, pick(rng));
}

}  // namespace linebo
