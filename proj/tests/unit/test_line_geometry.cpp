#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "linebo/line_geometry.hpp"

using namespace linebo;

namespace {

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

const BoxDomain kSquare = BoxDomain::cube(2, -1.0, 1.0);

}  // namespace

TEST(BoxDomain, RejectsInvalidBounds) {
    EXPECT_THROW(BoxDomain(Vector::Zero(2), Vector::Zero(2)), std::invalid_argument);
    EXPECT_THROW(BoxDomain(Vector::Zero(2), Vector::Ones(3)), std::invalid_argument);
}

TEST(Intersect, AxisAligned) {
    const LineSegment s = intersect(kSquare, v2(0, 0), v2(1, 0));
    EXPECT_DOUBLE_EQ(s.alpha_lo, -1.0);
    EXPECT_DOUBLE_EQ(s.alpha_hi, 1.0);
}

TEST(Intersect, ShiftedOffset) {
    const LineSegment s = intersect(kSquare, v2(0.5, 0), v2(1, 0));
    EXPECT_DOUBLE_EQ(s.alpha_lo, -1.5);
    EXPECT_DOUBLE_EQ(s.alpha_hi, 0.5);
}

TEST(Intersect, Diagonal) {
    const LineSegment s = intersect(kSquare, v2(0, 0), v2(1, 1) / std::sqrt(2.0));
    EXPECT_NEAR(s.alpha_lo, -std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s.alpha_hi, std::sqrt(2.0), 1e-15);
}

TEST(Intersect, NormalizesDirection) {
    const LineSegment s = intersect(kSquare, v2(0, 0), v2(3, 4));
    EXPECT_NEAR(s.direction.norm(), 1.0, 1e-12);
    EXPECT_NEAR(s.alpha_hi, 1.25, 1e-15);
}

TEST(Intersect, Errors) {
    EXPECT_THROW(intersect(kSquare, v2(1.5, 0), v2(1, 0)), std::invalid_argument);
    EXPECT_THROW(intersect(kSquare, v2(0, 0), v2(0, 0)), std::invalid_argument);
    EXPECT_THROW(intersect(kSquare, v2(0, 0), v2(1e-13, 0)), std::invalid_argument);
}

TEST(Intersect, DegenerateCorner) {
    const LineSegment s = intersect(kSquare, v2(1, 1), v2(1, -1) / std::sqrt(2.0));
    EXPECT_TRUE(s.degenerate());
    EXPECT_EQ(s.alpha_lo, 0.0);
    EXPECT_EQ(s.alpha_hi, 0.0);
    EXPECT_EQ(s.embed(0.0), v2(1, 1));
}

TEST(Embed, Basics) {
    const LineSegment s = intersect(kSquare, v2(0, 0), v2(1, 0));
    EXPECT_EQ(s.embed(0.0), v2(0, 0));
    EXPECT_TRUE(s.embed(0.7).isApprox(v2(0.7, 0)));
    const Vector end = s.embed(s.alpha_hi);
    EXPECT_NEAR(end(0), 1.0, 1e-9);
    EXPECT_NO_THROW(s.embed(1.0 + 5e-10));
    EXPECT_THROW(s.embed(1.0 + 1e-6), std::out_of_range);
}

TEST(Embed, OffsetIsOnEverySegment) {
    Rng rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
        const Vector x = v2(u(rng), u(rng));
        const LineSegment s = intersect(kSquare, x, sample_sphere(2, rng));
        EXPECT_LE(s.alpha_lo, 0.0);
        EXPECT_GE(s.alpha_hi, 0.0);
        EXPECT_TRUE(s.embed(0.0).isApprox(x, 1e-15));
    }
}

TEST(Embed, ContainmentAndMaximality) {
    Rng rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 10000; ++t) {
        const int d = 1 + static_cast<int>(u(rng) * 5);
        Vector lo(d), hi(d), x(d);
        for (int i = 0; i < d; ++i) {
            lo(i) = -3.0 * u(rng) - 0.01;
            hi(i) = 3.0 * u(rng) + 0.01;
            x(i) = lo(i) + u(rng) * (hi(i) - lo(i));
        }
        const BoxDomain box(lo, hi);
        const LineSegment s = intersect(box, x, sample_sphere(d, rng));
        for (int k = 0; k < 100; ++k) {
            const double a = s.alpha_lo + s.length() * k / 99.0;
            ASSERT_TRUE(box.contains(s.offset + a * s.direction, 1e-9));
            ASSERT_TRUE(box.contains(s.embed(a), 0.0));
        }
        if (!s.degenerate()) {
            EXPECT_FALSE(box.contains(s.offset + (s.alpha_lo - 1e-6) * s.direction, 0.0));
            EXPECT_FALSE(box.contains(s.offset + (s.alpha_hi + 1e-6) * s.direction, 0.0));
        }
    }
}

TEST(SampleSphere, UnitNorm) {
    Rng rng(3);
    for (int t = 0; t < 1000; ++t) EXPECT_NEAR(sample_sphere(7, rng).norm(), 1.0, 1e-12);
    EXPECT_THROW(sample_sphere(0, rng), std::invalid_argument);
}

TEST(SampleSphere, OneDimensionalSigns) {
    Rng rng(4);
    int plus = 0;
    const int n = 10000;
    for (int t = 0; t < n; ++t) {
        const double s = sample_sphere(1, rng)(0);
        ASSERT_TRUE(s == 1.0 || s == -1.0);
        plus += s > 0;
    }
    EXPECT_GE(plus / double(n), 0.47);
    EXPECT_LE(plus / double(n), 0.53);
}

TEST(SampleSphere, Isotropy) {
    Rng rng(5);
    const int d = 8, n = 100000;
    Matrix C = Matrix::Zero(d, d);
    for (int t = 0; t < n; ++t) {
        const Vector l = sample_sphere(d, rng);
        C += l * l.transpose();
    }
    C /= n;
    EXPECT_LE((C - Matrix::Identity(d, d) / d).cwiseAbs().maxCoeff(), 0.01);
}

TEST(SampleSphere, DeterministicPerSeed) {
    Rng a(6), b(6);
    EXPECT_EQ(sample_sphere(5, a), sample_sphere(5, b));
}

TEST(CoordinateDirection, Index) {
    Vector e(3);
    e << 0, 1, 0;
    EXPECT_EQ(coordinate_direction(3, 1), e);
    EXPECT_THROW(coordinate_direction(3, 3), std::out_of_range);
    EXPECT_THROW(coordinate_direction(3, -1), std::out_of_range);
}

TEST(CoordinateDirection, UniformFrequencies) {
    Rng rng(7);
    const int d = 5, n = 10000;
    std::vector<int> counts(d, 0);
    for (int t = 0; t < n; ++t) {
        const Vector e = coordinate_direction(d, rng);
        Eigen::Index i = 0;
        e.maxCoeff(&i);
        ++counts[static_cast<std::size_t>(i)];
    }
    for (int c : counts) {
        EXPECT_GE(c / double(n), 1.0 / d - 0.02);
        EXPECT_LE(c / double(n), 1.0 / d + 0.02);
    }
}

TEST(RandomDirectionLemma, SphereAndBasis) {
    Rng rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int d : {2, 5, 10, 40}) {
        Vector grad(d);
        for (int i = 0; i < d; ++i) grad(i) = g(rng);
        const double target = grad.squaredNorm() / d;
        const int n = 100000;
        double sphere = 0.0, basis = 0.0;
        for (int t = 0; t < n; ++t) {
            const double a = grad.dot(sample_sphere(d, rng));
            const double b = grad.dot(coordinate_direction(d, rng));
            sphere += a * a;
            basis += b * b;
        }
        EXPECT_LT(std::abs(sphere / n - target) / target, 0.02) << "sphere d=" << d;
        EXPECT_LT(std::abs(basis / n - target) / target, 0.02) << "basis d=" << d;
    }
}
