#pragma once

// Independent reference implementations used as test oracles. None of them
// share code with the library under test.

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Family { RBF, M32, M52 };

inline double kernel(Family f, double ell, double var, const Vec& a, const Vec& b) {
    const double r = (a - b).norm() / ell;
    switch (f) {
        case Family::RBF: return var * std::exp(-0.5 * r * r);
        case Family::M32: return var * (1.0 + std::sqrt(3.0) * r) * std::exp(-std::sqrt(3.0) * r);
        case Family::M52: return var * (1.0 + std::sqrt(5.0) * r + 5.0 / 3.0 * r * r) * std::exp(-std::sqrt(5.0) * r);
    }
    return 0.0;
}

struct Dense {
    Vec mean;
    Vec std;
};

// Posterior by a dense LU solve of (K + s2 I) against y and the cross-covariances.
inline Dense dense_posterior(Family f, double ell, double var, double s2, const Mat& X, const Vec& y, const Mat& Q) {
    const Eigen::Index n = X.cols(), m = Q.cols();
    Mat K(n, n), Ks(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) K(i, j) = kernel(f, ell, var, X.col(i), X.col(j)) + (i == j ? s2 : 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) Ks(i, j) = kernel(f, ell, var, X.col(i), Q.col(j));
    Eigen::FullPivLU<Mat> lu(K);
    const Vec a = lu.solve(y);
    const Mat B = lu.solve(Ks);
    Dense out{Vec(m), Vec(m)};
    for (Eigen::Index j = 0; j < m; ++j) {
        out.mean(j) = Ks.col(j).dot(a);
        out.std(j) = std::sqrt(std::max(var - Ks.col(j).dot(B.col(j)), 0.0));
    }
    return out;
}

template <typename F>
Vec central_difference(F&& fn, const Vec& x, double h = 1e-6) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (fn(xp) - fn(xm)) / (2.0 * h);
    }
    return g;
}

}  // namespace oracle
