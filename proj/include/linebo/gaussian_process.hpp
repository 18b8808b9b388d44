#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "linebo/kernel.hpp"

namespace linebo {

using Rng = std::mt19937_64;

/// Confidence-width multiplier for f_hat +- beta * sigma.
struct ConfidenceParams {
    double beta = 2.0;

    void validate() const {
        if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    }
};

struct Prediction {
    double mean = 0.0;
    double std = 0.0;
};

struct BatchPrediction {
    Vector mean;
    Vector std;

    [[nodiscard]] Vector lower(double beta) const { return mean - beta * std; }
    [[nodiscard]] Vector upper(double beta) const { return mean + beta * std; }
};

/// Exact GP regression with zero prior mean and Gaussian likelihood.
///
/// Inputs are stored column-wise (d x n). The lower Cholesky factor of
/// K + jitter * I is kept alongside alpha = (K + jitter * I)^-1 y, where the
/// jitter starts at max(noise_std^2, 1e-10) and is only raised when a
/// factorization fails. Single-writer: `update` and `remove` mutate in place,
/// all const members are safe to call concurrently.
class GaussianProcess {
public:
    static constexpr double kMinJitter = 1e-10;
    static constexpr double kMaxEscalatedJitter = 1e-4;

    GaussianProcess(KernelSpec kernel, double noise_std, int dim)
        : kernel_(kernel), noise_std_(noise_std), dim_(dim), X_(dim, 0), y_(0), L_(0, 0), alpha_(0) {
        kernel_.validate();
        if (!(noise_std > 0.0)) throw std::invalid_argument("noise_std must be positive");
        if (dim < 1) throw std::invalid_argument("GP input dimension must be >= 1");
        jitter_ = base_jitter();
    }

    static GaussianProcess fit(const KernelSpec& kernel, double noise_std, const MatrixRef& X,
                               const VectorRef& y) {
        if (X.cols() != y.size()) throw std::invalid_argument("fit: |X| != |y|");
        GaussianProcess gp(kernel, noise_std, static_cast<int>(X.rows()));
        gp.X_ = X;
        gp.y_ = y;
        gp.refactor(gp.base_jitter());
        return gp;
    }

    [[nodiscard]] GaussianProcess updated(const VectorRef& x, double y) const {
        GaussianProcess next = *this;
        next.update(x, y);
        return next;
    }

    /// Appends one observation by extending the Cholesky factor with a new
    /// row, which costs O(n^2). Falls back to a full refactorization with
    /// jitter escalation when the new pivot is not positive.
    void update(const VectorRef& x, double y) {
        check_dim(x);
        const Eigen::Index n = size();
        Vector k(n);
        for (Eigen::Index i = 0; i < n; ++i)
            k(i) = detail::kernel_from_sq_dist(kernel_, (X_.col(i) - x).squaredNorm());

        X_.conservativeResize(Eigen::NoChange, n + 1);
        X_.col(n) = x;
        y_.conservativeResize(n + 1);
        y_(n) = y;

        const Vector l = n > 0 ? Vector(L_.triangularView<Eigen::Lower>().solve(k)) : Vector(0);
        const double pivot_sq = kernel_.variance + jitter_ - l.squaredNorm();
        if (!(pivot_sq > 0.0) || !std::isfinite(pivot_sq)) {
            try {
                refactor(jitter_);
            } catch (const NumericalError&) {
                X_.conservativeResize(Eigen::NoChange, n);
                y_.conservativeResize(n);
                throw;
            }
            return;
        }
        L_.conservativeResize(n + 1, n + 1);
        L_.col(n).setZero();
        L_.row(n).head(n) = l.transpose();
        L_(n, n) = std::sqrt(pivot_sq);
        solve_alpha();
    }

    /// Drops observation `index`. The trailing block of the factor receives
    /// a rank-one update, so no refactorization is needed.
    void remove(Eigen::Index index) {
        const Eigen::Index n = size();
        if (index < 0 || index >= n) throw std::out_of_range("GaussianProcess::remove: bad index");
        const Eigen::Index tail = n - index - 1;

        Matrix L33 = L_.bottomRightCorner(tail, tail);
        Vector v = L_.col(index).tail(tail);
        for (Eigen::Index k = 0; k < tail; ++k) {
            const double r = std::hypot(L33(k, k), v(k));
            const double c = r / L33(k, k);
            const double s = v(k) / L33(k, k);
            L33(k, k) = r;
            for (Eigen::Index i = k + 1; i < tail; ++i) {
                L33(i, k) = (L33(i, k) + s * v(i)) / c;
                v(i) = c * v(i) - s * L33(i, k);
            }
        }

        Matrix L(n - 1, n - 1);
        L.setZero();
        L.topLeftCorner(index, index) = L_.topLeftCorner(index, index);
        L.bottomLeftCorner(tail, index) = L_.bottomLeftCorner(tail, index);
        L.bottomRightCorner(tail, tail) = L33.triangularView<Eigen::Lower>();
        L_ = std::move(L);

        Matrix X(dim_, n - 1);
        X.leftCols(index) = X_.leftCols(index);
        X.rightCols(tail) = X_.rightCols(tail);
        X_ = std::move(X);

        Vector y(n - 1);
        y.head(index) = y_.head(index);
        y.tail(tail) = y_.tail(tail);
        y_ = std::move(y);

        solve_alpha();
    }

    [[nodiscard]] Prediction predict(const VectorRef& x) const {
        check_dim(x);
        const Eigen::Index n = size();
        if (n == 0) return {0.0, std::sqrt(kernel_.variance)};
        Vector k(n);
        for (Eigen::Index i = 0; i < n; ++i)
            k(i) = detail::kernel_from_sq_dist(kernel_, (X_.col(i) - x).squaredNorm());
        const Vector v = L_.triangularView<Eigen::Lower>().solve(k);
        const double var = kernel_.variance - v.squaredNorm();
        return {k.dot(alpha_), std::sqrt(std::max(var, 0.0))};
    }

    /// Predictions at the columns of Xq (d x m).
    [[nodiscard]] BatchPrediction predict_batch(const MatrixRef& Xq) const {
        if (Xq.rows() != dim_) throw std::invalid_argument("predict: query dimension mismatch");
        const Eigen::Index m = Xq.cols();
        BatchPrediction out{Vector::Zero(m), Vector::Constant(m, std::sqrt(kernel_.variance))};
        if (size() == 0) return out;
        const Matrix Ks = kernel_matrix(kernel_, X_, Xq);
        out.mean.noalias() = Ks.transpose() * alpha_;
        const Matrix V = L_.triangularView<Eigen::Lower>().solve(Ks);
        const Vector reduction = V.colwise().squaredNorm().transpose();
        for (Eigen::Index j = 0; j < m; ++j)
            out.std(j) = std::sqrt(std::max(kernel_.variance - reduction(j), 0.0));
        return out;
    }

    /// Gradient of the posterior mean: sum_i alpha_i * dk(x, x_i)/dx.
    [[nodiscard]] Vector mean_grad(const VectorRef& x) const {
        check_dim(x);
        Vector g = Vector::Zero(dim_);
        for (Eigen::Index i = 0; i < size(); ++i) {
            const Vector diff = x - X_.col(i);
            g -= alpha_(i) * detail::gradient_weight(kernel_, diff.squaredNorm()) * diff;
        }
        return g;
    }

    /// Draws the gradient of a posterior sample path at x from its exact joint
    /// Gaussian law: mean = mean_grad(x), covariance = c*I - G^T (K+jI)^-1 G
    /// where G holds the cross-covariances dk(x, x_i)/dx.
    [[nodiscard]] Vector sample_gradient(const VectorRef& x, Rng& rng) const {
        check_dim(x);
        const Eigen::Index n = size();
        const double prior = gradient_prior_variance(kernel_);
        Matrix cov = prior * Matrix::Identity(dim_, dim_);
        Vector mean = Vector::Zero(dim_);
        if (n > 0) {
            Matrix G(n, dim_);
            for (Eigen::Index i = 0; i < n; ++i) {
                const Vector diff = x - X_.col(i);
                G.row(i) = (-detail::gradient_weight(kernel_, diff.squaredNorm()) * diff).transpose();
            }
            mean.noalias() = G.transpose() * alpha_;
            const Matrix V = L_.triangularView<Eigen::Lower>().solve(G);
            cov.noalias() -= V.transpose() * V;
        }

        std::normal_distribution<double> normal(0.0, 1.0);
        Vector z(dim_);
        for (int i = 0; i < dim_; ++i) z(i) = normal(rng);

        for (double jitter = kMinJitter * prior; jitter <= kMaxEscalatedJitter * prior * 1.0000001;
             jitter *= 10.0) {
            Eigen::LLT<Matrix> llt(cov + jitter * Matrix::Identity(dim_, dim_));
            if (llt.info() == Eigen::Success) return mean + llt.matrixL() * z;
        }
        throw NumericalError("sample_gradient: gradient covariance is not positive definite");
    }

    [[nodiscard]] Eigen::Index size() const { return X_.cols(); }
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }
    [[nodiscard]] double noise_std() const { return noise_std_; }
    [[nodiscard]] double jitter() const { return jitter_; }
    [[nodiscard]] const Matrix& inputs() const { return X_; }
    [[nodiscard]] const Vector& targets() const { return y_; }
    [[nodiscard]] const Vector& weights() const { return alpha_; }
    [[nodiscard]] Matrix cholesky() const { return L_.triangularView<Eigen::Lower>(); }

private:
    [[nodiscard]] double base_jitter() const { return std::max(noise_std_ * noise_std_, kMinJitter); }

    void check_dim(const VectorRef& x) const {
        if (x.size() != dim_) throw std::invalid_argument("GP query has wrong dimension");
    }

    void refactor(double start_jitter) {
        const Eigen::Index n = size();
        const Matrix K = kernel_matrix(kernel_, X_, X_);
        const double limit = std::max(kMaxEscalatedJitter, start_jitter) * 1.0000001;
        for (double jitter = start_jitter; jitter <= limit; jitter *= 10.0) {
            Eigen::LLT<Matrix> llt(K + jitter * Matrix::Identity(n, n));
            if (llt.info() == Eigen::Success) {
                L_ = llt.matrixL();
                jitter_ = jitter;
                solve_alpha();
                return;
            }
        }
        throw NumericalError("GP factorization failed after jitter escalation");
    }

    void solve_alpha() {
        if (size() == 0) {
            alpha_.resize(0);
            return;
        }
        alpha_ = L_.triangularView<Eigen::Lower>().solve(y_);
        L_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
    }

    KernelSpec kernel_;
    double noise_std_;
    int dim_;
    double jitter_ = kMinJitter;
    Matrix X_;
    Vector y_;
    Matrix L_;
    Vector alpha_;
};

}  // namespace linebo
