#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace linebo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;

/// Raised when a linear-algebra step fails even after jitter escalation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class KernelFamily { RBF, Matern32, Matern52 };

inline std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::RBF: return "rbf";
        case KernelFamily::Matern32: return "matern32";
        case KernelFamily::Matern52: return "matern52";
    }
    return "unknown";
}

inline KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "rbf" || name == "RBF" || name == "se") return KernelFamily::RBF;
    if (name == "matern32" || name == "Matern32") return KernelFamily::Matern32;
    if (name == "matern52" || name == "Matern52") return KernelFamily::Matern52;
    throw std::invalid_argument("unknown kernel family: " + std::string(name));
}

/// Isotropic stationary kernel with a single lengthscale and output variance.
struct KernelSpec {
    KernelFamily family = KernelFamily::RBF;
    double lengthscale = 1.0;
    double variance = 1.0;

    void validate() const {
        if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
            throw std::invalid_argument("kernel lengthscale must be positive");
        if (!(variance > 0.0) || !std::isfinite(variance))
            throw std::invalid_argument("kernel variance must be positive");
    }
};

namespace detail {

inline void check_same_dim(const VectorRef& x, const VectorRef& xp) {
    if (x.size() != xp.size())
        throw std::invalid_argument("kernel arguments have different dimensions");
}

inline constexpr double kSqrt3 = 1.7320508075688772935;
inline constexpr double kSqrt5 = 2.2360679774997896964;

// k as a function of the squared distance.
inline double kernel_from_sq_dist(const KernelSpec& spec, double sq_dist) {
    const double l2 = spec.lengthscale * spec.lengthscale;
    switch (spec.family) {
        case KernelFamily::RBF:
            return spec.variance * std::exp(-0.5 * sq_dist / l2);
        case KernelFamily::Matern32: {
            const double r = std::sqrt(sq_dist) / spec.lengthscale;
            return spec.variance * (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r);
        }
        case KernelFamily::Matern52: {
            const double r = std::sqrt(sq_dist) / spec.lengthscale;
            return spec.variance * (1.0 + kSqrt5 * r + 5.0 * r * r / 3.0) * std::exp(-kSqrt5 * r);
        }
    }
    return 0.0;
}

// Scalar w with dk/dx = -w * (x - x'). Finite at zero lag for every family.
inline double gradient_weight(const KernelSpec& spec, double sq_dist) {
    const double l2 = spec.lengthscale * spec.lengthscale;
    switch (spec.family) {
        case KernelFamily::RBF:
            return spec.variance / l2 * std::exp(-0.5 * sq_dist / l2);
        case KernelFamily::Matern32: {
            const double r = std::sqrt(sq_dist) / spec.lengthscale;
            return 3.0 * spec.variance / l2 * std::exp(-kSqrt3 * r);
        }
        case KernelFamily::Matern52: {
            const double r = std::sqrt(sq_dist) / spec.lengthscale;
            return 5.0 * spec.variance / (3.0 * l2) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
        }
    }
    return 0.0;
}

}  // namespace detail

inline double kernel_eval(const KernelSpec& spec, const VectorRef& x, const VectorRef& xp) {
    detail::check_same_dim(x, xp);
    return detail::kernel_from_sq_dist(spec, (x - xp).squaredNorm());
}

/// Gradient of k(x, x') with respect to the first argument.
/// At zero lag this is the zero vector for all families.
inline Vector kernel_grad(const KernelSpec& spec, const VectorRef& x, const VectorRef& xp) {
    detail::check_same_dim(x, xp);
    const Vector diff = x - xp;
    return -detail::gradient_weight(spec, diff.squaredNorm()) * diff;
}

/// Prior covariance of the gradient at a single point, Cov(df/dx_i, df/dx_j),
/// which is c * I for isotropic stationary kernels. Returns c.
inline double gradient_prior_variance(const KernelSpec& spec) {
    return detail::gradient_weight(spec, 0.0);
}

/// Gram matrix between the columns of A (d x n) and B (d x m).
inline Matrix kernel_matrix(const KernelSpec& spec, const MatrixRef& A, const MatrixRef& B) {
    if (A.rows() != B.rows())
        throw std::invalid_argument("kernel_matrix: inputs have different dimensions");
    Matrix K(A.cols(), B.cols());
    for (Eigen::Index j = 0; j < B.cols(); ++j)
        for (Eigen::Index i = 0; i < A.cols(); ++i)
            K(i, j) = detail::kernel_from_sq_dist(spec, (A.col(i) - B.col(j)).squaredNorm());
    return K;
}

}  // namespace linebo
