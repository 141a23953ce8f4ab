#pragma once

#include "sareo/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace sareo {

struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> v;  // row-major n*n

    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t dim) : n(dim), v(dim * dim, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return v[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return v[i * n + j]; }
};

inline SquareMatrix identity_matrix(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

inline SquareMatrix matmul(const SquareMatrix& a, const SquareMatrix& b) {
    require(a.n == b.n, Errc::DimensionMismatch, "matrix product dimension mismatch");
    SquareMatrix c(a.n);
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t k = 0; k < a.n; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < a.n; ++j) c.at(i, j) += aik * b.at(k, j);
        }
    return c;
}

inline double trace(const SquareMatrix& m) {
    double t = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) t += m.at(i, i);
    return t;
}

inline double frobenius_norm(const SquareMatrix& m) {
    double s = 0.0;
    for (double x : m.v) s += x * x;
    return std::sqrt(s);
}

inline bool all_finite(const SquareMatrix& m) {
    for (double x : m.v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double max_abs(const SquareMatrix& m) {
    double mx = 0.0;
    for (double x : m.v) mx = std::max(mx, std::abs(x));
    return mx;
}

// Symmetric PSD square root by eigendecomposition. Eigenvalues that dip
// slightly negative from rounding are clamped at zero.
inline SquareMatrix sqrtm_spd(const SquareMatrix& m) {
    require(m.n > 0, Errc::InvalidArgument, "empty matrix");
    require(all_finite(m), Errc::NotFiniteInput, "matrix square root of non-finite input");
    const double sym_tol = 1e-8 * std::max(1.0, max_abs(m));
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = i + 1; j < m.n; ++j)
            require(std::abs(m.at(i, j) - m.at(j, i)) <= sym_tol, Errc::NotSymmetric,
                    "matrix square root input is not symmetric");

    Eigen::MatrixXd em(m.n, m.n);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j)
            em(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                0.5 * (m.at(i, j) + m.at(j, i));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(em);
    require(solver.info() == Eigen::Success, Errc::NotFiniteInput, "eigendecomposition failed");
    Eigen::VectorXd lam = solver.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = lam(i) > 0.0 ? std::sqrt(lam(i)) : 0.0;
    Eigen::MatrixXd ex = solver.eigenvectors() * lam.asDiagonal() * solver.eigenvectors().transpose();

    SquareMatrix x(m.n);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j) {
            const double xij = ex(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const double xji = ex(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            x.at(i, j) = 0.5 * (xij + xji);
        }
    return x;
}

}  // namespace sareo
