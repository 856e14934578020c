#pragma once

#include <lstar/core/dense.hpp>
#include <lstar/core/svd.hpp>

#include <cmath>
#include <stdexcept>

namespace lstar {

inline constexpr double kDefaultRankTol = 1e-9;

inline double nuclear_norm(const Matrix& x) { return singular_values(x).sum(); }

inline double frobenius_norm(const Matrix& x) {
    require_finite(x, "frobenius_norm");
    return x.norm();
}

/// Largest singular value.
inline double operator_norm(const Matrix& x) { return singular_values(x)(0); }

/// Number of singular values above tol * sigma_1; zero for the zero matrix.
inline int numerical_rank(const Vector& sigma, double tol = kDefaultRankTol) {
    if (tol < 0) throw std::invalid_argument("numerical_rank: tol must be nonnegative");
    if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > tol * sigma(0)) ++r;
    return r;
}

inline int numerical_rank(const Matrix& x, double tol = kDefaultRankTol) {
    return numerical_rank(singular_values(x), tol);
}

/// ||s||_1^2 / ||s||_2^2 for a nonnegative singular-value vector.
inline double lstar_rank_of_sigma(const Vector& sigma) {
    const double f2 = sigma.squaredNorm();
    if (!(f2 > 0)) throw std::domain_error("lstar_rank: undefined for the zero matrix");
    const double l1 = sigma.sum();
    return l1 * l1 / f2;
}

/// The l*-rank ||x||_*^2 / ||x||_F^2, a scale-invariant value in
/// [1, min(rows, cols)]. Throws std::domain_error for the zero matrix.
inline double lstar_rank(const Matrix& x) { return lstar_rank_of_sigma(singular_values(x)); }

/// Singular value soft-thresholding, the proximal map of threshold * ||.||_*.
inline Matrix prox_nuclear(const Matrix& x, double threshold) {
    if (!(threshold >= 0)) throw std::invalid_argument("prox_nuclear: threshold must be nonnegative");
    if (threshold == 0.0) return x;
    SvdFactors f = svd(x);
    Eigen::Index keep = 0;
    for (Eigen::Index i = 0; i < f.sigma.size(); ++i) {
        f.sigma(i) = std::max(f.sigma(i) - threshold, 0.0);
        if (f.sigma(i) > 0) keep = i + 1;
    }
    if (keep == 0) return Matrix::Zero(x.rows(), x.cols());
    return f.u.leftCols(keep) * f.sigma.head(keep).asDiagonal() * f.v.leftCols(keep).transpose();
}

/// Split of an error matrix relative to the singular subspaces of a signal.
struct ErrorDecomposition {
    Matrix h0;  // h - hc, rank at most 2 rank(x)
    Matrix hc;  // component orthogonal to both singular subspaces of x
    int signal_rank = 0;
};

/// hc = (I - U U^T) h (I - V V^T), h0 = h - hc, where U, V span the column and
/// row spaces of x at rank tolerance tol.
inline ErrorDecomposition decompose_error(const Matrix& h, const Matrix& x,
                                          double tol = kDefaultRankTol) {
    require_same_shape(h, x, "decompose_error");
    const SvdFactors f = svd(x);
    const int r = numerical_rank(f.sigma, tol);
    ErrorDecomposition d;
    d.signal_rank = r;
    if (r == 0) {
        d.hc = h;
        d.h0 = Matrix::Zero(h.rows(), h.cols());
        return d;
    }
    const Matrix u = f.u.leftCols(r);
    const Matrix v = f.v.leftCols(r);
    const Matrix left = h - u * (u.transpose() * h);
    d.hc = left - (left * v) * v.transpose();
    d.h0 = h - d.hc;
    return d;
}

/// True iff a b^T and a^T b both vanish to 1e-8 relative tolerance, the
/// condition under which ||a + b||_* = ||a||_* + ||b||_*.
inline bool nuclear_additivity_check(const Matrix& a, const Matrix& b, double tol = 1e-8) {
    require_same_shape(a, b, "nuclear_additivity_check");
    const double scale = rel_scale(a.norm() * b.norm());
    return (a * b.transpose()).norm() <= tol * scale && (a.transpose() * b).norm() <= tol * scale;
}

} // namespace lstar
