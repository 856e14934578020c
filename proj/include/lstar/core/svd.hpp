#pragma once

#include <lstar/core/dense.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace lstar {

/// Thin SVD x = u * diag(sigma) * v^T with p = min(rows, cols) triplets,
/// sigma sorted nonincreasing.
struct SvdFactors {
    Matrix u;
    Vector sigma;
    Matrix v;

    Matrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

/// Matrices with max(rows, cols) above this size go to Eigen's
/// bidiagonalization SVD instead of one-sided Jacobi.
inline constexpr Eigen::Index kJacobiSvdLimit = 64;

namespace detail {

// Extends the orthonormal columns q.leftCols(filled) with further orthonormal
// columns at the positions listed in `missing`.
inline void complete_orthonormal(Matrix& q, const std::vector<Eigen::Index>& missing) {
    const Eigen::Index n = q.rows();
    std::vector<bool> have(static_cast<std::size_t>(q.cols()), true);
    for (auto j : missing) have[static_cast<std::size_t>(j)] = false;
    for (auto j : missing) {
        Vector best;
        double best_norm = -1.0;
        for (Eigen::Index e = 0; e < n; ++e) {
            Vector c = Vector::Unit(n, e);
            for (int pass = 0; pass < 2; ++pass)
                for (Eigen::Index k = 0; k < q.cols(); ++k)
                    if (have[static_cast<std::size_t>(k)]) c -= q.col(k).dot(c) * q.col(k);
            const double nrm = c.norm();
            if (nrm > best_norm) {
                best_norm = nrm;
                best = c;
            }
            if (best_norm > 0.5) break;
        }
        q.col(j) = best / best_norm;
        have[static_cast<std::size_t>(j)] = true;
    }
}

// Hestenes one-sided Jacobi on a tall (rows >= cols) matrix.
inline SvdFactors jacobi_svd_tall(const Matrix& a) {
    const Eigen::Index n = a.cols();
    Matrix w = a;
    Matrix v = Matrix::Identity(n, n);
    // rotation threshold on the column cosine, as in LAPACK's xGESVJ
    const double eps = std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(a.rows()));
    constexpr int max_sweeps = 80;

    bool converged = (n < 2);
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double alpha = w.col(i).squaredNorm();
                const double beta = w.col(j).squaredNorm();
                const double gamma = w.col(i).dot(w.col(j));
                if (gamma == 0.0) continue;
                if (std::abs(gamma) <= eps * std::sqrt(alpha) * std::sqrt(beta)) continue;
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index k = 0; k < w.rows(); ++k) {
                    const double wi = w(k, i), wj = w(k, j);
                    w(k, i) = c * wi - s * wj;
                    w(k, j) = s * wi + c * wj;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vi = v(k, i), vj = v(k, j);
                    v(k, i) = c * vi - s * vj;
                    v(k, j) = s * vi + c * vj;
                }
            }
        }
    }
    if (!converged) throw numerical_error("svd: one-sided Jacobi did not converge");

    Vector norms(n);
    for (Eigen::Index k = 0; k < n; ++k) norms(k) = w.col(k).norm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index l, Eigen::Index r) { return norms(l) > norms(r); });

    SvdFactors f;
    f.u.resize(a.rows(), n);
    f.v.resize(n, n);
    f.sigma.resize(n);
    const double top = n > 0 ? norms(order[0]) : 0.0;
    std::vector<Eigen::Index> missing;
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        f.sigma(k) = norms(src);
        f.v.col(k) = v.col(src);
        if (norms(src) == 0.0 || norms(src) <= top * 1e-150) {
            f.sigma(k) = 0.0;
            f.u.col(k).setZero();
            missing.push_back(k);
        } else {
            f.u.col(k) = w.col(src) / norms(src);
        }
    }
    if (!missing.empty()) complete_orthonormal(f.u, missing);
    return f;
}

inline SvdFactors bdc_svd(const Matrix& a) {
    Eigen::BDCSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdFactors f{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    if (!f.sigma.allFinite() || !f.u.allFinite() || !f.v.allFinite())
        throw numerical_error("svd: bidiagonalization SVD produced non-finite values");
    return f;
}

} // namespace detail

/// Thin singular value decomposition.
///
/// Uses one-sided Jacobi (deterministic, high relative accuracy) when both
/// dimensions are at most kJacobiSvdLimit and Eigen's BDCSVD otherwise. Left
/// and right factors are always column-orthonormal, including the columns
/// belonging to zero singular values.
inline SvdFactors svd(const Matrix& x) {
    require_finite(x, "svd");
    if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("svd: empty matrix");
    if (std::max(x.rows(), x.cols()) > kJacobiSvdLimit) return detail::bdc_svd(x);
    if (x.rows() >= x.cols()) return detail::jacobi_svd_tall(x);
    SvdFactors t = detail::jacobi_svd_tall(x.transpose());
    return {std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

/// Singular values only, nonincreasing.
inline Vector singular_values(const Matrix& x) { return svd(x).sigma; }

} // namespace lstar
