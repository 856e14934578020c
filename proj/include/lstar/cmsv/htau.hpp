#pragma once

#include <lstar/core/dense.hpp>
#include <lstar/core/svd.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lstar {

namespace detail {

inline double soft_ratio(const Vector& sigma, double theta) {
    double l1 = 0.0, l2 = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        const double d = sigma(i) - theta;
        if (d > 0) {
            l1 += d;
            l2 += d * d;
        }
    }
    return l2 > 0 ? l1 / std::sqrt(l2) : 1.0;
}

} // namespace detail

/// Maps a nonincreasing nonnegative singular-value vector to the closest
/// alignment point of {s >= 0, ||s||_2 = 1, ||s||_1 <= sqrt(tau)}: the
/// normalized soft-threshold (sigma - theta)_+ whose l1/l2 ratio equals
/// sqrt(tau), with theta found by bisection. When the top value is repeated
/// and tau forbids keeping the tie, the first coordinate alone is kept.
inline Vector project_sigma_htau(const Vector& sigma, double tau) {
    const double nrm = sigma.norm();
    if (!(nrm > 0)) throw std::domain_error("project_htau: zero matrix has no direction");
    const double target = std::sqrt(tau);
    Vector s = sigma / nrm;
    if (s.sum() <= target) return s;

    double lo = 0.0;
    double hi = sigma(0);
    for (int it = 0; it < 300 && hi - lo > 1e-17 * sigma(0); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (detail::soft_ratio(sigma, mid) > target ? lo : hi) = mid;
    }
    s = (sigma.array() - hi).cwiseMax(0.0).matrix();
    if (!(s.squaredNorm() > 0)) {
        s.setZero();
        s(0) = 1.0;
        return s;
    }
    s /= s.norm();
    return s;
}

/// Retraction onto H_tau = {X : ||X||_F = 1, ||X||_*^2 <= tau}: keeps the
/// singular vectors of x and replaces its singular values by
/// project_sigma_htau(sigma(x), tau).
inline Matrix project_htau(const Matrix& x, double tau) {
    const double full = static_cast<double>(std::min(x.rows(), x.cols()));
    if (!(tau >= 1.0 && tau <= full))
        throw std::invalid_argument("project_htau: tau must lie in [1, min(n1, n2)]");
    const SvdFactors f = svd(x);
    const Vector s = project_sigma_htau(f.sigma, tau);
    Eigen::Index keep = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 0) keep = i + 1;
    return f.u.leftCols(keep) * s.head(keep).asDiagonal() * f.v.leftCols(keep).transpose();
}

} // namespace lstar
