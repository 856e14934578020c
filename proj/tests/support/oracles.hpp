#pragma once

// Test-only reference computations. Nothing here calls into the library's
// numerical kernels, so the unit and acceptance suites can compare against
// them independently.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace lstar::oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Mat a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = nd(gen);
    return a;
}

/// Random orthonormal columns via Gram-Schmidt on Gaussian vectors.
inline Mat random_orthonormal(Eigen::Index n, Eigen::Index k, std::mt19937_64& gen) {
    Mat q = random_matrix(n, k, gen);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
        q.col(j).normalize();
    }
    return q;
}

/// Classical two-sided cyclic Jacobi eigenvalue iteration on a symmetric
/// matrix. Returns eigenvalues in descending order.
inline Vec jacobi_eigenvalues(Mat a) {
    const Eigen::Index n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off <= 1e-32 * std::max(1.0, a.squaredNorm())) break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    Vec ev = a.diagonal();
    std::sort(ev.data(), ev.data() + n, std::greater<>());
    return ev;
}

/// Singular values from the Jacobi eigenvalues of the smaller Gram matrix.
inline Vec singular_values(const Mat& x) {
    const Mat g = x.rows() <= x.cols() ? Mat(x * x.transpose()) : Mat(x.transpose() * x);
    Vec ev = jacobi_eigenvalues(g);
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
    return ev;
}

/// Explicit m x (n1 n2) matrix with row k = row-major flattening of A_k.
inline Mat vectorize_rows(const std::vector<Mat>& mats) {
    const Eigen::Index n1 = mats.front().rows(), n2 = mats.front().cols();
    Mat m(static_cast<Eigen::Index>(mats.size()), n1 * n2);
    for (std::size_t k = 0; k < mats.size(); ++k)
        for (Eigen::Index i = 0; i < n1; ++i)
            for (Eigen::Index j = 0; j < n2; ++j) m(static_cast<Eigen::Index>(k), i * n2 + j) = mats[k](i, j);
    return m;
}

inline Vec flatten_rows(const Mat& x) {
    Vec v(x.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) v(i * x.cols() + j) = x(i, j);
    return v;
}

/// Extreme singular values of the vectorized operator (ascending eigenvalues
/// of M^T M via the Jacobi oracle): {sqrt(lambda_min), sqrt(lambda_max)}.
inline std::pair<double, double> extreme_singular_values(const std::vector<Mat>& mats) {
    const Mat m = vectorize_rows(mats);
    const Vec ev = jacobi_eigenvalues(m.transpose() * m);
    return {std::sqrt(std::max(ev(ev.size() - 1), 0.0)), std::sqrt(std::max(ev(0), 0.0))};
}

/// Nuclear-norm prox of a 2x2 matrix by grid search over singular values
/// s1 >= s2 >= 0 with the given step, using the singular vectors of x from a
/// closed-form 2x2 polar decomposition. Returns the minimizing Z.
inline Mat prox_grid_2x2(const Mat& x, double threshold, double step) {
    // singular vectors of a 2x2 matrix from the eigenvectors of x^T x
    const Mat g = x.transpose() * x;
    const double tr = g.trace(), det = g.determinant();
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    const double l1 = tr / 2.0 + disc;
    Vec v1(2);
    if (std::abs(g(0, 1)) > 1e-300) v1 << l1 - g(1, 1), g(0, 1);
    else v1 << (g(0, 0) >= g(1, 1) ? 1.0 : 0.0), (g(0, 0) >= g(1, 1) ? 0.0 : 1.0);
    v1.normalize();
    Vec v2(2);
    v2 << -v1(1), v1(0);
    Vec u1 = x * v1, u2 = x * v2;
    const double sg1 = u1.norm(), sg2 = u2.norm();
    u1 = sg1 > 0 ? Vec(u1 / sg1) : Vec::Unit(2, 0);
    if (sg2 > 1e-14 * std::max(1.0, sg1)) u2 /= sg2;
    else u2 << -u1(1), u1(0);

    double best = std::numeric_limits<double>::infinity();
    Mat best_z = Mat::Zero(2, 2);
    const int n = static_cast<int>(std::ceil((sg1 + 1.0) / step));
    for (int i = 0; i <= n; ++i) {
        const double s1 = i * step;
        const double f1 = 0.5 * (s1 - sg1) * (s1 - sg1) + threshold * s1;
        for (int j = 0; j <= i; ++j) {
            const double s2 = j * step;
            const double f = f1 + 0.5 * (s2 - sg2) * (s2 - sg2) + threshold * s2;
            if (f < best) {
                best = f;
                best_z = s1 * u1 * v1.transpose() + s2 * u2 * v2.transpose();
            }
        }
    }
    return best_z;
}

} // namespace lstar::oracle
