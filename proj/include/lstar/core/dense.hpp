#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace lstar {

/// Real dense matrix. Holds signals, iterates, error matrices and the
/// per-measurement matrices of an operator.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when an iterative kernel (SVD sweeps, power iteration) fails to
/// converge or produces non-finite values.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Matrix& x) { return x.allFinite(); }

inline void require_finite(const Matrix& x, const char* what) {
    if (!x.allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
}

/// Frobenius inner product <a, b> = trace(a^T b).
inline double inner(const Matrix& a, const Matrix& b) {
    return a.cwiseProduct(b).sum();
}

/// Column-major vectorization view, matching Eigen storage.
inline Eigen::Map<const Vector> vec_view(const Matrix& x) {
    return {x.data(), x.size()};
}

inline Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

/// Scale for relative comparisons: max(1, value).
inline double rel_scale(double value) { return std::max(1.0, std::abs(value)); }

} // namespace lstar
