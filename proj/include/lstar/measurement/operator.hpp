#pragma once

#include <lstar/core/dense.hpp>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lstar {

/// Linear map R^{n1 x n2} -> R^m stored as the ordered stack {A_1, ..., A_m},
/// with A(X)_k = <A_k, X>. Immutable after construction.
class MeasurementOperator {
public:
    explicit MeasurementOperator(std::vector<Matrix> matrices) : matrices_(std::move(matrices)) {
        if (matrices_.empty()) throw std::invalid_argument("MeasurementOperator: m must be >= 1");
        const auto r = matrices_.front().rows();
        const auto c = matrices_.front().cols();
        if (r < 1 || c < 1) throw std::invalid_argument("MeasurementOperator: empty matrices");
        for (const auto& a : matrices_) {
            if (a.rows() != r || a.cols() != c)
                throw std::invalid_argument("MeasurementOperator: matrices differ in shape");
            require_finite(a, "MeasurementOperator");
        }
    }

    Eigen::Index rows() const noexcept { return matrices_.front().rows(); }
    Eigen::Index cols() const noexcept { return matrices_.front().cols(); }
    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(matrices_.size()); }
    Eigen::Index dim() const noexcept { return rows() * cols(); }

    const Matrix& matrix(Eigen::Index k) const { return matrices_.at(static_cast<std::size_t>(k)); }
    const std::vector<Matrix>& matrices() const noexcept { return matrices_; }

    /// m x (n1 n2) matrix whose k-th row is vec(A_k)^T (column-major vec).
    Matrix vectorized() const {
        Matrix m(size(), dim());
        for (Eigen::Index k = 0; k < size(); ++k) m.row(k) = vec_view(matrix(k)).transpose();
        return m;
    }

    bool operator==(const MeasurementOperator& other) const {
        if (matrices_.size() != other.matrices_.size()) return false;
        for (std::size_t k = 0; k < matrices_.size(); ++k) {
            const auto& a = matrices_[k];
            const auto& b = other.matrices_[k];
            if (a.rows() != b.rows() || a.cols() != b.cols() || a != b) return false;
        }
        return true;
    }

private:
    std::vector<Matrix> matrices_;
};

inline Vector apply(const MeasurementOperator& op, const Matrix& x) {
    if (x.rows() != op.rows() || x.cols() != op.cols())
        throw std::invalid_argument("apply: signal shape does not match operator");
    Vector y(op.size());
    for (Eigen::Index k = 0; k < op.size(); ++k) y(k) = inner(op.matrix(k), x);
    return y;
}

/// A^*(z) = sum_k z_k A_k.
inline Matrix adjoint(const MeasurementOperator& op, const Vector& z) {
    if (z.size() != op.size()) throw std::invalid_argument("adjoint: vector length must equal m");
    Matrix out = Matrix::Zero(op.rows(), op.cols());
    for (Eigen::Index k = 0; k < op.size(); ++k) out += z(k) * op.matrix(k);
    return out;
}

inline MeasurementOperator scale(const MeasurementOperator& op, double c) {
    std::vector<Matrix> mats;
    mats.reserve(op.matrices().size());
    for (const auto& a : op.matrices()) mats.push_back(c * a);
    return MeasurementOperator(std::move(mats));
}

/// A^*(A(x)).
inline Matrix gram_apply(const MeasurementOperator& op, const Matrix& x) {
    return adjoint(op, apply(op, x));
}

/// Operator with A_k = E_k, the standard basis of R^{n1 x n2} in column-major
/// order. It is an isometry: ||A(X)||_2 = ||X||_F.
inline MeasurementOperator standard_basis_operator(Eigen::Index n1, Eigen::Index n2) {
    std::vector<Matrix> mats;
    mats.reserve(static_cast<std::size_t>(n1 * n2));
    for (Eigen::Index j = 0; j < n2; ++j)
        for (Eigen::Index i = 0; i < n1; ++i) {
            Matrix e = Matrix::Zero(n1, n2);
            e(i, j) = 1.0;
            mats.push_back(std::move(e));
        }
    return MeasurementOperator(std::move(mats));
}

/// d(A, B) = (sum_k ||A_k - B_k||_F^2)^{1/2}.
inline double operator_distance(const MeasurementOperator& a, const MeasurementOperator& b) {
    if (a.size() != b.size() || a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("operator_distance: operators differ in shape");
    double s = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) s += (a.matrix(k) - b.matrix(k)).squaredNorm();
    return std::sqrt(s);
}

} // namespace lstar
