#pragma once

#include <lstar/core/dense.hpp>
#include <lstar/core/norms.hpp>
#include <lstar/core/svd.hpp>
#include <lstar/measurement/operator.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace lstar {

enum class StepRuleKind { fixed, backtracking };

/// Step rule for proximal-gradient solvers. A fixed step t <= 0 means 1/L.
struct StepRule {
    StepRuleKind kind = StepRuleKind::fixed;
    double t = 0.0;
    double beta = 0.5;
    double t0 = 1.0;

    static StepRule fixed(double t = 0.0) { return {StepRuleKind::fixed, t, 0.5, 1.0}; }
    static StepRule backtracking(double beta, double t0) {
        return {StepRuleKind::backtracking, 0.0, beta, t0};
    }
};

struct SolverConfig {
    int max_iters = 20000;
    double abs_tol = 1e-8;
    double rel_tol = 1e-6;
    StepRule step_rule{};
    double admm_rho = 1.0;
    bool residual_balancing = false;
    /// Record (iter, objective, residual) every history_stride iterations; 0 disables.
    int history_stride = 0;

    void validate() const {
        if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
        if (!(abs_tol > 0) || !(rel_tol > 0))
            throw std::invalid_argument("SolverConfig: tolerances must be positive");
        if (!(admm_rho > 0)) throw std::invalid_argument("SolverConfig: admm_rho must be positive");
        if (step_rule.kind == StepRuleKind::backtracking &&
            !(step_rule.beta > 0 && step_rule.beta < 1 && step_rule.t0 > 0))
            throw std::invalid_argument("SolverConfig: backtracking needs 0 < beta < 1 and t0 > 0");
    }
};

struct HistoryEntry {
    int iter = 0;
    double objective = 0.0;
    double residual = 0.0;
};

struct RecoveryResult {
    Matrix x_hat;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective = 0.0;
    /// Lower bound on the optimal value from a feasible dual point.
    double dual_objective = 0.0;
    /// Constraint value at x_hat: ||y - A(x_hat)||_2 for mBP,
    /// ||A^*(y - A(x_hat))||_2 for mDS and mLASSO.
    double constraint_value = 0.0;
    bool feasible = false;
    bool converged = false;
    std::string diagnostic;
    std::vector<HistoryEntry> history;

    double gap() const { return objective - dual_objective; }
};

namespace detail {

/// Vectorized operator M (m x n, n = n1 n2) with its thin SVD M = P S Q^T,
/// restricted to the numerically nonzero singular values.
struct VectorizedOperator {
    Eigen::Index n1 = 0, n2 = 0;
    Matrix m;
    Matrix p;
    Vector s;
    Matrix q;
    double s_max = 0.0;

    explicit VectorizedOperator(const MeasurementOperator& op)
        : n1(op.rows()), n2(op.cols()), m(op.vectorized()) {
        SvdFactors f = svd(m);
        s_max = f.sigma.size() ? f.sigma(0) : 0.0;
        const Eigen::Index k = numerical_rank(f.sigma, 1e-12);
        p = f.u.leftCols(k);
        s = f.sigma.head(k);
        q = f.v.leftCols(k);
    }

    Eigen::Index dim() const { return n1 * n2; }
    Vector apply(const Matrix& x) const { return m * vec_view(x); }
    Matrix adjoint(const Vector& z) const { return unvec(m.transpose() * z, n1, n2); }
    Matrix gram(const Matrix& x) const { return adjoint(apply(x)); }
};

/// Projection onto the operator-norm ball of radius r by clipping singular values.
inline Matrix clip_spectral(const Matrix& x, double radius) {
    SvdFactors f = svd(x);
    if (f.sigma(0) <= radius) return x;
    for (Eigen::Index i = 0; i < f.sigma.size(); ++i) f.sigma(i) = std::min(f.sigma(i), radius);
    return f.reconstruct();
}

inline void record(RecoveryResult& r, const SolverConfig& cfg, int iter, double obj, double res) {
    if (cfg.history_stride > 0 && iter % cfg.history_stride == 0) r.history.push_back({iter, obj, res});
}

} // namespace detail

/// Largest eigenvalue of A^*A by power iteration.
struct PowerIterationResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline PowerIterationResult power_iteration_gram_norm(const Matrix& vectorized, double tol,
                                                      int max_iters) {
    if (!(tol > 0)) throw std::invalid_argument("power_iteration_gram_norm: tol must be positive");
    const Eigen::Index n = vectorized.cols();
    // fixed, non-symmetric start vector so no eigenvector is missed by symmetry
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + 3.0 * static_cast<double>(i));
    v.normalize();
    PowerIterationResult out;
    double prev = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        const Vector av = vectorized * v;
        const double rq = av.squaredNorm();
        out.value = rq;
        out.iterations = it;
        Vector w = vectorized.transpose() * av;
        const double nw = w.norm();
        if (nw == 0.0) {
            out.converged = true;
            return out;
        }
        v = w / nw;
        if (it > 1 && std::abs(rq - prev) <= tol * rq) {
            // nw = ||G v_old|| >= Rayleigh quotient; take the tighter final value
            out.value = std::max(rq, (vectorized * v).squaredNorm());
            out.converged = true;
            return out;
        }
        prev = rq;
    }
    return out;
}

/// lambda_max(A^* A), i.e. the squared unconstrained maximal singular value.
inline PowerIterationResult power_iteration_gram_norm(const MeasurementOperator& op, double tol,
                                                      int max_iters) {
    return power_iteration_gram_norm(op.vectorized(), tol, max_iters);
}

} // namespace lstar
