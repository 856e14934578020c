#pragma once

#include <lstar/core/norms.hpp>
#include <lstar/measurement/scenario.hpp>
#include <lstar/solvers/common.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lstar {

namespace detail {

// <Y, b> - lambda ||Y||_* over the sign of a candidate Y, rescaled so that
// ||A^*A(Y)||_2 <= 1.
inline double mds_dual_value(const VectorizedOperator& op, const Matrix& b, double lambda,
                             const Matrix& y_cand) {
    const double spec = operator_norm(op.gram(y_cand));
    if (!(spec > 0)) return 0.0;
    const Matrix y = y_cand / std::max(1.0, spec);
    const double yb = inner(y, b);
    const double pen = lambda * nuclear_norm(y);
    return std::max({0.0, yb - pen, -yb - pen});
}

} // namespace detail

/// Matrix Dantzig Selector: minimize ||Z||_* subject to
/// ||A^*(y - A(Z))||_2 <= lambda.
///
/// Two-block ADMM over (V, W) and Z with constraints V = Z and
/// W = (A^*y - A^*A Z) / g, where g = lambda_max(A^*A) balances the blocks.
/// V is updated by singular value thresholding, W by clipping singular values
/// to lambda / g, and Z by an exact solve with I + (A^*A / g)^2 in the
/// eigenbasis of the Gram operator.
/// Multiplier applied to admm_rho * sqrt(n1 n2) / ||A^*y / g||_F.
inline constexpr double kMdsRhoScale = 2.0;

inline RecoveryResult solve_mds(const MeasurementScenario& scenario, double lambda,
                                const SolverConfig& cfg = {}) {
    cfg.validate();
    if (!(lambda >= 0)) throw std::invalid_argument("solve_mds: lambda must be nonnegative");
    const auto& op = scenario.op;
    if (scenario.y.size() != op.size()) throw std::invalid_argument("solve_mds: y length must equal m");

    RecoveryResult out;
    const detail::VectorizedOperator vop(op);
    const Matrix b = vop.adjoint(scenario.y);
    const double b_spec = operator_norm(b);
    if (b_spec <= lambda) {
        out.x_hat = Matrix::Zero(op.rows(), op.cols());
        out.constraint_value = b_spec;
        out.feasible = out.converged = true;
        out.diagnostic = "zero is feasible";
        return out;
    }
    if (vop.s.size() == 0) {
        out.x_hat = Matrix::Zero(op.rows(), op.cols());
        out.constraint_value = b_spec;
        out.diagnostic = "operator is zero";
        return out;
    }

    const double g = vop.s_max * vop.s_max;
    const Vector e = vop.s.cwiseAbs2() / g;                        // eigenvalues of A^*A / g
    const Vector shrink = e.cwiseAbs2().cwiseQuotient((1.0 + e.array().square()).matrix());
    auto gram_hat = [&](const Matrix& x) -> Matrix {
        const Vector c = vop.q.transpose() * vec_view(x);
        return unvec(vop.q * e.cwiseProduct(c), vop.n1, vop.n2);
    };
    auto solve_normal = [&](const Matrix& rhs) -> Matrix {
        const Vector c = vop.q.transpose() * vec_view(rhs);
        return unvec(vec_view(rhs) - vop.q * shrink.cwiseProduct(c), vop.n1, vop.n2);
    };
    const Matrix b_hat = b / g;
    const double radius = lambda / g;
    const double n_sqrt = std::sqrt(static_cast<double>(vop.dim()));

    // penalty relative to the data scale, so rescaling y rescales the iterates
    double rho = cfg.admm_rho * kMdsRhoScale * n_sqrt / b_hat.norm();
    Matrix z = Matrix::Zero(op.rows(), op.cols());
    Matrix v = z, w = z;
    Matrix u1 = z, u2 = z;
    Matrix gz = z;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        v = prox_nuclear(z - u1, 1.0 / rho);
        w = detail::clip_spectral(b_hat - gz - u2, radius);
        const Matrix z_old = z;
        z = solve_normal(v + u1 - gram_hat(w - b_hat + u2));
        gz = gram_hat(z);
        const Matrix r1 = v - z;
        const Matrix r2 = w + gz - b_hat;
        u1 += r1;
        u2 += r2;

        out.iterations = it;
        out.primal_residual = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
        const Matrix dz = z - z_old;
        out.dual_residual = rho * std::sqrt(dz.squaredNorm() + gram_hat(dz).squaredNorm());
        const double eps_pri =
            n_sqrt * cfg.abs_tol +
            cfg.rel_tol * std::max({std::sqrt(v.squaredNorm() + w.squaredNorm()),
                                    std::sqrt(z.squaredNorm() + gz.squaredNorm()), b_hat.norm()});
        const double eps_dual =
            n_sqrt * cfg.abs_tol + cfg.rel_tol * rho * std::sqrt(u1.squaredNorm() + u2.squaredNorm());
        if (cfg.history_stride > 0 && it % cfg.history_stride == 0)
            detail::record(out, cfg, it, nuclear_norm(z), out.primal_residual);

        if (out.primal_residual <= eps_pri && out.dual_residual <= eps_dual) {
            const double violation = operator_norm(b - g * gz) - lambda;
            if (violation <= cfg.abs_tol) {
                const double obj = nuclear_norm(z);
                const double dual = detail::mds_dual_value(vop, b, lambda, rho * u2 / g);
                if (obj - dual <= cfg.rel_tol * rel_scale(obj)) {
                    out.converged = true;
                    break;
                }
            }
        }
        if (cfg.residual_balancing && it % 10 == 0) {
            if (out.primal_residual > 10.0 * out.dual_residual) {
                rho *= 2.0;
                u1 /= 2.0;
                u2 /= 2.0;
            } else if (out.dual_residual > 10.0 * out.primal_residual) {
                rho /= 2.0;
                u1 *= 2.0;
                u2 *= 2.0;
            }
        }
    }

    out.x_hat = z;
    out.objective = nuclear_norm(z);
    out.dual_objective = detail::mds_dual_value(vop, b, lambda, rho * u2 / g);
    out.constraint_value = operator_norm(vop.adjoint(scenario.y - vop.apply(z)));
    out.feasible = out.constraint_value <= lambda + cfg.abs_tol;
    if (!out.converged) out.diagnostic = "max_iters reached before tolerances were met";
    return out;
}

} // namespace lstar
