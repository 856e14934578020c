#pragma once

#include <lstar/core/norms.hpp>
#include <lstar/measurement/scenario.hpp>
#include <lstar/solvers/common.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lstar {

/// Subgradient characterization of A^*(y - A(x)) in mu * d||x||_*.
struct StationarityCertificate {
    double residual_spectral = 0.0;  // ||A^*(y - A(x))||_2
    double alignment = 0.0;          // <A^*(y - A(x)), x>
    double penalty = 0.0;            // mu ||x||_*
    bool holds = false;
};

inline StationarityCertificate lasso_stationarity(const MeasurementOperator& op, const Vector& y,
                                                  const Matrix& x, double mu, double rel_tol) {
    const Matrix g = adjoint(op, y - apply(op, x));
    StationarityCertificate c;
    c.residual_spectral = operator_norm(g);
    c.alignment = inner(g, x);
    c.penalty = mu * nuclear_norm(x);
    c.holds = c.residual_spectral <= mu * (1.0 + rel_tol) && c.alignment >= c.penalty * (1.0 - rel_tol);
    return c;
}

namespace detail {

// max <nu, y> - ||nu||^2 / 2 over nu = s r with ||A^*(nu)||_2 <= mu.
inline double lasso_dual_value(const Vector& y, const Vector& residual, double residual_spectral,
                               double mu) {
    const double s = residual_spectral > mu ? mu / residual_spectral : 1.0;
    const Vector nu = s * residual;
    return nu.dot(y) - 0.5 * nu.squaredNorm();
}

} // namespace detail

/// Matrix LASSO: minimize (1/2)||y - A(Z)||_2^2 + mu ||Z||_*.
///
/// FISTA with step 1/L, L = lambda_max(A^*A) from power iteration, and a
/// function-value restart: a step that would increase the objective is
/// discarded and retried from the last accepted point with the momentum reset,
/// so accepted objectives never increase.
inline RecoveryResult solve_mlasso(const MeasurementScenario& scenario, double mu,
                                   const SolverConfig& cfg = {}) {
    cfg.validate();
    if (!(mu > 0)) throw std::invalid_argument("solve_mlasso: mu must be positive");
    const auto& op = scenario.op;
    const Vector& y = scenario.y;
    if (y.size() != op.size()) throw std::invalid_argument("solve_mlasso: y length must equal m");

    RecoveryResult out;
    const detail::VectorizedOperator vop(op);
    const Matrix b = vop.adjoint(y);
    const double b_spec = operator_norm(b);
    if (b_spec <= mu) {
        out.x_hat = Matrix::Zero(op.rows(), op.cols());
        out.objective = 0.5 * y.squaredNorm();
        out.dual_objective = detail::lasso_dual_value(y, y, b_spec, mu);
        out.constraint_value = b_spec;
        out.feasible = out.converged = true;
        out.diagnostic = "zero is stationary";
        return out;
    }

    const auto lip = power_iteration_gram_norm(vop.m, 1e-12, 10000);
    if (!lip.converged) out.diagnostic = "power iteration did not converge; ";
    const double big_l = lip.value * (1.0 + 1e-9);

    auto objective = [&](const Matrix& x) {
        return 0.5 * (y - vop.apply(x)).squaredNorm() + mu * nuclear_norm(x);
    };
    auto smooth = [&](const Matrix& x) { return 0.5 * (y - vop.apply(x)).squaredNorm(); };

    double step = 1.0 / big_l;
    if (cfg.step_rule.kind == StepRuleKind::fixed && cfg.step_rule.t > 0) step = cfg.step_rule.t;
    if (cfg.step_rule.kind == StepRuleKind::backtracking) step = cfg.step_rule.t0;

    Matrix x = Matrix::Zero(op.rows(), op.cols());
    double f_x = objective(x);
    Matrix yk = x;
    double t = 1.0;
    const double n_sqrt = std::sqrt(static_cast<double>(vop.dim()));

    for (int it = 1; it <= cfg.max_iters; ++it) {
        const Matrix grad = vop.gram(yk) - b;
        Matrix x_new = prox_nuclear(yk - step * grad, mu * step);
        if (cfg.step_rule.kind == StepRuleKind::backtracking) {
            const double f_y = smooth(yk);
            for (int bt = 0; bt < 60; ++bt) {
                const Matrix d = x_new - yk;
                if (smooth(x_new) <= f_y + inner(grad, d) + d.squaredNorm() / (2.0 * step)) break;
                step *= cfg.step_rule.beta;
                x_new = prox_nuclear(yk - step * grad, mu * step);
            }
        }
        const double f_new = objective(x_new);
        out.iterations = it;

        if (f_new > f_x && t > 1.0) {
            // restart from the last accepted point
            t = 1.0;
            yk = x;
            continue;
        }
        const Matrix dx = x_new - x;
        out.primal_residual = (x_new - yk).norm() / step;
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        yk = x_new + ((t - 1.0) / t_new) * dx;
        t = t_new;
        x = std::move(x_new);
        f_x = f_new;
        out.dual_residual = dx.norm();
        if (cfg.history_stride > 0 && it % cfg.history_stride == 0)
            detail::record(out, cfg, it, f_x, out.primal_residual);

        const double tol = n_sqrt * cfg.abs_tol + cfg.rel_tol * rel_scale(b.norm());
        if (out.primal_residual <= tol) {
            const Vector r = y - vop.apply(x);
            const double spec = operator_norm(vop.adjoint(r));
            const double dual = detail::lasso_dual_value(y, r, spec, mu);
            if (f_x - dual <= cfg.rel_tol * rel_scale(f_x)) {
                out.converged = true;
                break;
            }
        }
    }

    out.x_hat = x;
    out.objective = f_x;
    const Vector r = y - vop.apply(x);
    out.constraint_value = operator_norm(vop.adjoint(r));
    out.dual_objective = detail::lasso_dual_value(y, r, out.constraint_value, mu);
    out.feasible = true;
    if (!out.converged) out.diagnostic += "max_iters reached before tolerances were met";
    return out;
}

} // namespace lstar
