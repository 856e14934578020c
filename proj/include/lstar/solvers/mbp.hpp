#pragma once

#include <lstar/core/norms.hpp>
#include <lstar/measurement/scenario.hpp>
#include <lstar/solvers/common.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lstar {

namespace detail {

/// Euclidean projection onto {z : ||M vec(z) - y||_2 <= epsilon} using the
/// thin SVD of M. Components outside the row space of M are left untouched;
/// inside it the KKT point (I + t M^T M)^{-1}(z + t M^T y) is located by
/// bisection on t.
class ResidualBallProjector {
public:
    ResidualBallProjector(const VectorizedOperator& op, const Vector& y, double epsilon)
        : op_(op), epsilon_(epsilon) {
        y_coef_ = op.p.transpose() * y;
        floor2_ = (y - op.p * y_coef_).squaredNorm();  // direct, no cancellation
    }

    /// Smallest achievable residual norm, dist(y, range(A)).
    double floor() const { return std::sqrt(floor2_); }

    Matrix project(const Matrix& z) const {
        const Vector zv = vec_view(z);
        const Vector c = op_.q.transpose() * zv;
        const Vector res = op_.s.cwiseProduct(c) - y_coef_;
        const double eps2 = epsilon_ * epsilon_;
        if (res.squaredNorm() + floor2_ <= eps2) return z;

        Vector c_new(c.size());
        if (floor2_ >= eps2 || epsilon_ == 0.0) {
            c_new = y_coef_.cwiseQuotient(op_.s);
        } else {
            const Vector s2 = op_.s.cwiseAbs2();
            auto excess = [&](double t) {
                double acc = floor2_;
                for (Eigen::Index i = 0; i < res.size(); ++i) {
                    const double d = res(i) / (1.0 + t * s2(i));
                    acc += d * d;
                }
                return acc - eps2;
            };
            double lo = 0.0;
            double hi = 1.0 / (op_.s_max * op_.s_max);
            while (excess(hi) > 0.0 && hi < 1e300) {
                lo = hi;
                hi *= 4.0;
            }
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (excess(mid) > 0.0 ? lo : hi) = mid;
            }
            for (Eigen::Index i = 0; i < c.size(); ++i)
                c_new(i) = c(i) - hi * op_.s(i) * res(i) / (1.0 + hi * s2(i));
        }
        const Vector out = zv + op_.q * (c_new - c);
        return unvec(out, op_.n1, op_.n2);
    }

private:
    const VectorizedOperator& op_;
    double epsilon_;
    Vector y_coef_;
    double floor2_ = 0.0;
};

// Lower bound <nu, y> - eps ||nu|| from a candidate multiplier matrix g with
// A^*(nu) ~ g, nu rescaled so that ||A^*(nu)||_2 <= 1.
inline double mbp_dual_value(const VectorizedOperator& op, const Vector& y, double epsilon,
                             const Matrix& g) {
    if (op.s.size() == 0) return 0.0;
    const Vector coef = op.q.transpose() * vec_view(g);
    const Vector nu = op.p * coef.cwiseQuotient(op.s);
    const double spec = operator_norm(op.adjoint(nu));
    if (!(spec > 0)) return 0.0;
    double best = 0.0;
    for (double sign : {1.0, -1.0}) {
        const Vector cand = sign * nu / std::max(1.0, spec);
        best = std::max(best, cand.dot(y) - epsilon * cand.norm());
    }
    return best;
}

// Same bound with nu along the residual r = y - A(z). At the optimum the
// multiplier is r / ||A^*(r)||_2, including the part of r outside range(A)
// that the multiplier-matrix route cannot see when m > n1 n2.
inline double mbp_residual_dual_value(const VectorizedOperator& op, const Vector& y, double epsilon,
                                      const Matrix& z) {
    const Vector r = y - op.apply(z);
    const double spec = operator_norm(op.adjoint(r));
    if (!(spec > 0)) return 0.0;
    return std::max(0.0, (r.dot(y) - epsilon * r.norm()) / spec);
}

inline double mbp_dual(const VectorizedOperator& op, const Vector& y, double epsilon, const Matrix& g,
                       const Matrix& z) {
    return std::max(mbp_dual_value(op, y, epsilon, g), mbp_residual_dual_value(op, y, epsilon, z));
}

} // namespace detail

/// Matrix Basis Pursuit: minimize ||Z||_* subject to ||y - A(Z)||_2 <= epsilon.
///
/// ADMM on min ||W||_* + 1_C(Z) s.t. W = Z, where C is the residual ball. The
/// W-step is singular value thresholding at 1/rho and the Z-step the exact
/// projection onto C, so the returned x_hat = Z is feasible at every iterate.
/// Termination requires small ADMM residuals and a duality gap within
/// rel_tol * max(1, objective).
inline RecoveryResult solve_mbp(const MeasurementScenario& scenario, double epsilon,
                                const SolverConfig& cfg = {}) {
    cfg.validate();
    if (!(epsilon >= 0)) throw std::invalid_argument("solve_mbp: epsilon must be nonnegative");
    const auto& op = scenario.op;
    if (scenario.y.size() != op.size()) throw std::invalid_argument("solve_mbp: y length must equal m");

    RecoveryResult out;
    const Vector& y = scenario.y;
    if (y.norm() <= epsilon) {
        out.x_hat = Matrix::Zero(op.rows(), op.cols());
        out.constraint_value = y.norm();
        out.feasible = out.converged = true;
        out.diagnostic = "zero is feasible";
        return out;
    }

    const detail::VectorizedOperator vop(op);
    const detail::ResidualBallProjector proj(vop, y, epsilon);
    const double n_sqrt = std::sqrt(static_cast<double>(vop.dim()));
    const double y_scale = rel_scale(y.norm());
    const bool infeasible = proj.floor() > epsilon + cfg.abs_tol * y_scale;
    if (infeasible) {
        out.diagnostic = "infeasible: dist(y, range(A)) = " + std::to_string(proj.floor()) +
                         " exceeds epsilon";
    }

    double rho = cfg.admm_rho;
    Matrix z = proj.project(Matrix::Zero(op.rows(), op.cols()));
    Matrix w = z;
    Matrix u = Matrix::Zero(op.rows(), op.cols());
    for (int it = 1; it <= cfg.max_iters; ++it) {
        w = prox_nuclear(z - u, 1.0 / rho);
        const Matrix z_old = z;
        z = proj.project(w + u);
        u += w - z;

        out.iterations = it;
        out.primal_residual = (w - z).norm();
        out.dual_residual = rho * (z - z_old).norm();
        const double eps_pri = n_sqrt * cfg.abs_tol + cfg.rel_tol * std::max(w.norm(), z.norm());
        const double eps_dual = n_sqrt * cfg.abs_tol + cfg.rel_tol * rho * u.norm();
        if (cfg.history_stride > 0 && it % cfg.history_stride == 0)
            detail::record(out, cfg, it, nuclear_norm(z), out.primal_residual);

        if (out.primal_residual <= eps_pri && out.dual_residual <= eps_dual) {
            const double obj = nuclear_norm(z);
            const double dual = detail::mbp_dual(vop, y, epsilon, -rho * u, z);
            if (obj - dual <= cfg.rel_tol * rel_scale(obj)) {
                out.converged = true;
                out.objective = obj;
                out.dual_objective = dual;
                break;
            }
        }
        if (cfg.residual_balancing && it % 10 == 0) {
            if (out.primal_residual > 10.0 * out.dual_residual) {
                rho *= 2.0;
                u /= 2.0;
            } else if (out.dual_residual > 10.0 * out.primal_residual) {
                rho /= 2.0;
                u *= 2.0;
            }
        }
    }

    out.x_hat = z;
    out.objective = nuclear_norm(z);
    out.dual_objective = detail::mbp_dual(vop, y, epsilon, -rho * u, z);
    out.constraint_value = (y - vop.apply(z)).norm();
    out.feasible = out.constraint_value <= epsilon + cfg.abs_tol;
    // the iterates still settle on the nearest feasible-in-range point
    if (infeasible) out.converged = false;
    if (!out.converged && out.diagnostic.empty())
        out.diagnostic = "max_iters reached before tolerances were met";
    return out;
}

} // namespace lstar
