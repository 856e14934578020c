#pragma once

#include <lstar/cmsv/htau.hpp>
#include <lstar/core/norms.hpp>
#include <lstar/measurement/operator.hpp>
#include <lstar/random/ensembles.hpp>
#include <lstar/random/rng.hpp>
#include <lstar/solvers/common.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lstar {

enum class Direction { min, max };

/// Which side of the true extremal value an estimate bounds. Any feasible
/// witness upper-bounds an infimum and lower-bounds a supremum.
enum class Evidence { upper_bound_on_min, lower_bound_on_max };

inline std::string to_string(Direction d) { return d == Direction::min ? "min" : "max"; }
inline std::string to_string(Evidence e) {
    return e == Evidence::upper_bound_on_min ? "upper_bound_on_min" : "lower_bound_on_max";
}
inline Direction direction_from_string(const std::string& s) {
    if (s == "min") return Direction::min;
    if (s == "max") return Direction::max;
    throw std::invalid_argument("unknown direction '" + s + "'");
}
inline Evidence evidence_for(Direction d) {
    return d == Direction::min ? Evidence::upper_bound_on_min : Evidence::lower_bound_on_max;
}

/// Estimate of rho_tau^min or rho_tau^max together with its witness.
struct CmsvEstimate {
    double tau = 1.0;
    Direction direction = Direction::min;
    double value = 0.0;  // ||A(witness)||_2
    Matrix witness;      // ||witness||_F = 1, tau(witness) <= tau
    int starts = 0;
    std::vector<double> per_start_values;
    std::vector<int> per_start_iterations;
    int converged_starts = 0;
    Evidence evidence = Evidence::upper_bound_on_min;
};

namespace detail {

inline bool better(Direction d, double candidate, double incumbent) {
    return d == Direction::min ? candidate < incumbent : candidate > incumbent;
}

inline void check_tau(const MeasurementOperator& op, double tau, const char* what) {
    const double full = static_cast<double>(std::min(op.rows(), op.cols()));
    if (!(tau >= 1.0 && tau <= full))
        throw std::invalid_argument(std::string(what) + ": tau must lie in [1, min(n1, n2)]");
}

// Checks the CmsvEstimate invariants and recomputes value from the stack form.
inline void finalize_estimate(CmsvEstimate& e, const MeasurementOperator& op) {
    const double fro = e.witness.norm();
    if (std::abs(fro - 1.0) > 1e-9)
        throw numerical_error("cmsv: witness lost unit Frobenius norm");
    if (lstar_rank(e.witness) > e.tau * (1.0 + 1e-9))
        throw numerical_error("cmsv: witness violates the l*-rank constraint");
    e.value = apply(op, e.witness).norm();
    e.evidence = evidence_for(e.direction);
}

} // namespace detail

/// Multi-start projected gradient estimate of rho_tau^min (descent) or
/// rho_tau^max (ascent) on ||A(X)||_2^2 over H_tau.
///
/// Each start draws a Gaussian matrix from derive_seed(seed, start), projects
/// it onto H_tau and iterates X <- P(X -+ A^*A(X) / lambda_max(A^*A)), i.e.
/// gradient steps of length 1 / (2 lambda_max). Starts stop when
/// ||X_new - X||_F <= cfg.abs_tol or after cfg.max_iters steps. The best start
/// wins, ties going to the lowest index. The step is scale-equivariant, so
/// scaling the operator by c scales the estimate by c under the same seed.
inline CmsvEstimate estimate_cmsv(const MeasurementOperator& op, double tau, Direction direction,
                                  int starts, std::uint64_t seed, const SolverConfig& cfg = {}) {
    detail::check_tau(op, tau, "estimate_cmsv");
    if (starts < 1) throw std::invalid_argument("estimate_cmsv: starts must be >= 1");
    cfg.validate();

    const Matrix vm = op.vectorized();
    const Matrix gram = vm.transpose() * vm;
    const auto lip = power_iteration_gram_norm(vm, 1e-12, 10000);
    const double big_l = lip.value;
    const double sign = direction == Direction::min ? -1.0 : 1.0;
    const Eigen::Index n1 = op.rows(), n2 = op.cols();

    CmsvEstimate est;
    est.tau = tau;
    est.direction = direction;
    est.starts = starts;
    bool have = false;
    for (int k = 0; k < starts; ++k) {
        CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        Matrix x = project_htau(draw_gaussian_matrix(n1, n2, rng), tau);
        int iters = 0;
        bool converged = big_l == 0.0;
        while (!converged && iters < cfg.max_iters) {
            ++iters;
            const Vector g = gram * vec_view(x);
            const Matrix step = unvec(g / big_l, n1, n2);
            Matrix next = x + sign * step;
            if (!(next.norm() > 0)) break;  // exact null direction of I - G/L
            next = project_htau(next, tau);
            converged = (next - x).norm() <= cfg.abs_tol;
            x = std::move(next);
        }
        // same evaluation as finalize_estimate, so the winner compares exactly
        const double value = apply(op, x).norm();
        est.per_start_values.push_back(value);
        est.per_start_iterations.push_back(iters);
        if (converged) ++est.converged_starts;
        if (!have || detail::better(direction, value, est.value)) {
            est.value = value;
            est.witness = x;
            have = true;
        }
    }
    detail::finalize_estimate(est, op);
    return est;
}

/// Independent oracle for tiny instances (n1 n2 <= 9): evaluates ||A(X)||_2 on
/// `samples` random unit-Frobenius matrices pushed through project_htau, then
/// (if refine) runs a shrinking-radius random search from the three best
/// samples. Without refinement the sample set depends only on (shape, tau,
/// samples, seed), so estimates for two operators share their points.
inline CmsvEstimate brute_force_cmsv(const MeasurementOperator& op, double tau, Direction direction,
                                     int samples, std::uint64_t seed, bool refine = true) {
    if (op.dim() > 9) throw std::invalid_argument("brute_force_cmsv: requires n1 * n2 <= 9");
    if (samples < 10000) throw std::invalid_argument("brute_force_cmsv: samples must be >= 1e4");
    detail::check_tau(op, tau, "brute_force_cmsv");

    const Matrix vm = op.vectorized();
    const Eigen::Index n1 = op.rows(), n2 = op.cols();
    auto eval = [&](const Matrix& x) { return (vm * vec_view(x)).norm(); };

    constexpr int kKeep = 3;
    std::vector<std::pair<double, Matrix>> best;  // sorted, best first
    CounterRng rng(derive_seed(seed, 0));
    for (int i = 0; i < samples; ++i) {
        Matrix g = draw_gaussian_matrix(n1, n2, rng);
        if (!(g.norm() > 0)) continue;
        Matrix x = project_htau(g, tau);
        const double v = eval(x);
        if (static_cast<int>(best.size()) < kKeep || detail::better(direction, v, best.back().first)) {
            auto pos = best.begin();
            while (pos != best.end() && !detail::better(direction, v, pos->first)) ++pos;
            best.insert(pos, {v, std::move(x)});
            if (static_cast<int>(best.size()) > kKeep) best.pop_back();
        }
    }

    CmsvEstimate est;
    est.tau = tau;
    est.direction = direction;
    est.starts = samples;
    est.value = best.front().first;
    est.witness = best.front().second;
    if (refine) {
        CounterRng walk(derive_seed(seed, 1));
        for (auto& [value, x] : best) {
            double radius = 0.05;
            int failures = 0;
            for (int trial = 0; trial < 40000 && radius > 1e-11; ++trial) {
                Matrix d = draw_gaussian_matrix(n1, n2, walk);
                Matrix cand = x + (radius / d.norm()) * d;
                if (!(cand.norm() > 0)) continue;
                cand = project_htau(cand, tau);
                const double v = eval(cand);
                if (detail::better(direction, v, value)) {
                    value = v;
                    x = std::move(cand);
                    failures = 0;
                    radius *= 1.5;
                } else if (++failures >= 30) {
                    radius *= 0.5;
                    failures = 0;
                }
            }
            est.per_start_values.push_back(value);
            if (detail::better(direction, value, est.value)) {
                est.value = value;
                est.witness = x;
            }
        }
    }
    detail::finalize_estimate(est, op);
    return est;
}

/// Rank-constrained analogue: estimate of nu_r^min or nu_r^max.
struct RcsvEstimate {
    int r = 1;
    Direction direction = Direction::min;
    double value = 0.0;
    Matrix witness;  // rank <= r, ||witness||_F = 1
    int starts = 0;
    std::vector<double> per_start_values;
    Evidence evidence = Evidence::upper_bound_on_min;
};

namespace detail {

inline Matrix orthonormal_columns(const Matrix& a) {
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

// Extremal eigenvector of B^T B where row k of B is vec(fk(k))^T.
template <class RowFn>
Vector extremal_direction(Eigen::Index m, Eigen::Index len, RowFn&& fk, Direction d) {
    Matrix b(m, len);
    for (Eigen::Index k = 0; k < m; ++k) b.row(k) = fk(k).transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.transpose() * b);
    if (es.info() != Eigen::Success) throw numerical_error("estimate_rcsv: eigen solver failed");
    return d == Direction::min ? Vector(es.eigenvectors().col(0))
                               : Vector(es.eigenvectors().col(len - 1));
}

} // namespace detail

/// Alternating minimization (or maximization) over X = L R^T. With R
/// orthonormalized, ||X||_F = ||L||_F and ||A(X)||_2 is a quadratic form in L,
/// so each half-sweep takes the exact extremal eigenvector of that form;
/// the R half-sweep is symmetric. Sweeps stop when the value changes by at
/// most cfg.abs_tol relative, or after cfg.max_iters sweeps.
inline RcsvEstimate estimate_rcsv(const MeasurementOperator& op, int r, Direction direction,
                                  int starts, std::uint64_t seed, const SolverConfig& cfg = {}) {
    const Eigen::Index n1 = op.rows(), n2 = op.cols();
    if (r < 1 || r > std::min(n1, n2))
        throw std::invalid_argument("estimate_rcsv: r must lie in [1, min(n1, n2)]");
    if (starts < 1) throw std::invalid_argument("estimate_rcsv: starts must be >= 1");
    cfg.validate();

    const Eigen::Index m = op.size();
    const Matrix vm = op.vectorized();
    RcsvEstimate est;
    est.r = r;
    est.direction = direction;
    est.starts = starts;
    bool have = false;
    for (int k = 0; k < starts; ++k) {
        CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        Matrix left = draw_gaussian_matrix(n1, r, rng);
        Matrix right = draw_gaussian_matrix(n2, r, rng);
        Matrix x;
        double value = 0.0, prev = -1.0;
        for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
            const Matrix qr = detail::orthonormal_columns(right);
            const Vector l = detail::extremal_direction(
                m, n1 * r, [&](Eigen::Index i) -> Vector { return Matrix(op.matrix(i) * qr).reshaped(); },
                direction);
            left = unvec(l, n1, r);
            const Matrix ql = detail::orthonormal_columns(left);
            const Vector rv = detail::extremal_direction(
                m, n2 * r,
                [&](Eigen::Index i) -> Vector { return Matrix(op.matrix(i).transpose() * ql).reshaped(); },
                direction);
            right = unvec(rv, n2, r);
            x = ql * right.transpose();
            x /= x.norm();
            value = (vm * vec_view(x)).norm();
            if (prev >= 0 && std::abs(value - prev) <= cfg.abs_tol * std::max(value, 1e-300)) break;
            prev = value;
        }
        est.per_start_values.push_back(value);
        if (!have || detail::better(direction, value, est.value)) {
            est.value = value;
            est.witness = x;
            have = true;
        }
    }
    if (numerical_rank(est.witness, 1e-12) > r) throw numerical_error("estimate_rcsv: witness rank exceeds r");
    est.value = apply(op, est.witness).norm();
    est.evidence = evidence_for(direction);
    return est;
}

/// max(|1 - rho_min^2|, |rho_max^2 - 1|). With rho_r^min / rho_r^max this
/// upper-bounds the mRIC delta_r; with nu_r^min / nu_r^max it equals delta_r.
inline double mric_upper_bound(double rho_min, double rho_max) {
    if (!(rho_min >= 0) || rho_min > rho_max)
        throw std::invalid_argument("mric_upper_bound: requires 0 <= rho_min <= rho_max");
    return std::max(std::abs(1.0 - rho_min * rho_min), std::abs(rho_max * rho_max - 1.0));
}

/// delta_r from rank-constrained singular values (same expression, exact
/// relation rather than a bound).
inline double mric_from_rcsv(double nu_min, double nu_max) { return mric_upper_bound(nu_min, nu_max); }

} // namespace lstar
