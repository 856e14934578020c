#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

// Closed-form recovery error bounds in terms of the l*-constrained minimal
// singular value rho, and the older mRIC-based bounds for comparison.

namespace lstar {

namespace detail {
inline void require_positive_rho(double rho, const char* what) {
    if (!(rho > 0)) throw std::domain_error(std::string(what) + ": bound undefined unless rho > 0");
}
} // namespace detail

/// ||X_hat - X||_F <= 2 epsilon / rho_{8r} for matrix Basis Pursuit.
inline double bound_mbp(double epsilon, double rho_8r) {
    if (!(epsilon >= 0)) throw std::invalid_argument("bound_mbp: epsilon must be nonnegative");
    detail::require_positive_rho(rho_8r, "bound_mbp");
    return 2.0 * epsilon / rho_8r;
}

/// ||X_hat - X||_F <= 4 sqrt(2) sqrt(r) lambda / rho_{8r}^2 for the Dantzig Selector.
inline double bound_mds(int r, double lambda, double rho_8r) {
    if (r < 1) throw std::invalid_argument("bound_mds: r must be >= 1");
    if (!(lambda >= 0)) throw std::invalid_argument("bound_mds: lambda must be nonnegative");
    detail::require_positive_rho(rho_8r, "bound_mds");
    return 4.0 * std::numbers::sqrt2 * std::sqrt(static_cast<double>(r)) * lambda / (rho_8r * rho_8r);
}

/// l*-rank level at which rho enters the LASSO bound: 8r / (1 - kappa)^2.
inline double lasso_subscript(int r, double kappa) {
    if (!(kappa > 0 && kappa < 1)) throw std::invalid_argument("lasso_subscript: kappa must lie in (0, 1)");
    return 8.0 * r / ((1.0 - kappa) * (1.0 - kappa));
}

/// ((1 + kappa) / (1 - kappa)) * 2 sqrt(2) sqrt(r) mu / rho^2, valid when
/// ||A^*(w)||_2 <= kappa mu; rho must be taken at lasso_subscript(r, kappa).
inline double bound_mlasso(int r, double mu, double kappa, double rho) {
    if (r < 1) throw std::invalid_argument("bound_mlasso: r must be >= 1");
    if (!(kappa > 0 && kappa < 1)) throw std::invalid_argument("bound_mlasso: kappa must lie in (0, 1)");
    if (!(mu > 0)) throw std::invalid_argument("bound_mlasso: mu must be positive");
    detail::require_positive_rho(rho, "bound_mlasso");
    return (1.0 + kappa) / (1.0 - kappa) * 2.0 * std::numbers::sqrt2 *
           std::sqrt(static_cast<double>(r)) * mu / (rho * rho);
}

/// Upper end of the mRIC validity range, delta_4r < sqrt(2) - 1.
inline constexpr double kMricLimit = std::numbers::sqrt2 - 1.0;

/// 4 sqrt(1 + delta) epsilon / (1 - (1 + sqrt 2) delta); nullopt when
/// delta_4r >= sqrt(2) - 1 (bound inapplicable).
inline std::optional<double> bound_mbp_mric(double epsilon, double delta_4r) {
    if (!(epsilon >= 0)) throw std::invalid_argument("bound_mbp_mric: epsilon must be nonnegative");
    if (!(delta_4r >= 0)) throw std::invalid_argument("bound_mbp_mric: delta must be nonnegative");
    if (delta_4r >= kMricLimit) return std::nullopt;
    return 4.0 * std::sqrt(1.0 + delta_4r) / (1.0 - (1.0 + std::numbers::sqrt2) * delta_4r) * epsilon;
}

/// 16 sqrt(r) lambda / (1 - (sqrt 2 + 1) delta); nullopt when inapplicable.
inline std::optional<double> bound_mds_mric(int r, double lambda, double delta_4r) {
    if (r < 1) throw std::invalid_argument("bound_mds_mric: r must be >= 1");
    if (!(lambda >= 0)) throw std::invalid_argument("bound_mds_mric: lambda must be nonnegative");
    if (!(delta_4r >= 0)) throw std::invalid_argument("bound_mds_mric: delta must be nonnegative");
    if (delta_4r >= kMricLimit) return std::nullopt;
    return 16.0 / (1.0 - (std::numbers::sqrt2 + 1.0) * delta_4r) * std::sqrt(static_cast<double>(r)) * lambda;
}

} // namespace lstar
